#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "wotchat/sentiment/sentiment.hpp"
#include "wotchat/store/store.hpp"
#include "wotchat/text.hpp"

namespace wotchat::sentiment {

using nlohmann::json;

namespace {

std::vector<std::string> tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '\'') {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

void check_status(const httplib::Result& res, std::string_view service) {
    if (!res) throw BackendUnavailable(std::string(service) + ": " + httplib::to_string(res.error()));
    const int status = res->status;
    if (status == 401 || status == 403) throw AuthError(std::string(service) + ": HTTP " + std::to_string(status));
    if (status == 429 || status >= 500) throw BackendUnavailable(std::string(service) + ": HTTP " + std::to_string(status));
    if (status != 200) throw MalformedResponse(std::string(service) + ": unexpected HTTP " + std::to_string(status));
}

std::unique_ptr<httplib::Client> client_for(const HttpEndpoint& e) {
    auto cli = std::make_unique<httplib::Client>(e.base_url);
    cli->set_connection_timeout(5);
    cli->set_read_timeout(15);
    return cli;
}

}  // namespace

MockBackend::MockBackend(std::string name, Scale scale, std::map<std::string, double> valence,
                         std::map<std::string, FixedAnswer> fixed)
    : name_(std::move(name)), scale_(scale), valence_(std::move(valence)), fixed_(std::move(fixed)) {}

std::string MockBackend::response_body(std::string_view text) const {
    FixedAnswer answer;
    if (auto it = fixed_.find(std::string(text)); it != fixed_.end()) {
        answer = it->second;
    } else {
        std::set<std::string> seen;
        double sum = 0;
        for (const auto& t : tokens(text)) {
            auto v = valence_.find(t);
            if (v == valence_.end() || !seen.insert(t).second) continue;
            answer.keywords.push_back({t, v->second});
            sum += v->second;
        }
        const double mean = answer.keywords.empty() ? 0.0 : sum / static_cast<double>(answer.keywords.size());
        answer.raw = scale_ == Scale::azure ? (mean + 1.0) / 2.0 : mean;
    }

    json j;
    if (scale_ == Scale::azure) {
        j["documents"] = json::array({{{"id", "1"}, {"score", answer.raw}}});
        j["errors"] = json::array();
    } else {
        j["type"] = std::string(to_string(polarity_for(Scale::twinword, answer.raw)));
        j["score"] = answer.raw;
        j["keywords"] = json::array();
        for (const auto& k : answer.keywords) j["keywords"].push_back({{"word", k.term}, {"score", k.score}});
        j["result_code"] = "200";
        j["result_msg"] = "Success";
    }
    return j.dump();
}

SentimentResult MockBackend::analyze(std::string_view text) {
    ++calls_;
    auto body = response_body(text);
    return scale_ == Scale::azure ? parse_azure(body, name_) : parse_twinword(body, name_);
}

std::unique_ptr<MockBackend> load_mock(const std::filesystem::path& path, Scale scale, std::string name) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read mock sentiment table " + path.string());
    auto j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw std::runtime_error("mock sentiment table is not JSON: " + path.string());

    std::map<std::string, double> valence;
    const json valence_table = j.value("valence", json::object());
    for (auto& [k, v] : valence_table.items()) valence[to_lower_ascii(k)] = v.get<double>();

    std::map<std::string, FixedAnswer> fixed;
    const json fixed_all = j.value("fixed", json::object());
    const json fixed_table = fixed_all.value(std::string(to_string(scale)), json::object());
    for (auto& [text, v] : fixed_table.items()) {
        FixedAnswer a;
        a.raw = v.at("score").get<double>();
        for (const auto& k : v.value("keywords", json::array()))
            a.keywords.push_back({k.at("word").get<std::string>(), k.at("score").get<double>()});
        fixed[text] = std::move(a);
    }
    return std::make_unique<MockBackend>(std::move(name), scale, std::move(valence), std::move(fixed));
}

HttpEndpoint split_url(std::string_view url) {
    auto scheme = url.find("://");
    if (scheme == std::string_view::npos) throw std::invalid_argument("URL without scheme: " + std::string(url));
    auto slash = url.find('/', scheme + 3);
    if (slash == std::string_view::npos) return {std::string(url), "/"};
    return {std::string(url.substr(0, slash)), std::string(url.substr(slash))};
}

TwinwordBackend::TwinwordBackend(std::string name, std::string url, std::string key)
    : name_(std::move(name)), endpoint_(split_url(url)), key_(std::move(key)) {}

SentimentResult TwinwordBackend::analyze(std::string_view text) {
    auto cli = client_for(endpoint_);
    httplib::Headers headers{{"X-RapidAPI-Key", key_}, {"Accept", "application/json"}};
    httplib::Params params{{"text", std::string(text)}};
    auto res = cli->Post(endpoint_.path, headers, params);
    check_status(res, name_);
    return parse_twinword(res->body, name_);
}

AzureBackend::AzureBackend(std::string name, std::string url, std::string key, double cut)
    : name_(std::move(name)), endpoint_(split_url(url)), key_(std::move(key)), cut_(cut) {}

SentimentResult AzureBackend::analyze(std::string_view text) {
    auto cli = client_for(endpoint_);
    httplib::Headers headers{{"Ocp-Apim-Subscription-Key", key_}, {"Accept", "application/json"}};
    json body;
    body["documents"] = json::array({{{"id", "1"}, {"language", "en"}, {"text", std::string(text)}}});
    auto res = cli->Post(endpoint_.path, headers, body.dump(), "application/json");
    check_status(res, name_);
    return parse_azure(res->body, name_, cut_);
}

BackendConfig parse_backend_config(std::string_view text) {
    BackendConfig c;
    for (const auto& [key, value] : parse_key_value(text, "backend config")) {
        if (key == "name") c.name = value;
        else if (key == "kind") c.kind = value;
        else if (key == "endpoint") c.endpoint = value;
        else if (key == "key_env") c.key_env = value;
        else if (key == "scale") c.scale = value;
        else if (key == "table") c.table = value;
        else if (key == "rate") c.rate = std::stod(value);
        else if (key == "azure_cut") c.azure_cut = std::stod(value);
        else throw std::invalid_argument("backend config: unknown key '" + key + "'");
    }
    if (c.kind != "twinword-style" && c.kind != "azure-style" && c.kind != "mock")
        throw std::invalid_argument("backend config: kind must be twinword-style, azure-style or mock");
    if (c.kind != "mock" && (c.endpoint.empty() || c.key_env.empty()))
        throw std::invalid_argument("backend config: endpoint and key_env are required");
    if (c.scale != "twinword" && c.scale != "azure") throw std::invalid_argument("backend config: scale must be twinword or azure");
    if (c.name.empty()) c.name = c.kind;
    return c;
}

BackendConfig load_backend_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read backend config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_backend_config(ss.str());
}

std::unique_ptr<Backend> make_backend(const BackendConfig& c, const std::filesystem::path& data_dir) {
    if (c.kind == "mock") {
        auto table = c.table.empty() ? data_dir / "sentiment" / "mock.json" : std::filesystem::path(c.table);
        return load_mock(table, c.scale == "azure" ? Scale::azure : Scale::twinword, c.name);
    }
    const char* key = std::getenv(c.key_env.c_str());
    if (!key || !*key) throw AuthError("environment variable " + c.key_env + " is not set");
    if (c.kind == "twinword-style") return std::make_unique<TwinwordBackend>(c.name, c.endpoint, key);
    return std::make_unique<AzureBackend>(c.name, c.endpoint, key, c.azure_cut);
}

RateLimiter::RateLimiter(double per_second, double burst)
    : rate_(per_second), capacity_(burst > 0 ? burst : std::max(1.0, per_second)), tokens_(capacity_),
      last_(Clock::now()) {}

void RateLimiter::acquire() {
    if (rate_ <= 0) return;
    std::lock_guard lock(mutex_);
    auto refill = [&] {
        auto now = Clock::now();
        tokens_ = std::min(capacity_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
        last_ = now;
    };
    refill();
    if (tokens_ < 1.0) {
        std::this_thread::sleep_for(std::chrono::duration<double>((1.0 - tokens_) / rate_));
        refill();
    }
    tokens_ = std::max(0.0, tokens_ - 1.0);
}

SentimentService::SentimentService(Backend& backend, store::Store* st, double rate, int max_attempts)
    : backend_(backend), store_(st), limiter_(rate), max_attempts_(std::max(1, max_attempts)) {}

SentimentResult SentimentService::analyze(std::string_view text) {
    const std::string hash = sha256_hex(text);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(hash); it != cache_.end()) return it->second;
    }
    if (store_) {
        if (auto cached = store_->cached_sentiment(backend_.name(), hash)) {
            auto r = result_from_json(*cached);
            std::lock_guard lock(mutex_);
            cache_.emplace(hash, r);
            return r;
        }
    }

    for (int attempt = 1;; ++attempt) {
        limiter_.acquire();
        try {
            SentimentResult r;
            {
                std::lock_guard lock(mutex_);
                ++backend_calls_;
            }
            r = backend_.analyze(text);
            if (store_) store_->cache_sentiment(backend_.name(), hash, result_to_json(r));
            std::lock_guard lock(mutex_);
            cache_.emplace(hash, r);
            return r;
        } catch (const BackendError& e) {
            if (!e.retryable() || attempt >= max_attempts_) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));
        }
    }
}

}  // namespace wotchat::sentiment
