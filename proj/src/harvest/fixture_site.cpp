#include "wotchat/harvest/fixture_site.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace wotchat::harvest {

using nlohmann::json;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

const char* const kChatLines[] = {
    "gg",          "gl hf",           "noob team",          "push left",   "arty is useless",
    "wp",          "why no cap",      "thanks for the help", "lol",         "you idiot",
    "tomato spotted", "def base!",    "**** you",           "nice shot",   "shut up",
};

}  // namespace

FixtureManifest parse_manifest(std::string_view text) {
    auto j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("fixture manifest is not a JSON object");
    FixtureManifest m;
    m.replays = j.value("replays", m.replays);
    m.links_per_page = j.value("links_per_page", m.links_per_page);
    m.seed = j.value("seed", m.seed);
    m.players_per_match = j.value("players_per_match", m.players_per_match);
    m.account_pool = j.value("account_pool", m.account_pool);
    m.missing = j.value("missing", m.missing);
    m.corrupt = j.value("corrupt", m.corrupt);
    m.unknown_accounts = j.value("unknown_accounts", m.unknown_accounts);
    m.app_id = j.value("app_id", m.app_id);
    if (m.links_per_page == 0) throw std::invalid_argument("fixture manifest: links_per_page must be positive");
    if (m.players_per_match == 0 || m.players_per_match > m.account_pool)
        throw std::invalid_argument("fixture manifest: players_per_match must be in 1..account_pool");
    return m;
}

FixtureManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read fixture manifest " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

std::size_t listing_pages(const FixtureManifest& m) {
    return (m.replays + m.links_per_page - 1) / m.links_per_page;
}

std::string replay_path(std::size_t index) { return "/download/" + std::to_string(index) + ".wotreplay"; }

std::uint64_t fixture_account(std::size_t pool_index) { return 10'000'000 + pool_index; }

codec::FixtureSpec fixture_replay(const FixtureManifest& m, std::size_t index) {
    std::mt19937_64 rng(splitmix(m.seed * 1'000'003 + index));
    codec::FixtureSpec spec;
    spec.realm = index % 3 == 0 ? "NA" : "EU";
    std::set<std::size_t> chosen;
    while (chosen.size() < m.players_per_match) chosen.insert(rng() % m.account_pool);
    int n = 0;
    for (auto p : chosen) {
        const auto id = fixture_account(p);
        spec.players.push_back({id, "tanker" + std::to_string(p), "T-34", n++ % 2 ? 2 : 1});
    }
    spec.extra_meta_blocks.push_back("{\"fixture_index\":" + std::to_string(index) + "}");

    std::uniform_real_distribution<float> clock(0.0f, 420.0f);
    const std::size_t chats = 3 + rng() % 6;
    for (std::size_t i = 0; i < chats; ++i) {
        const auto& author = spec.players[rng() % spec.players.size()];
        spec.events.push_back(codec::FixtureChat{author.account_id, clock(rng), kChatLines[rng() % std::size(kChatLines)]});
    }
    const std::size_t deaths = rng() % (spec.players.size() + 1);
    for (std::size_t i = 0; i < deaths; ++i) {
        const auto& victim = spec.players[i];
        const auto& killer = spec.players[rng() % spec.players.size()];
        spec.events.push_back(codec::FixtureDeath{victim.account_id, killer.account_id == victim.account_id ? 0 : killer.account_id, clock(rng)});
    }
    return spec;
}

PlayerSnapshot fixture_stats(std::uint64_t account_id) {
    const auto h = splitmix(account_id);
    PlayerSnapshot s;
    s.account_id = account_id;
    s.battles = 50 + h % 30'000;
    const auto wins = s.battles * (40 + (h >> 20) % 21) / 100;
    s.experience_total = s.battles * (300 + (h >> 32) % 700);
    s.win_rate = static_cast<double>(wins) / static_cast<double>(s.battles);
    return s;
}

FixtureSite::FixtureSite(FixtureManifest manifest, codec::ReplayKey key)
    : manifest_(std::move(manifest)), key_(key), server_(std::make_unique<httplib::Server>()),
      downloads_(manifest_.replays, 0) {
    install_routes();
}

FixtureSite::~FixtureSite() { stop(); }

void FixtureSite::record(const std::string& path) {
    std::lock_guard lock(mutex_);
    requests_.push_back({path, std::chrono::steady_clock::now()});
}

void FixtureSite::install_routes() {
    auto& srv = *server_;

    srv.Get("/", [this](const httplib::Request& req, httplib::Response& res) {
        record(req.path);
        res.set_content("<!doctype html><html><body><a href=\"/replays?page=1\">Replays</a></body></html>", "text/html");
    });

    srv.Get("/replays", [this](const httplib::Request& req, httplib::Response& res) {
        record(req.path + "?" + req.get_param_value("page"));
        std::size_t page = 1;
        try {
            page = std::stoul(req.get_param_value("page"));
        } catch (const std::exception&) {
        }
        std::ostringstream html;
        html << "<!doctype html>\n<html><head><title>Replays, page " << page << "</title></head><body>\n"
             << "<nav><a href=\"/\">Home</a> <a href='/replays?page=" << page + 1 << "'>next</a></nav>\n";
        if (manifest_.replays > 0)
            html << "<aside>Featured: <a class=\"featured\" href=\"" << replay_path(0) << "\">replay of the week</a></aside>\n";
        html << "<ul>\n";
        const std::size_t lo = page ? (page - 1) * manifest_.links_per_page : manifest_.replays;
        for (std::size_t i = lo; i < std::min(manifest_.replays, lo + manifest_.links_per_page); ++i)
            html << "  <li><a href=\"" << replay_path(i) << "\">Battle #" << i << "</a> <a href=\"/battle/" << i
                 << "\">details</a></li>\n";
        html << "</ul></body></html>\n";
        res.set_content(html.str(), "text/html");
    });

    srv.Get(R"(/download/(\d+)\.wotreplay)", [this](const httplib::Request& req, httplib::Response& res) {
        record(req.path);
        const std::size_t index = std::stoul(req.matches[1]);
        if (index >= manifest_.replays || manifest_.missing.count(index)) {
            res.status = 404;
            res.set_content("not found", "text/plain");
            return;
        }
        {
            std::lock_guard lock(mutex_);
            ++downloads_[index];
        }
        codec::Bytes bytes;
        if (manifest_.corrupt.count(index)) {
            bytes.assign(64, static_cast<std::uint8_t>(index));
        } else {
            bytes = codec::encode_fixture(fixture_replay(manifest_, index), key_);
        }
        res.set_content(std::string(bytes.begin(), bytes.end()), "application/octet-stream");
    });

    auto stats = [this](const httplib::Request& req, httplib::Response& res) {
        record(req.path);
        {
            std::lock_guard lock(mutex_);
            ++stats_requests_;
            if (rate_limited_left_ > 0) {
                --rate_limited_left_;
                res.status = 429;
                res.set_header("Retry-After", std::to_string(retry_after_s_));
                return;
            }
        }
        json out;
        if (req.get_param_value("application_id") != manifest_.app_id) {
            out = {{"status", "error"},
                   {"error", {{"field", "application_id"}, {"message", "INVALID_APPLICATION_ID"}, {"code", 407}, {"value", req.get_param_value("application_id")}}}};
            res.set_content(out.dump(), "application/json");
            return;
        }
        std::vector<std::uint64_t> ids;
        std::stringstream list(req.get_param_value("account_id"));
        for (std::string item; std::getline(list, item, ',');) {
            try {
                ids.push_back(std::stoull(item));
            } catch (const std::exception&) {
                out = {{"status", "error"}, {"error", {{"field", "account_id"}, {"message", "INVALID_ACCOUNT_ID"}, {"code", 407}}}};
                res.set_content(out.dump(), "application/json");
                return;
            }
        }
        if (ids.empty() || ids.size() > kMaxIdsPerRequest) {
            out = {{"status", "error"}, {"error", {{"field", "account_id"}, {"message", "ACCOUNT_ID_LIST_LIMIT_EXCEEDED"}, {"code", 407}}}};
            res.set_content(out.dump(), "application/json");
            return;
        }
        out["status"] = "ok";
        out["meta"] = {{"count", ids.size()}};
        out["data"] = json::object();
        for (auto id : ids) {
            const bool known = id >= fixture_account(0) && id < fixture_account(manifest_.account_pool) &&
                               !manifest_.unknown_accounts.count(id);
            if (!known) {
                out["data"][std::to_string(id)] = nullptr;
                continue;
            }
            const auto s = fixture_stats(id);
            const auto wins = static_cast<std::uint64_t>(s.win_rate * static_cast<double>(s.battles) + 0.5);
            out["data"][std::to_string(id)] = {
                {"statistics", {{"all", {{"battles", s.battles}, {"wins", wins}, {"xp", s.experience_total}}}}}};
        }
        res.set_content(out.dump(), "application/json");
    };
    srv.Get("/account/info", stats);
    srv.Get("/account/info/", stats);
}

int FixtureSite::start(const std::string& host, int port) {
    host_ = host;
    port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (port_ < 0) throw std::runtime_error("fixture site: cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

bool FixtureSite::serve(const std::string& host, int port) {
    host_ = host;
    port_ = port;
    return server_->listen(host, port);
}

void FixtureSite::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

std::string FixtureSite::base_url() const { return "http://" + host_ + ":" + std::to_string(port_); }

std::vector<FixtureSite::Request> FixtureSite::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

std::size_t FixtureSite::downloads(std::size_t index) const {
    std::lock_guard lock(mutex_);
    return index < downloads_.size() ? downloads_[index] : 0;
}

std::size_t FixtureSite::stats_requests() const {
    std::lock_guard lock(mutex_);
    return stats_requests_;
}

void FixtureSite::rate_limit_next(std::size_t n, int retry_after_s) {
    std::lock_guard lock(mutex_);
    rate_limited_left_ = n;
    retry_after_s_ = retry_after_s;
}

}  // namespace wotchat::harvest
