#include <algorithm>
#include <set>
#include <thread>

#include "json.hpp"
#include "wotchat/harvest/harvest.hpp"
#include "wotchat/text.hpp"

namespace wotchat::harvest {

using nlohmann::json;

namespace {

std::chrono::seconds retry_after(const HttpResponse& res) {
    auto it = res.headers.find("retry-after");
    if (it == res.headers.end()) return std::chrono::seconds{1};
    try {
        return std::chrono::seconds{std::max(0L, std::stol(it->second))};
    } catch (const std::exception&) {
        return std::chrono::seconds{1};  // HTTP-date form; not worth parsing
    }
}

// One request. Fills `out` and returns normally, or throws.
void fetch_batch(PoliteClient& client, const std::string& url, const std::vector<std::uint64_t>& ids,
                 StatsResult& out) {
    auto res = client.get(url);
    if (res.status == 429) throw RateLimited("stats: HTTP 429", retry_after(res));
    if (res.status == 401 || res.status == 403) throw AuthError("stats: HTTP " + std::to_string(res.status));
    if (res.status != 200) throw FetchError("stats: HTTP " + std::to_string(res.status), res.status);

    auto j = json::parse(res.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("stats: response is not a JSON object");
    if (j.value("status", "") != "ok") {
        const json err = j.value("error", json::object());
        const std::string message = err.value("message", "unknown error");
        if (message.find("APPLICATION_ID") != std::string::npos) throw AuthError("stats: " + message);
        if (message == "REQUEST_LIMIT_EXCEEDED") throw RateLimited("stats: " + message, std::chrono::seconds{1});
        throw FetchError("stats: " + message, 200);
    }
    const json data = j.value("data", json::object());
    const std::string now = utc_now_iso8601();
    for (auto id : ids) {
        auto it = data.find(std::to_string(id));
        if (it == data.end() || it->is_null()) {
            out.missing.push_back(id);
            continue;
        }
        try {
            const auto& all = it->at("statistics").at("all");
            PlayerSnapshot s;
            s.account_id = id;
            s.battles = all.at("battles").get<std::uint64_t>();
            s.experience_total = all.at("xp").get<std::uint64_t>();
            const auto wins = all.value("wins", std::uint64_t{0});
            s.win_rate = s.battles ? std::clamp(static_cast<double>(wins) / static_cast<double>(s.battles), 0.0, 1.0) : 0.0;
            s.captured_at = now;
            out.snapshots.push_back(std::move(s));
        } catch (const json::exception& e) {
            throw ParseError("stats: account " + std::to_string(id) + ": " + e.what());
        }
    }
}

}  // namespace

StatsResult fetch_player_stats(PoliteClient& client, const std::vector<std::uint64_t>& account_ids,
                               const std::string& api_base, const std::string& app_id,
                               const StatsOptions& options) {
    if (account_ids.empty()) throw std::invalid_argument("fetch_player_stats: no account ids");
    std::vector<std::uint64_t> ids;
    std::set<std::uint64_t> seen;
    for (auto id : account_ids)
        if (seen.insert(id).second) ids.push_back(id);

    std::string base = api_base;
    while (!base.empty() && base.back() == '/') base.pop_back();

    StatsResult out;
    for (std::size_t at = 0; at < ids.size(); at += kMaxIdsPerRequest) {
        std::vector<std::uint64_t> batch(ids.begin() + static_cast<std::ptrdiff_t>(at),
                                         ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), at + kMaxIdsPerRequest)));
        std::string url = base + "/account/info/?application_id=" + app_id + "&account_id=";
        for (std::size_t i = 0; i < batch.size(); ++i) url += (i ? "," : "") + std::to_string(batch[i]);
        url += "&fields=statistics.all.battles,statistics.all.wins,statistics.all.xp";

        for (int attempt = 0;; ++attempt) {
            try {
                ++out.requests;
                fetch_batch(client, url, batch, out);
                break;
            } catch (const RateLimited& e) {
                if (attempt >= options.max_rate_limit_retries || e.retry_after() > options.max_retry_wait) throw;
                std::this_thread::sleep_for(e.retry_after());
            }
        }
    }
    return out;
}

}  // namespace wotchat::harvest
