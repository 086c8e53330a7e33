#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wotchat/codec/replay.hpp"

namespace wotchat::store {
class Store;
}

namespace wotchat::harvest {

class FetchError : public std::runtime_error {
public:
    FetchError(const std::string& what, int status = 0) : std::runtime_error(what), status_(status) {}
    int status() const noexcept { return status_; }  // 0 = no response

private:
    int status_;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RateLimited : public std::runtime_error {
public:
    RateLimited(const std::string& what, std::chrono::seconds retry_after)
        : std::runtime_error(what), retry_after_(retry_after) {}
    std::chrono::seconds retry_after() const noexcept { return retry_after_; }

private:
    std::chrono::seconds retry_after_;
};

class AuthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string target;  // path and query, at least "/"
};

// Throws std::invalid_argument for anything but http:// and https:// URLs.
Url parse_url(std::string_view url);

// Resolves an href found on `page_url`. Handles absolute URLs, host-relative
// paths and plain relative paths; drops fragments.
std::string resolve_href(std::string_view page_url, std::string_view href);

struct HttpResponse {
    int status = 0;
    std::string body;
    std::map<std::string, std::string> headers;  // lowercase names
};

// GET with a minimum gap between requests to the same host. Callers on
// several threads share the per-host schedule.
class PoliteClient {
public:
    explicit PoliteClient(std::chrono::milliseconds request_delay = std::chrono::milliseconds{1000},
                          std::chrono::seconds timeout = std::chrono::seconds{20});

    // Throws FetchError(status 0) when no response arrives. Any HTTP status
    // is returned as-is.
    HttpResponse get(const std::string& url);

    std::chrono::milliseconds request_delay() const { return delay_; }
    std::size_t requests() const;

private:
    void wait_turn(const std::string& origin);

    std::chrono::milliseconds delay_;
    std::chrono::seconds timeout_;
    mutable std::mutex mutex_;
    std::map<std::string, std::chrono::steady_clock::time_point> next_slot_;
    std::size_t requests_ = 0;
};

struct ReplayLink {
    std::string url;
    std::uint32_t listing_page = 0;
    std::string discovered_at;
};

struct CrawlOptions {
    // "{page}" is replaced by the page number; relative to the base URL.
    std::string listing_path = "/replays?page={page}";
    // Matched (search) against each resolved anchor href.
    std::string link_pattern = R"(\.wotreplay(\?.*)?$)";
};

struct CrawlResult {
    std::vector<ReplayLink> links;     // discovery order, unique
    std::vector<std::string> errors;   // one line per page that failed to fetch
    std::size_t excluded = 0;          // links already settled in the store
};

// Pages first..last inclusive; first > last is an empty range. Failed page
// fetches are recorded and skipped. A fetched page that is not HTML throws
// ParseError. When a store is given, links it has settled are left out and
// the rest are recorded there.
CrawlResult crawl_listing(PoliteClient& client, const std::string& base_url, std::uint32_t first,
                          std::uint32_t last, store::Store* store = nullptr, const CrawlOptions& options = {});

// Anchor hrefs on one page, resolved and filtered by the pattern.
std::vector<std::string> extract_links(std::string_view html, std::string_view page_url, const std::regex& pattern);

struct PlayerSnapshot {
    std::uint64_t account_id = 0;
    std::uint64_t battles = 0;
    std::uint64_t experience_total = 0;
    double win_rate = 0.0;
    std::string captured_at;
};

struct StatsResult {
    std::vector<PlayerSnapshot> snapshots;  // request order
    std::vector<std::uint64_t> missing;     // ids the API did not resolve
    std::size_t requests = 0;
};

inline constexpr std::size_t kMaxIdsPerRequest = 100;

struct StatsOptions {
    int max_rate_limit_retries = 3;
    std::chrono::seconds max_retry_wait{30};
};

// GET {api_base}/account/info/?application_id=..&account_id=a,b,c in batches
// of at most 100 ids. Duplicate ids are asked for once. Throws AuthError for
// a rejected application id, RateLimited when retries run out, FetchError
// or ParseError for other failures.
StatsResult fetch_player_stats(PoliteClient& client, const std::vector<std::uint64_t>& account_ids,
                               const std::string& api_base, const std::string& app_id,
                               const StatsOptions& options = {});

struct BatchPolicy {
    std::size_t max_files_per_run = 1000;
    std::chrono::milliseconds request_delay{1000};
    std::size_t max_parallel_downloads = 2;
    // Abort once more than half of the finished downloads failed, judged
    // after at least this many.
    std::size_t failure_sample = 20;
};

struct BatchSource {
    std::string base_url;
    std::uint32_t first_page = 1;
    std::uint32_t last_page = 1;
    CrawlOptions crawl;
    std::string api_base;  // empty skips snapshots
    std::string app_id;
    codec::ReplayKey key = codec::default_test_key();
    codec::PacketSchema schema = codec::default_schema();
};

struct BatchReport {
    std::size_t links_seen = 0;   // new links found by the crawl
    std::size_t downloaded = 0;   // files fetched with HTTP 200
    std::size_t decoded = 0;      // files that decoded and were persisted or already known
    std::size_t failed = 0;       // download or decode failures
    std::size_t skipped = 0;      // decoded but already in the store (same bytes)
    std::size_t snapshots = 0;
    std::size_t snapshot_misses = 0;
    std::size_t snapshot_errors = 0;
    bool aborted = false;  // failure budget exceeded
    std::vector<std::string> errors;
};

// Crawl, then download and ingest up to max_files_per_run of the new links,
// taking a stats snapshot for every player of each newly stored replay.
// Store errors propagate; everything else lands in the report.
BatchReport run_batch(store::Store& store, const BatchSource& source, const BatchPolicy& policy);

}  // namespace wotchat::harvest
