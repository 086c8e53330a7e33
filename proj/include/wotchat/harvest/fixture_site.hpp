#pragma once

// A local stand-in for the replay listing site and the public stats API.
// Everything it serves is derived from a small manifest, so tests can
// recompute the expected content.

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "wotchat/codec/fixture.hpp"
#include "wotchat/harvest/harvest.hpp"

namespace httplib {
class Server;
}

namespace wotchat::harvest {

struct FixtureManifest {
    std::size_t replays = 60;
    std::size_t links_per_page = 20;
    std::uint64_t seed = 1;
    std::size_t players_per_match = 6;
    std::size_t account_pool = 200;
    std::set<std::size_t> missing;              // replay indices answered with 404
    std::set<std::size_t> corrupt;              // replay indices served as garbage bytes
    std::set<std::uint64_t> unknown_accounts;   // stats API answers null for these
    std::string app_id = "fixture-app";
};

// JSON object with the same keys; absent keys keep their defaults.
FixtureManifest parse_manifest(std::string_view json_text);
FixtureManifest load_manifest(const std::filesystem::path& path);

std::size_t listing_pages(const FixtureManifest& m);
std::string replay_path(std::size_t index);  // "/download/<index>.wotreplay"
std::uint64_t fixture_account(std::size_t pool_index);
codec::FixtureSpec fixture_replay(const FixtureManifest& m, std::size_t index);
// What the stats API reports for a known account; captured_at left empty.
PlayerSnapshot fixture_stats(std::uint64_t account_id);

class FixtureSite {
public:
    struct Request {
        std::string path;
        std::chrono::steady_clock::time_point at;
    };

    explicit FixtureSite(FixtureManifest manifest, codec::ReplayKey key = codec::default_test_key());
    ~FixtureSite();
    FixtureSite(const FixtureSite&) = delete;
    FixtureSite& operator=(const FixtureSite&) = delete;

    // Binds (port 0 picks a free one) and serves on a background thread.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    // Binds and serves on the calling thread until stop().
    bool serve(const std::string& host, int port);
    void stop();

    std::string base_url() const;
    const FixtureManifest& manifest() const { return manifest_; }

    std::vector<Request> requests() const;
    std::size_t downloads(std::size_t index) const;
    std::size_t stats_requests() const;
    // The next n stats requests answer 429 with this Retry-After.
    void rate_limit_next(std::size_t n, int retry_after_s);

private:
    void install_routes();
    void record(const std::string& path);

    FixtureManifest manifest_;
    codec::ReplayKey key_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    std::string host_ = "127.0.0.1";
    int port_ = 0;

    mutable std::mutex mutex_;
    std::vector<Request> requests_;
    std::vector<std::size_t> downloads_;
    std::size_t stats_requests_ = 0;
    std::size_t rate_limited_left_ = 0;
    int retry_after_s_ = 1;
};

}  // namespace wotchat::harvest
