#include <atomic>
#include <iostream>
#include <thread>

#include "wotchat/harvest/harvest.hpp"
#include "wotchat/store/store.hpp"

namespace wotchat::harvest {

namespace {

struct Shared {
    std::mutex mutex;
    BatchReport report;
    std::size_t finished = 0;
    std::atomic<bool> stop{false};
    std::exception_ptr fatal;
};

void note_failure(Shared& sh, const BatchPolicy& policy, std::string message) {
    std::lock_guard lock(sh.mutex);
    ++sh.report.failed;
    ++sh.finished;
    std::clog << "harvest: " << message << '\n';
    sh.report.errors.push_back(std::move(message));
    if (sh.finished >= policy.failure_sample && sh.report.failed * 2 > sh.finished) {
        sh.report.aborted = true;
        sh.stop = true;
    }
}

void take_snapshots(store::Store& st, PoliteClient& client, const BatchSource& source, const std::string& match_id,
                    Shared& sh) {
    if (source.api_base.empty()) return;
    auto accounts = st.roster_accounts(match_id);
    if (accounts.empty()) return;
    try {
        auto stats = fetch_player_stats(client, accounts, source.api_base, source.app_id);
        for (const auto& s : stats.snapshots)
            st.add_snapshot(match_id, s.account_id, s.battles, s.experience_total, s.win_rate, s.captured_at);
        std::lock_guard lock(sh.mutex);
        sh.report.snapshots += stats.snapshots.size();
        sh.report.snapshot_misses += stats.missing.size();
    } catch (const store::StoreError&) {
        throw;
    } catch (const std::exception& e) {
        std::lock_guard lock(sh.mutex);
        sh.report.snapshot_errors += accounts.size();
        sh.report.errors.push_back(std::string("snapshots for ") + match_id + ": " + e.what());
    }
}

void process(store::Store& st, PoliteClient& client, const BatchSource& source, const BatchPolicy& policy,
             const ReplayLink& link, Shared& sh) {
    HttpResponse res;
    try {
        res = client.get(link.url);
    } catch (const FetchError& e) {
        st.mark_link(link.url, store::LinkStatus::failed);
        note_failure(sh, policy, e.what());
        return;
    }
    if (res.status != 200) {
        st.mark_link(link.url, store::LinkStatus::failed);
        note_failure(sh, policy, link.url + ": HTTP " + std::to_string(res.status));
        return;
    }
    {
        std::lock_guard lock(sh.mutex);
        ++sh.report.downloaded;
    }

    const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(res.body.data()), res.body.size());
    store::IngestResult ingested;
    try {
        ingested = store::ingest_replay_bytes(st, bytes, source.key, source.schema, link.url);
    } catch (const codec::DecodeError& e) {
        st.mark_link(link.url, store::LinkStatus::failed);
        note_failure(sh, policy, link.url + ": " + e.what());
        return;
    }
    st.mark_link(link.url, store::LinkStatus::ingested);
    {
        std::lock_guard lock(sh.mutex);
        ++sh.report.decoded;
        ++sh.finished;
        if (!ingested.inserted) ++sh.report.skipped;
    }
    if (ingested.inserted) take_snapshots(st, client, source, ingested.match_id, sh);
}

}  // namespace

BatchReport run_batch(store::Store& st, const BatchSource& source, const BatchPolicy& policy) {
    if (policy.max_files_per_run < 1) throw std::invalid_argument("max_files_per_run must be at least 1");
    PoliteClient client(policy.request_delay);
    Shared sh;

    auto crawl = crawl_listing(client, source.base_url, source.first_page, source.last_page, &st, source.crawl);
    sh.report.links_seen = crawl.links.size();
    for (auto& e : crawl.errors) sh.report.errors.push_back(std::move(e));

    const std::size_t todo = std::min(crawl.links.size(), policy.max_files_per_run);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            if (sh.stop) return;
            const std::size_t i = next++;
            if (i >= todo) return;
            try {
                process(st, client, source, policy, crawl.links[i], sh);
            } catch (...) {
                std::lock_guard lock(sh.mutex);
                if (!sh.fatal) sh.fatal = std::current_exception();
                sh.stop = true;
                return;
            }
        }
    };

    const std::size_t n = std::max<std::size_t>(1, std::min(policy.max_parallel_downloads, todo));
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < n; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    if (sh.fatal) std::rethrow_exception(sh.fatal);
    return std::move(sh.report);
}

}  // namespace wotchat::harvest
