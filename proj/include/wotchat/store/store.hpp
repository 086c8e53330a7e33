#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "wotchat/codec/replay.hpp"
#include "wotchat/labels.hpp"

namespace wotchat::store {

namespace sql {
class Database;
}

enum class Realm { NA, EU };

std::string_view to_string(Realm r);
Realm realm_from_string(std::string_view s);  // "NA" -> NA, anything else -> EU

struct PlayerRecord {
    std::string player_guid;  // 32 lowercase hex digits
    std::uint64_t account_id = 0;
    std::string display_name;
    Realm realm = Realm::EU;
};

struct RosterEntry {
    std::string player_guid;
    std::string vehicle;
    int team = 1;
};

struct MessageRecord {
    std::string message_id;
    std::string match_id;
    std::string player_guid;
    double clock = 0.0;
    std::int64_t seq = 0;  // global ingestion sequence
    std::string text;
    LabelSet auto_labels;
    LabelSet manual_labels;
    std::optional<std::int64_t> base_score;
    std::optional<std::int64_t> repetition_bonus;
    std::optional<std::int64_t> cs;
    std::optional<std::int64_t> pcs;
    std::int64_t version = 0;
    bool unresolved_author = false;
};

struct DeathRecord {
    std::string match_id;
    std::string victim_guid;
    std::optional<std::string> killer_guid;  // absent = environment
    double clock = 0.0;
};

struct SnapshotRecord {
    std::string match_id;
    std::string player_guid;
    std::uint64_t battles = 0;
    std::uint64_t experience_total = 0;
    double win_rate = 0.0;
    std::string captured_at;
};

struct MatchSummary {
    std::string match_id;
    std::int64_t ingest_seq = 0;
    std::size_t message_count = 0;
    std::size_t classified_count = 0;  // messages with all eight manual labels resolved
    bool classified() const { return classified_count == message_count; }
};

struct IngestResult {
    std::string match_id;
    bool inserted = false;  // false when the same bytes were ingested before
    std::size_t messages = 0;
    std::size_t deaths = 0;
};

struct ScoreUpdate {
    std::string message_id;
    std::int64_t base_score = 0;
    std::int64_t repetition_bonus = 0;
    std::int64_t cs = 0;
    std::int64_t pcs = 0;
};

enum class LinkStatus { pending, ingested, failed };

enum class ExportFormat { csv, jsonl };

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotFound : public StoreError {
public:
    using StoreError::StoreError;
};

class VersionConflict : public StoreError {
public:
    VersionConflict(std::int64_t current) : StoreError("version conflict"), current_(current) {}
    std::int64_t current_version() const { return current_; }

private:
    std::int64_t current_;
};

class ExportIO : public StoreError {
public:
    using StoreError::StoreError;
};

// Embedded single-file store. Every method is safe to call from several
// threads; writes are serialized by an internal lock.
class Store {
public:
    static constexpr int kSchemaVersion = 2;
    static constexpr int kMaxLinkAttempts = 3;

    // ":memory:" opens a private in-memory database.
    explicit Store(const std::string& path);
    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    int schema_version() const;

    // Runs `fn` inside one transaction; nested calls join the outer one.
    void transaction(const std::function<void()>& fn);

    // Players. The guid is created once per account id and never changes.
    std::string upsert_player(std::uint64_t account_id, std::string_view display_name, Realm realm);
    std::optional<PlayerRecord> find_player(std::string_view guid) const;
    std::optional<PlayerRecord> find_player_by_account(std::uint64_t account_id) const;
    std::vector<PlayerRecord> players() const;

    // Replays, keyed by the SHA-256 of their bytes (doc.source_id).
    IngestResult ingest_replay(const codec::ReplayDocument& doc, std::span<const codec::ChatMessage> chat,
                               std::span<const codec::DeathEvent> deaths, std::string_view source_url);
    bool has_replay(std::string_view match_id) const;
    std::size_t replay_count() const;
    std::vector<std::string> match_ids() const;  // ingestion order
    std::vector<RosterEntry> roster(std::string_view match_id) const;
    std::vector<std::uint64_t> roster_accounts(std::string_view match_id) const;

    // Crawl bookkeeping.
    void record_link(std::string_view url, std::uint32_t listing_page);
    void mark_link(std::string_view url, LinkStatus status);
    // Links that need no further download attempts.
    std::unordered_set<std::string> settled_links() const;

    void add_snapshot(std::string_view match_id, std::uint64_t account_id, std::uint64_t battles,
                      std::uint64_t experience_total, double win_rate, std::string_view captured_at);
    std::vector<SnapshotRecord> snapshots() const;
    std::size_t snapshot_count() const;

    // Messages.
    std::vector<MessageRecord> messages() const;  // ingestion order, then clock
    std::vector<MessageRecord> messages_for_match(std::string_view match_id) const;  // clock, then seq
    std::optional<MessageRecord> message(std::string_view message_id) const;
    std::size_t message_count() const;
    std::vector<MatchSummary> match_summaries() const;
    std::vector<DeathRecord> deaths() const;

    void set_auto_labels(std::span<const std::pair<std::string, LabelSet>> labels);

    // Writes manual labels. Identical labels leave the version and history
    // untouched. When `expected_version` is given and stale, throws
    // VersionConflict without writing.
    MessageRecord set_manual_labels(std::string_view message_id, const LabelSet& labels,
                                    std::string_view annotator_id, std::optional<std::int64_t> expected_version);
    std::size_t label_history_count(std::string_view message_id) const;

    void set_scores(std::span<const ScoreUpdate> scores);

    std::optional<std::string> cached_sentiment(std::string_view backend, std::string_view text_hash) const;
    void cache_sentiment(std::string_view backend, std::string_view text_hash, std::string_view result_json);

    // Rows contain guids, never account ids or names. Names and account ids
    // that occur inside chat text are masked.
    void anonymized_export(ExportFormat format, std::ostream& out) const;

private:
    MessageRecord read_message_row(void* stmt) const;
    std::vector<MessageRecord> query_messages(std::string_view where, std::string_view order,
                                              std::optional<std::string_view> arg) const;
    void migrate();

    std::unique_ptr<sql::Database> db_;
    mutable std::recursive_mutex mutex_;
    int tx_depth_ = 0;
};

// Decodes, extracts and ingests one replay file. Throws codec::DecodeError.
IngestResult ingest_replay_bytes(Store& store, std::span<const std::uint8_t> bytes, const codec::ReplayKey& key,
                                 const codec::PacketSchema& schema, std::string_view source_url);

// Column names for the eight labels with a prefix, e.g. "man_is_abusive".
std::string label_columns(std::string_view prefix);

}  // namespace wotchat::store
