#include "wotchat/store/store.hpp"

#include <random>

#include "sqlite.hpp"
#include "wotchat/text.hpp"

namespace wotchat::store {

namespace {

// Forward-only; index i upgrades user_version i to i + 1.
const std::vector<std::string>& migrations() {
    static const std::vector<std::string> steps = [] {
        std::string label_defs;
        for (auto prefix : {"auto_", "man_"})
            for (auto a : kAllAttributes) label_defs += ", " + std::string(prefix) + std::string(attribute_name(a)) + " INTEGER";

        std::vector<std::string> s;
        s.push_back(R"(
CREATE TABLE players (
  player_guid TEXT PRIMARY KEY,
  account_id INTEGER NOT NULL UNIQUE,
  display_name TEXT NOT NULL,
  realm TEXT NOT NULL
);
CREATE TABLE replays (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  match_id TEXT NOT NULL UNIQUE,
  source_url TEXT NOT NULL,
  realm TEXT NOT NULL,
  meta_block_count INTEGER NOT NULL,
  packet_count INTEGER NOT NULL,
  ingested_at TEXT NOT NULL
);
CREATE TABLE roster (
  match_id TEXT NOT NULL REFERENCES replays(match_id),
  player_guid TEXT NOT NULL REFERENCES players(player_guid),
  vehicle TEXT NOT NULL,
  team INTEGER NOT NULL,
  PRIMARY KEY (match_id, player_guid)
);
CREATE TABLE messages (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  message_id TEXT NOT NULL UNIQUE,
  match_id TEXT NOT NULL REFERENCES replays(match_id),
  player_guid TEXT NOT NULL REFERENCES players(player_guid),
  clock REAL NOT NULL,
  text TEXT NOT NULL,
  unresolved INTEGER NOT NULL)" + label_defs + R"(,
  base_score INTEGER,
  repetition_bonus INTEGER,
  cs INTEGER,
  pcs INTEGER,
  version INTEGER NOT NULL DEFAULT 0
);
CREATE INDEX messages_by_match ON messages(match_id, clock, seq);
CREATE TABLE deaths (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  match_id TEXT NOT NULL REFERENCES replays(match_id),
  victim_guid TEXT NOT NULL REFERENCES players(player_guid),
  killer_guid TEXT REFERENCES players(player_guid),
  clock REAL NOT NULL
);
CREATE TABLE snapshots (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  match_id TEXT NOT NULL REFERENCES replays(match_id),
  player_guid TEXT NOT NULL REFERENCES players(player_guid),
  battles INTEGER NOT NULL,
  experience_total INTEGER NOT NULL,
  win_rate REAL NOT NULL,
  captured_at TEXT NOT NULL
);
CREATE INDEX snapshots_by_match ON snapshots(match_id, player_guid);
CREATE TABLE links (
  url TEXT PRIMARY KEY,
  listing_page INTEGER NOT NULL,
  discovered_at TEXT NOT NULL,
  status TEXT NOT NULL,
  attempts INTEGER NOT NULL DEFAULT 0
);
)");
        s.push_back(R"(
CREATE TABLE label_history (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  message_id TEXT NOT NULL REFERENCES messages(message_id),
  annotator_id TEXT NOT NULL,
  labels TEXT NOT NULL,
  saved_at TEXT NOT NULL
);
CREATE TABLE sentiment_cache (
  backend TEXT NOT NULL,
  text_hash TEXT NOT NULL,
  result TEXT NOT NULL,
  PRIMARY KEY (backend, text_hash)
);
)");
        return s;
    }();
    return steps;
}

std::string new_guid() {
    static std::mutex m;
    std::lock_guard lock(m);
    static std::mt19937_64 rng{[] {
        std::random_device rd;
        std::seed_seq seq{rd(), rd(), rd(), rd()};
        return std::mt19937_64(seq);
    }()};
    std::array<std::uint8_t, 16> bytes;
    for (std::size_t i = 0; i < bytes.size(); i += 8) {
        auto v = rng();
        for (int k = 0; k < 8; ++k) bytes[i + k] = static_cast<std::uint8_t>(v >> (8 * k));
    }
    return encode_hex(bytes);
}

std::string labels_json(const LabelSet& l) {
    std::string out = "{";
    for (auto a : kAllAttributes) {
        if (out.size() > 1) out += ",";
        out += "\"" + std::string(attribute_name(a)) + "\":";
        out += l[a] ? (*l[a] ? "true" : "false") : "null";
    }
    return out + "}";
}

constexpr std::string_view kMessageColumns =
    "m.message_id, m.match_id, m.player_guid, m.clock, m.seq, m.text, m.unresolved, m.base_score, "
    "m.repetition_bonus, m.cs, m.pcs, m.version";
constexpr int kFirstLabelColumn = 12;

}  // namespace

std::string label_columns(std::string_view prefix) {
    std::string out;
    for (auto a : kAllAttributes) {
        if (!out.empty()) out += ", ";
        out += std::string(prefix) + std::string(attribute_name(a));
    }
    return out;
}

std::string_view to_string(Realm r) { return r == Realm::NA ? "NA" : "EU"; }

Realm realm_from_string(std::string_view s) { return s == "NA" ? Realm::NA : Realm::EU; }

Store::Store(const std::string& path) {
    try {
        db_ = std::make_unique<sql::Database>(path);
        db_->exec("PRAGMA foreign_keys = ON;");
        db_->exec("PRAGMA journal_mode = WAL;");
        migrate();
    } catch (const sql::Error& e) {
        throw StoreError(e.what());
    }
}

Store::~Store() = default;

void Store::migrate() {
    const auto& steps = migrations();
    int version = schema_version();
    if (version > static_cast<int>(steps.size()))
        throw StoreError("database schema version " + std::to_string(version) + " is newer than this build");
    for (; version < static_cast<int>(steps.size()); ++version) {
        db_->exec("BEGIN;");
        try {
            db_->exec(steps[static_cast<std::size_t>(version)]);
            db_->exec("PRAGMA user_version = " + std::to_string(version + 1) + ";");
            db_->exec("COMMIT;");
        } catch (...) {
            db_->exec("ROLLBACK;");
            throw;
        }
    }
}

int Store::schema_version() const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare("PRAGMA user_version;");
    st.step();
    return static_cast<int>(st.int64(0));
}

void Store::transaction(const std::function<void()>& fn) {
    std::lock_guard lock(mutex_);
    if (tx_depth_ > 0) {
        fn();
        return;
    }
    db_->exec("BEGIN IMMEDIATE;");
    ++tx_depth_;
    try {
        fn();
        --tx_depth_;
        db_->exec("COMMIT;");
    } catch (...) {
        --tx_depth_;
        db_->exec("ROLLBACK;");
        throw;
    }
}

std::string Store::upsert_player(std::uint64_t account_id, std::string_view display_name, Realm realm) {
    if (account_id == 0) throw std::invalid_argument("account id must be positive");
    std::lock_guard lock(mutex_);
    if (auto existing = find_player_by_account(account_id)) {
        if (!display_name.empty() && existing->display_name != display_name)
            db_->prepare("UPDATE players SET display_name = ? WHERE player_guid = ?")
                .bind(1, display_name)
                .bind(2, existing->player_guid)
                .run();
        return existing->player_guid;
    }
    auto guid = new_guid();
    db_->prepare("INSERT INTO players(player_guid, account_id, display_name, realm) VALUES (?, ?, ?, ?)")
        .bind(1, guid)
        .bind(2, static_cast<std::int64_t>(account_id))
        .bind(3, display_name)
        .bind(4, to_string(realm))
        .run();
    return guid;
}

namespace {
PlayerRecord read_player(const sql::Statement& st) {
    return PlayerRecord{st.text(0), static_cast<std::uint64_t>(st.int64(1)), st.text(2), realm_from_string(st.text(3))};
}
}  // namespace

std::optional<PlayerRecord> Store::find_player(std::string_view guid) const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare("SELECT player_guid, account_id, display_name, realm FROM players WHERE player_guid = ?");
    st.bind(1, guid);
    if (!st.step()) return std::nullopt;
    return read_player(st);
}

std::optional<PlayerRecord> Store::find_player_by_account(std::uint64_t account_id) const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare("SELECT player_guid, account_id, display_name, realm FROM players WHERE account_id = ?");
    st.bind(1, static_cast<std::int64_t>(account_id));
    if (!st.step()) return std::nullopt;
    return read_player(st);
}

std::vector<PlayerRecord> Store::players() const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare("SELECT player_guid, account_id, display_name, realm FROM players ORDER BY account_id");
    std::vector<PlayerRecord> out;
    while (st.step()) out.push_back(read_player(st));
    return out;
}

IngestResult Store::ingest_replay(const codec::ReplayDocument& doc, std::span<const codec::ChatMessage> chat,
                                  std::span<const codec::DeathEvent> deaths, std::string_view source_url) {
    IngestResult result;
    result.match_id = doc.source_id;
    transaction([&] {
        if (has_replay(doc.source_id)) return;
        const Realm realm = realm_from_string(doc.realm);
        db_->prepare(
               "INSERT INTO replays(match_id, source_url, realm, meta_block_count, packet_count, ingested_at) "
               "VALUES (?, ?, ?, ?, ?, ?)")
            .bind(1, doc.source_id)
            .bind(2, source_url)
            .bind(3, to_string(realm))
            .bind(4, static_cast<std::int64_t>(doc.meta_blocks.size()))
            .bind(5, static_cast<std::int64_t>(doc.packets.size()))
            .bind(6, utc_now_iso8601())
            .run();

        auto roster = db_->prepare("INSERT OR IGNORE INTO roster(match_id, player_guid, vehicle, team) VALUES (?, ?, ?, ?)");
        for (const auto& p : doc.players) {
            if (p.account_id == 0) continue;
            roster.reset();
            roster.bind(1, doc.source_id)
                .bind(2, upsert_player(p.account_id, p.display_name, realm))
                .bind(3, p.vehicle)
                .bind(4, std::int64_t{p.team})
                .run();
        }

        auto msg = db_->prepare("INSERT INTO messages(message_id, match_id, player_guid, clock, text, unresolved) "
                                "VALUES (?, ?, ?, ?, ?, ?)");
        for (const auto& m : chat) {
            if (m.author_account_id == 0) continue;
            msg.reset();
            msg.bind(1, m.message_id)
                .bind(2, doc.source_id)
                .bind(3, upsert_player(m.author_account_id, {}, realm))
                .bind(4, static_cast<double>(m.clock))
                .bind(5, m.text)
                .bind(6, std::int64_t{m.unresolved ? 1 : 0})
                .run();
            ++result.messages;
        }

        auto death = db_->prepare("INSERT INTO deaths(match_id, victim_guid, killer_guid, clock) VALUES (?, ?, ?, ?)");
        for (const auto& d : deaths) {
            death.reset();
            death.bind(1, doc.source_id).bind(2, upsert_player(d.victim_account_id, {}, realm));
            if (d.killer_account_id)
                death.bind(3, upsert_player(d.killer_account_id, {}, realm));
            else
                death.bind_null(3);
            death.bind(4, static_cast<double>(d.clock)).run();
            ++result.deaths;
        }
        result.inserted = true;
    });
    return result;
}

bool Store::has_replay(std::string_view match_id) const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare("SELECT 1 FROM replays WHERE match_id = ?");
    st.bind(1, match_id);
    return st.step();
}

std::size_t Store::replay_count() const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare("SELECT COUNT(*) FROM replays");
    st.step();
    return static_cast<std::size_t>(st.int64(0));
}

std::vector<std::string> Store::match_ids() const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare("SELECT match_id FROM replays ORDER BY seq");
    std::vector<std::string> out;
    while (st.step()) out.push_back(st.text(0));
    return out;
}

std::vector<RosterEntry> Store::roster(std::string_view match_id) const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare("SELECT player_guid, vehicle, team FROM roster WHERE match_id = ? ORDER BY rowid");
    st.bind(1, match_id);
    std::vector<RosterEntry> out;
    while (st.step()) out.push_back({st.text(0), st.text(1), static_cast<int>(st.int64(2))});
    return out;
}

std::vector<std::uint64_t> Store::roster_accounts(std::string_view match_id) const {
    std::lock_guard lock(mutex_);
    // Roster players plus anyone who chatted or died without being on it.
    auto st = db_->prepare(
        "SELECT DISTINCT p.account_id FROM players p WHERE p.player_guid IN ("
        " SELECT player_guid FROM roster WHERE match_id = ?1"
        " UNION SELECT player_guid FROM messages WHERE match_id = ?1"
        " UNION SELECT victim_guid FROM deaths WHERE match_id = ?1"
        " UNION SELECT killer_guid FROM deaths WHERE match_id = ?1 AND killer_guid IS NOT NULL)"
        " ORDER BY p.account_id");
    st.bind(1, match_id);
    std::vector<std::uint64_t> out;
    while (st.step()) out.push_back(static_cast<std::uint64_t>(st.int64(0)));
    return out;
}

void Store::record_link(std::string_view url, std::uint32_t listing_page) {
    std::lock_guard lock(mutex_);
    db_->prepare("INSERT OR IGNORE INTO links(url, listing_page, discovered_at, status) VALUES (?, ?, ?, 'pending')")
        .bind(1, url)
        .bind(2, std::int64_t{listing_page})
        .bind(3, utc_now_iso8601())
        .run();
}

void Store::mark_link(std::string_view url, LinkStatus status) {
    std::lock_guard lock(mutex_);
    record_link(url, 0);
    const char* s = status == LinkStatus::ingested ? "ingested" : status == LinkStatus::failed ? "failed" : "pending";
    db_->prepare("UPDATE links SET status = ?, attempts = attempts + ? WHERE url = ?")
        .bind(1, std::string_view(s))
        .bind(2, std::int64_t{status == LinkStatus::pending ? 0 : 1})
        .bind(3, url)
        .run();
}

std::unordered_set<std::string> Store::settled_links() const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare("SELECT url FROM links WHERE status = 'ingested' OR attempts >= ?");
    st.bind(1, std::int64_t{kMaxLinkAttempts});
    std::unordered_set<std::string> out;
    while (st.step()) out.insert(st.text(0));
    return out;
}

void Store::add_snapshot(std::string_view match_id, std::uint64_t account_id, std::uint64_t battles,
                         std::uint64_t experience_total, double win_rate, std::string_view captured_at) {
    std::lock_guard lock(mutex_);
    auto player = find_player_by_account(account_id);
    if (!player) throw NotFound("no player with account id " + std::to_string(account_id));
    db_->prepare(
           "INSERT INTO snapshots(match_id, player_guid, battles, experience_total, win_rate, captured_at) "
           "VALUES (?, ?, ?, ?, ?, ?)")
        .bind(1, match_id)
        .bind(2, player->player_guid)
        .bind(3, static_cast<std::int64_t>(battles))
        .bind(4, static_cast<std::int64_t>(experience_total))
        .bind(5, win_rate)
        .bind(6, captured_at)
        .run();
}

std::vector<SnapshotRecord> Store::snapshots() const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare(
        "SELECT match_id, player_guid, battles, experience_total, win_rate, captured_at FROM snapshots ORDER BY id");
    std::vector<SnapshotRecord> out;
    while (st.step())
        out.push_back({st.text(0), st.text(1), static_cast<std::uint64_t>(st.int64(2)),
                       static_cast<std::uint64_t>(st.int64(3)), st.real(4), st.text(5)});
    return out;
}

std::size_t Store::snapshot_count() const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare("SELECT COUNT(*) FROM snapshots");
    st.step();
    return static_cast<std::size_t>(st.int64(0));
}

MessageRecord Store::read_message_row(void* raw) const {
    const auto& st = *static_cast<const sql::Statement*>(raw);
    MessageRecord m;
    m.message_id = st.text(0);
    m.match_id = st.text(1);
    m.player_guid = st.text(2);
    m.clock = st.real(3);
    m.seq = st.int64(4);
    m.text = st.text(5);
    m.unresolved_author = st.int64(6) != 0;
    m.base_score = st.optional_int(7);
    m.repetition_bonus = st.optional_int(8);
    m.cs = st.optional_int(9);
    m.pcs = st.optional_int(10);
    m.version = st.int64(11);
    int col = kFirstLabelColumn;
    for (auto a : kAllAttributes) m.auto_labels[a] = st.tri(col++);
    for (auto a : kAllAttributes) m.manual_labels[a] = st.tri(col++);
    return m;
}

std::vector<MessageRecord> Store::query_messages(std::string_view where, std::string_view order,
                                                 std::optional<std::string_view> arg) const {
    std::lock_guard lock(mutex_);
    std::string q = "SELECT " + std::string(kMessageColumns) + ", " + label_columns("m.auto_") + ", " +
                    label_columns("m.man_") + " FROM messages m JOIN replays r ON r.match_id = m.match_id";
    if (!where.empty()) q += " WHERE " + std::string(where);
    q += " ORDER BY " + std::string(order);
    auto st = db_->prepare(q);
    if (arg) st.bind(1, *arg);
    std::vector<MessageRecord> out;
    while (st.step()) out.push_back(read_message_row(&st));
    return out;
}

std::vector<MessageRecord> Store::messages() const { return query_messages({}, "r.seq, m.clock, m.seq", std::nullopt); }

std::vector<MessageRecord> Store::messages_for_match(std::string_view match_id) const {
    return query_messages("m.match_id = ?", "m.clock, m.seq", match_id);
}

std::optional<MessageRecord> Store::message(std::string_view message_id) const {
    auto rows = query_messages("m.message_id = ?", "m.seq", message_id);
    if (rows.empty()) return std::nullopt;
    return rows.front();
}

std::size_t Store::message_count() const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare("SELECT COUNT(*) FROM messages");
    st.step();
    return static_cast<std::size_t>(st.int64(0));
}

std::vector<MatchSummary> Store::match_summaries() const {
    std::lock_guard lock(mutex_);
    std::string all_resolved;
    for (auto a : kAllAttributes) {
        if (!all_resolved.empty()) all_resolved += " AND ";
        all_resolved += "m.man_" + std::string(attribute_name(a)) + " IS NOT NULL";
    }
    auto st = db_->prepare("SELECT r.match_id, r.seq, COUNT(m.seq), COALESCE(SUM(CASE WHEN " + all_resolved +
                           " THEN 1 ELSE 0 END), 0) FROM replays r LEFT JOIN messages m ON m.match_id = r.match_id "
                           "GROUP BY r.seq ORDER BY r.seq");
    std::vector<MatchSummary> out;
    while (st.step())
        out.push_back({st.text(0), st.int64(1), static_cast<std::size_t>(st.int64(2)),
                       static_cast<std::size_t>(st.int64(3))});
    return out;
}

std::vector<DeathRecord> Store::deaths() const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare(
        "SELECT d.match_id, d.victim_guid, d.killer_guid, d.clock FROM deaths d "
        "JOIN replays r ON r.match_id = d.match_id ORDER BY r.seq, d.clock, d.id");
    std::vector<DeathRecord> out;
    while (st.step()) {
        DeathRecord d{st.text(0), st.text(1), std::nullopt, st.real(3)};
        if (!st.is_null(2)) d.killer_guid = st.text(2);
        out.push_back(std::move(d));
    }
    return out;
}

void Store::set_auto_labels(std::span<const std::pair<std::string, LabelSet>> labels) {
    std::string q = "UPDATE messages SET ";
    int i = 1;
    for (auto a : kAllAttributes) {
        if (i > 1) q += ", ";
        q += "auto_" + std::string(attribute_name(a)) + " = ?" + std::to_string(i++);
    }
    q += " WHERE message_id = ?" + std::to_string(i);
    transaction([&] {
        auto st = db_->prepare(q);
        for (const auto& [id, l] : labels) {
            st.reset();
            int col = 1;
            for (auto a : kAllAttributes) st.bind(col++, l[a]);
            st.bind(col, id).run();
            if (db_->changes() == 0) throw NotFound("no message " + id);
        }
    });
}

MessageRecord Store::set_manual_labels(std::string_view message_id, const LabelSet& labels,
                                       std::string_view annotator_id, std::optional<std::int64_t> expected_version) {
    if (!labels.exclusion_ok()) throw std::invalid_argument("is_positive and is_negative are both true");
    MessageRecord updated;
    transaction([&] {
        auto current = message(message_id);
        if (!current) throw NotFound("no message " + std::string(message_id));
        if (current->manual_labels == labels) {
            updated = *current;
            return;
        }
        if (expected_version && *expected_version != current->version) throw VersionConflict(current->version);

        std::string q = "UPDATE messages SET version = version + 1";
        int col = 1;
        for (auto a : kAllAttributes) q += ", man_" + std::string(attribute_name(a)) + " = ?" + std::to_string(col++);
        q += " WHERE message_id = ?" + std::to_string(col);
        auto st = db_->prepare(q);
        col = 1;
        for (auto a : kAllAttributes) st.bind(col++, labels[a]);
        st.bind(col, message_id).run();

        db_->prepare("INSERT INTO label_history(message_id, annotator_id, labels, saved_at) VALUES (?, ?, ?, ?)")
            .bind(1, message_id)
            .bind(2, annotator_id)
            .bind(3, labels_json(labels))
            .bind(4, utc_now_iso8601())
            .run();
        updated = *message(message_id);
    });
    return updated;
}

std::size_t Store::label_history_count(std::string_view message_id) const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare("SELECT COUNT(*) FROM label_history WHERE message_id = ?");
    st.bind(1, message_id);
    st.step();
    return static_cast<std::size_t>(st.int64(0));
}

void Store::set_scores(std::span<const ScoreUpdate> scores) {
    transaction([&] {
        auto st = db_->prepare(
            "UPDATE messages SET base_score = ?, repetition_bonus = ?, cs = ?, pcs = ? WHERE message_id = ?");
        for (const auto& s : scores) {
            st.reset();
            st.bind(1, s.base_score).bind(2, s.repetition_bonus).bind(3, s.cs).bind(4, s.pcs).bind(5, s.message_id).run();
            if (db_->changes() == 0) throw NotFound("no message " + s.message_id);
        }
    });
}

std::optional<std::string> Store::cached_sentiment(std::string_view backend, std::string_view text_hash) const {
    std::lock_guard lock(mutex_);
    auto st = db_->prepare("SELECT result FROM sentiment_cache WHERE backend = ? AND text_hash = ?");
    st.bind(1, backend).bind(2, text_hash);
    if (!st.step()) return std::nullopt;
    return st.text(0);
}

void Store::cache_sentiment(std::string_view backend, std::string_view text_hash, std::string_view result_json) {
    std::lock_guard lock(mutex_);
    db_->prepare("INSERT OR REPLACE INTO sentiment_cache(backend, text_hash, result) VALUES (?, ?, ?)")
        .bind(1, backend)
        .bind(2, text_hash)
        .bind(3, result_json)
        .run();
}

IngestResult ingest_replay_bytes(Store& store, std::span<const std::uint8_t> bytes, const codec::ReplayKey& key,
                                 const codec::PacketSchema& schema, std::string_view source_url) {
    auto doc = codec::decode_replay(bytes, key, schema);
    if (store.has_replay(doc.source_id)) return IngestResult{doc.source_id, false, 0, 0};
    auto chat = codec::extract_chat(doc, schema);
    auto deaths = codec::extract_deaths(doc, schema);
    return store.ingest_replay(doc, chat, deaths, source_url);
}

}  // namespace wotchat::store
