#include <doctest.h>

#include <filesystem>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "support/generators.hpp"
#include "wotchat/codec/fixture.hpp"
#include "wotchat/store/store.hpp"

using namespace wotchat;
using namespace wotchat::store;
using codec::FixtureChat;
using codec::FixtureDeath;
using codec::FixtureSpec;

namespace {

FixtureSpec small_match() {
    FixtureSpec spec;
    spec.players = {{500000101, "EvilPlayer99", "T-34", 1}, {500000102, "Calm_Tanker", "IS-3", 2}};
    spec.events = {FixtureChat{500000101, 12.5f, "noob team, calm_tanker go home"},
                   FixtureChat{500000102, 30.0f, "gl hf"},
                   FixtureDeath{500000102, 500000101, 45.0f},
                   FixtureChat{500000101, 50.0f, "EVILPLAYER99 is my name, id 500000102"}};
    return spec;
}

IngestResult ingest(Store& s, const FixtureSpec& spec, std::string url = "fixture://match") {
    auto bytes = codec::encode_fixture(spec);
    return ingest_replay_bytes(s, bytes, codec::default_test_key(), codec::default_schema(), url);
}

std::string export_string(const Store& s, ExportFormat f) {
    std::ostringstream out;
    s.anonymized_export(f, out);
    return out.str();
}

}  // namespace

TEST_CASE("fresh store is at the current schema version") {
    Store s(":memory:");
    CHECK(s.schema_version() == Store::kSchemaVersion);
}

TEST_CASE("reopening a file store keeps data and version") {
    auto path = std::filesystem::temp_directory_path() / ("wotchat_store_" + std::to_string(std::random_device{}()) + ".db");
    std::string guid;
    {
        Store s(path.string());
        guid = s.upsert_player(77, "Someone", Realm::NA);
    }
    {
        Store s(path.string());
        CHECK(s.schema_version() == Store::kSchemaVersion);
        CHECK(s.upsert_player(77, "Someone", Realm::NA) == guid);
        CHECK(s.find_player(guid)->realm == Realm::NA);
    }
    std::filesystem::remove(path);
    std::filesystem::remove(path.string() + "-wal");
    std::filesystem::remove(path.string() + "-shm");
}

TEST_CASE("upsert_player is idempotent and yields 32 hex digit guids") {
    Store s(":memory:");
    auto a = s.upsert_player(1001, "Alpha", Realm::EU);
    auto b = s.upsert_player(1002, "Beta", Realm::EU);
    CHECK(a == s.upsert_player(1001, "Alpha", Realm::EU));
    CHECK(a == s.upsert_player(1001, "", Realm::EU));
    CHECK(a != b);
    const std::regex hex32("[0-9a-f]{32}");
    CHECK(std::regex_match(a, hex32));
    CHECK(std::regex_match(b, hex32));
    CHECK(s.find_player(a)->display_name == "Alpha");
    CHECK_THROWS_AS(s.upsert_player(0, "x", Realm::EU), std::invalid_argument);
}

TEST_CASE("guids stay unique across many players") {
    Store s(":memory:");
    std::set<std::string> seen;
    s.transaction([&] {
        for (std::uint64_t id = 1; id <= 2000; ++id) seen.insert(s.upsert_player(id, "p" + std::to_string(id), Realm::EU));
    });
    CHECK(seen.size() == 2000);
}

TEST_CASE("same replay bytes are ingested once") {
    Store s(":memory:");
    auto first = ingest(s, small_match());
    auto second = ingest(s, small_match());
    CHECK(first.inserted);
    CHECK_FALSE(second.inserted);
    CHECK(first.match_id == second.match_id);
    CHECK(s.replay_count() == 1);
    CHECK(s.message_count() == 3);
    CHECK(s.deaths().size() == 1);
}

TEST_CASE("every message refers to a stored player and replay") {
    Store s(":memory:");
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) ingest(s, testing::random_fixture_spec(rng), "fixture://" + std::to_string(i));
    auto ids = s.match_ids();
    std::set<std::string> matches(ids.begin(), ids.end());
    for (const auto& m : s.messages()) {
        CHECK(s.find_player(m.player_guid).has_value());
        CHECK(matches.count(m.match_id) == 1);
    }
    for (const auto& d : s.deaths()) {
        CHECK(s.find_player(d.victim_guid).has_value());
        CHECK(matches.count(d.match_id) == 1);
    }
}

TEST_CASE("messages come back in clock order with stable ids") {
    Store s(":memory:");
    auto r = ingest(s, small_match());
    auto msgs = s.messages_for_match(r.match_id);
    REQUIRE(msgs.size() == 3);
    CHECK(msgs[0].clock == doctest::Approx(12.5));
    CHECK(msgs[2].clock == doctest::Approx(50.0));
    CHECK(msgs[0].message_id.rfind(r.match_id + ":", 0) == 0);
    CHECK(s.message(msgs[1].message_id)->text == "gl hf");
    CHECK_FALSE(s.message("nope").has_value());
}

TEST_CASE("unknown labels read back as unknown, not false") {
    Store s(":memory:");
    auto r = ingest(s, small_match());
    auto id = s.messages_for_match(r.match_id).front().message_id;

    LabelSet l;
    l[Attribute::is_negative] = true;
    l[Attribute::is_positive] = false;
    auto saved = s.set_manual_labels(id, l, "ann-1", std::nullopt);
    CHECK(saved.manual_labels == l);
    CHECK_FALSE(saved.manual_labels[Attribute::is_racist].has_value());
    CHECK(saved.manual_labels[Attribute::is_positive] == false);

    std::vector<std::pair<std::string, LabelSet>> autos{{id, l}};
    s.set_auto_labels(autos);
    CHECK(s.message(id)->auto_labels == l);
}

TEST_CASE("manual label versions and conflicts") {
    Store s(":memory:");
    auto r = ingest(s, small_match());
    auto id = s.messages_for_match(r.match_id).front().message_id;

    LabelSet l;
    l[Attribute::noob_related] = true;
    auto v1 = s.set_manual_labels(id, l, "ann", 0);
    CHECK(v1.version == 1);
    CHECK(s.label_history_count(id) == 1);

    // identical write is a no-op
    auto again = s.set_manual_labels(id, l, "ann", std::nullopt);
    CHECK(again.version == 1);
    CHECK(s.label_history_count(id) == 1);

    l[Attribute::is_racist] = false;
    try {
        s.set_manual_labels(id, l, "other", 0);
        FAIL("expected a conflict");
    } catch (const VersionConflict& e) {
        CHECK(e.current_version() == 1);
    }
    CHECK(s.set_manual_labels(id, l, "other", 1).version == 2);

    LabelSet both;
    both[Attribute::is_positive] = true;
    both[Attribute::is_negative] = true;
    CHECK_THROWS_AS(s.set_manual_labels(id, both, "ann", std::nullopt), std::invalid_argument);
    CHECK_THROWS_AS(s.set_manual_labels("missing", l, "ann", std::nullopt), NotFound);
}

TEST_CASE("match summaries count fully classified messages") {
    Store s(":memory:");
    auto r = ingest(s, small_match());
    auto msgs = s.messages_for_match(r.match_id);
    LabelSet full;
    for (auto a : kAllAttributes) full[a] = false;
    s.set_manual_labels(msgs[0].message_id, full, "ann", std::nullopt);
    auto sums = s.match_summaries();
    REQUIRE(sums.size() == 1);
    CHECK(sums[0].message_count == 3);
    CHECK(sums[0].classified_count == 1);
    CHECK_FALSE(sums[0].classified());
}

TEST_CASE("scores are written back") {
    Store s(":memory:");
    auto r = ingest(s, small_match());
    auto id = s.messages_for_match(r.match_id).front().message_id;
    CHECK_FALSE(s.message(id)->cs.has_value());
    std::vector<ScoreUpdate> u{{id, 2, 1, 3, 4}};
    s.set_scores(u);
    auto m = *s.message(id);
    CHECK(m.cs == 3);
    CHECK(m.pcs == 4);
    CHECK(m.repetition_bonus == 1);
    std::vector<ScoreUpdate> bad{{"missing", 0, 0, 0, 0}};
    CHECK_THROWS_AS(s.set_scores(bad), NotFound);
}

TEST_CASE("failed transaction rolls back") {
    Store s(":memory:");
    CHECK_THROWS(s.transaction([&] {
        s.upsert_player(5, "Five", Realm::EU);
        throw std::runtime_error("boom");
    }));
    CHECK_FALSE(s.find_player_by_account(5).has_value());
}

TEST_CASE("link bookkeeping") {
    Store s(":memory:");
    s.record_link("http://a/1", 1);
    s.record_link("http://a/2", 1);
    s.mark_link("http://a/1", LinkStatus::ingested);
    for (int i = 0; i < Store::kMaxLinkAttempts - 1; ++i) s.mark_link("http://a/2", LinkStatus::failed);
    CHECK(s.settled_links() == std::unordered_set<std::string>{"http://a/1"});
    s.mark_link("http://a/2", LinkStatus::failed);
    CHECK(s.settled_links().size() == 2);
}

TEST_CASE("snapshots and roster") {
    Store s(":memory:");
    auto r = ingest(s, small_match());
    CHECK(s.roster(r.match_id).size() == 2);
    CHECK(s.roster_accounts(r.match_id) == std::vector<std::uint64_t>{500000101, 500000102});
    s.add_snapshot(r.match_id, 500000101, 1200, 800000, 0.51, "2026-01-01T00:00:00Z");
    CHECK(s.snapshot_count() == 1);
    CHECK(s.snapshots()[0].experience_total == 800000);
    CHECK_THROWS_AS(s.add_snapshot(r.match_id, 42, 1, 1, 0.5, "t"), NotFound);
}

TEST_CASE("sentiment cache") {
    Store s(":memory:");
    CHECK_FALSE(s.cached_sentiment("mock", "h").has_value());
    s.cache_sentiment("mock", "h", R"({"raw":0.5})");
    CHECK(*s.cached_sentiment("mock", "h") == R"({"raw":0.5})");
}

TEST_CASE("export never contains display names or account ids") {
    Store s(":memory:");
    ingest(s, small_match());
    for (auto f : {ExportFormat::csv, ExportFormat::jsonl}) {
        auto out = export_string(s, f);
        CHECK(out.find("EvilPlayer99") == std::string::npos);
        CHECK(to_lower_ascii(out).find("evilplayer99") == std::string::npos);
        CHECK(to_lower_ascii(out).find("calm_tanker") == std::string::npos);
        CHECK(out.find("500000102") == std::string::npos);
        CHECK(out.find("500000101") == std::string::npos);
        CHECK(out.find("<@>") != std::string::npos);
    }
}

TEST_CASE("export header and layout") {
    Store empty(":memory:");
    CHECK(export_string(empty, ExportFormat::csv) ==
          "match_id,player_guid,clock,text,is_abusive,is_positive,is_negative,has_bad_language,is_racist,"
          "noob_related,specific_target,filtered_text,cs,pcs\r\n");
    CHECK(export_string(empty, ExportFormat::jsonl).empty());

    Store s(":memory:");
    auto r = ingest(s, small_match());
    auto msgs = s.messages_for_match(r.match_id);
    LabelSet l;
    l[Attribute::is_negative] = true;
    l[Attribute::is_positive] = false;
    s.set_manual_labels(msgs[0].message_id, l, "ann", std::nullopt);
    std::vector<ScoreUpdate> u{{msgs[0].message_id, 1, 0, 1, 2}};
    s.set_scores(u);

    auto csv = export_string(s, ExportFormat::csv);
    auto line = csv.substr(csv.find("\r\n") + 2);
    line = line.substr(0, line.find("\r\n"));
    CHECK(line == r.match_id + "," + msgs[0].player_guid + ",12.5,\"noob team, <@> go home\",,0,1,,,,,,1,2");

    auto jsonl = export_string(s, ExportFormat::jsonl);
    auto first = jsonl.substr(0, jsonl.find('\n'));
    CHECK(first == R"({"match_id":")" + r.match_id + R"(","player_guid":")" + msgs[0].player_guid +
                       R"(","clock":12.5,"text":"noob team, <@> go home","is_abusive":null,"is_positive":false,)"
                       R"("is_negative":true,"has_bad_language":null,"is_racist":null,"noob_related":null,)"
                       R"("specific_target":null,"filtered_text":null,"cs":1,"pcs":2})");
}

TEST_CASE("export is byte-identical when repeated") {
    Store s(":memory:");
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10; ++i) ingest(s, testing::random_fixture_spec(rng), "fixture://" + std::to_string(i));
    CHECK(export_string(s, ExportFormat::csv) == export_string(s, ExportFormat::csv));
    CHECK(export_string(s, ExportFormat::jsonl) == export_string(s, ExportFormat::jsonl));
}

TEST_CASE("export reports a failing stream") {
    Store s(":memory:");
    ingest(s, small_match());
    std::ostringstream out;
    out.setstate(std::ios::badbit);
    CHECK_THROWS_AS(s.anonymized_export(ExportFormat::csv, out), ExportIO);
}
