#include <doctest.h>

#include <algorithm>
#include <random>

#include "support/corpus.hpp"
#include "support/score_oracle.hpp"
#include "wotchat/score/score.hpp"
#include "wotchat/store/store.hpp"

using namespace wotchat;
using namespace wotchat::score;

namespace {

LabelSet flags(std::initializer_list<Attribute> on) {
    LabelSet l;
    for (auto a : on) l[a] = true;
    return l;
}

ScoreInput msg(std::string id, std::string author, double clock, LabelSet l) {
    return ScoreInput{std::move(id), std::move(author), clock, 0, l, l};
}

std::vector<int> cs_values(const std::vector<ScoredMessage>& s) {
    std::vector<int> out;
    for (const auto& m : s) out.push_back(m.cs);
    return out;
}

}  // namespace

TEST_CASE("worked three-message example scores 4, 6, 8") {
    auto seq = testing::worked_example();
    CHECK(cs_values(cs_for_match(seq)) == std::vector<int>{4, 6, 8});
}

TEST_CASE("worked example in reverse clock order follows the hand rules") {
    auto seq = testing::worked_example();
    for (auto& m : seq) m.clock = 100.0 - m.clock;
    auto scored = cs_for_match(seq);
    // Bases become 6, 5, 4 in the new order and bonuses 0, 1, 2.
    CHECK(cs_values(scored) == testing::oracle_cs(seq));
    CHECK(cs_values(scored) == std::vector<int>{6, 6, 6});
}

TEST_CASE("base score rules") {
    using A = Attribute;
    CHECK(base_score(flags({A::is_negative, A::specific_target})) == 4);
    CHECK(base_score(flags({A::is_negative, A::specific_target, A::noob_related, A::has_bad_language,
                            A::filtered_text, A::is_racist})) == 9);
    CHECK(base_score(flags({A::is_positive, A::specific_target})) == -4);
    CHECK(base_score(flags({A::is_positive})) == -1);
    CHECK(base_score(LabelSet{}) == 0);
    CHECK(base_score(flags({A::noob_related})) == 0);  // not negative, so nothing counts
    CHECK(base_score(flags({A::is_negative, A::filtered_text, A::has_bad_language})) == 3);
    CHECK_THROWS_AS(base_score(flags({A::is_positive, A::is_negative})), InvalidLabels);
}

TEST_CASE("single positive message") {
    std::vector<ScoreInput> one{msg("m", "a", 1, flags({Attribute::is_positive}))};
    CHECK(cs_values(cs_for_match(one)) == std::vector<int>{-1});
}

TEST_CASE("proxy score formula") {
    using A = Attribute;
    CHECK(pcs(flags({A::is_negative, A::is_racist, A::has_bad_language}), 0) == 5);
    CHECK(pcs(LabelSet{}, 0) == 0);
    CHECK(pcs(flags({A::is_negative, A::noob_related}), 2) == 4);
    CHECK(pcs(flags({A::is_negative, A::specific_target}), 0) == 1);
}

TEST_CASE("every label combination stays within the score range") {
    bool saw_min = false, saw_max = false;
    testing::for_each_tri_labelset([&](const LabelSet& l) {
        if (!l.exclusion_ok()) {
            CHECK_THROWS_AS(base_score(l), InvalidLabels);
            return;
        }
        int s = base_score(l);
        CHECK(s >= kMinBaseScore);
        CHECK(s <= kMaxBaseScore);
        CHECK(s == testing::oracle_base(l));
        CHECK(pcs(l, 0) >= 0);
        CHECK(pcs(l, 0) == testing::oracle_pcs(l, 0));
        saw_min |= s == kMinBaseScore;
        saw_max |= s == kMaxBaseScore;
        if (!l.is(Attribute::is_positive)) {
            LabelSet with = l;
            with[Attribute::specific_target] = true;
            if (l.is(Attribute::is_negative)) CHECK(pcs(l, 0) <= base_score(with));
        }
    });
    CHECK(saw_min);
    CHECK(saw_max);
}

TEST_CASE("repetition bonuses") {
    std::vector<RepetitionInput> three{{"a", true}, {"a", true}, {"a", true}};
    CHECK(repetition_bonuses(three) == std::vector<int>{0, 1, 2});
    std::vector<RepetitionInput> none{{"a", false}, {"b", false}};
    CHECK(repetition_bonuses(none) == std::vector<int>{0, 0});
    std::vector<RepetitionInput> mixed{{"a", true}, {"b", true}, {"a", false}, {"a", true}, {"b", true}, {"b", true}};
    CHECK(repetition_bonuses(mixed) == std::vector<int>{0, 0, 0, 1, 1, 2});
}

TEST_CASE("repetition bonuses match a brute-force counter") {
    std::mt19937_64 rng(3);
    for (int round = 0; round < 300; ++round) {
        std::vector<RepetitionInput> in;
        int n = static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) in.push_back({std::string(1, static_cast<char>('a' + rng() % 4)), rng() % 2 == 0});
        auto got = repetition_bonuses(in);
        for (std::size_t i = 0; i < in.size(); ++i) {
            int expected = 0;
            if (in[i].is_negative)
                for (std::size_t j = 0; j < i; ++j) expected += in[j].author == in[i].author && in[j].is_negative;
            CHECK(got[i] == expected);
        }
    }
}

TEST_CASE("interleaving authors leaves each message's score unchanged") {
    std::mt19937_64 rng(17);
    for (int round = 0; round < 200; ++round) {
        // Per-author message lists, then two random merges of them.
        std::vector<std::vector<LabelSet>> per_author(3);
        for (auto& list : per_author) {
            int n = static_cast<int>(rng() % 6);
            for (int i = 0; i < n; ++i) list.push_back(testing::random_valid_labels(rng));
        }
        auto merge = [&] {
            std::vector<ScoreInput> out;
            std::vector<std::size_t> pos(per_author.size(), 0);
            double clock = 0;
            for (;;) {
                std::vector<std::size_t> open;
                for (std::size_t a = 0; a < per_author.size(); ++a)
                    if (pos[a] < per_author[a].size()) open.push_back(a);
                if (open.empty()) break;
                auto a = open[rng() % open.size()];
                auto id = std::to_string(a) + "/" + std::to_string(pos[a]);
                out.push_back(msg(id, std::to_string(a), clock += 1, per_author[a][pos[a]++]));
            }
            return out;
        };
        auto by_id = [](std::vector<ScoredMessage> v) {
            std::sort(v.begin(), v.end(), [](auto& x, auto& y) { return x.message_id < y.message_id; });
            return v;
        };
        auto a = by_id(cs_for_match(merge()));
        auto b = by_id(cs_for_match(merge()));
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].cs == b[i].cs);
            CHECK(a[i].pcs == b[i].pcs);
        }
    }
}

TEST_CASE("clock ties are broken by ingestion sequence") {
    auto neg = flags({Attribute::is_negative});
    std::vector<ScoreInput> v{{"late", "a", 5.0, 2, neg, neg}, {"early", "a", 5.0, 1, neg, neg}};
    auto s = cs_for_match(v);
    CHECK(s[0].message_id == "early");
    CHECK(s[0].repetition_bonus == 0);
    CHECK(s[1].repetition_bonus == 1);
}

TEST_CASE("invalid labels name the message") {
    std::vector<ScoreInput> v{msg("bad-one", "a", 1, flags({Attribute::is_positive, Attribute::is_negative}))};
    try {
        cs_for_match(v);
        FAIL("expected InvalidLabels");
    } catch (const InvalidLabels& e) {
        CHECK(e.message_id() == "bad-one");
    }
}

TEST_CASE("label source names") {
    CHECK(label_source_from_string("auto") == LabelSource::automatic);
    CHECK(to_string(LabelSource::merged) == "merged");
    CHECK_THROWS_AS(label_source_from_string("x"), std::invalid_argument);
}

TEST_CASE("score_store writes deterministic scores") {
    store::Store s(":memory:");
    auto corpus = testing::load_golden_corpus();
    testing::ingest_texts(s, corpus);
    std::vector<std::pair<std::string, LabelSet>> autos;
    auto msgs = s.messages();
    for (std::size_t i = 0; i < msgs.size(); ++i) autos.emplace_back(msgs[i].message_id, corpus[i].expected);
    s.set_auto_labels(autos);

    auto first = score_store(s, LabelSource::merged);
    auto snapshot = s.messages();
    auto second = score_store(s, LabelSource::merged);
    CHECK(first.messages == 50);
    CHECK(first.total_cs == second.total_cs);
    auto again = s.messages();
    for (std::size_t i = 0; i < snapshot.size(); ++i) {
        CHECK(snapshot[i].cs.has_value());
        CHECK(snapshot[i].cs == again[i].cs);
        CHECK(snapshot[i].pcs == again[i].pcs);
        // without manual labels, merged CS equals the proxy score plus nothing for specific target
        CHECK(snapshot[i].cs == (snapshot[i].auto_labels.is(Attribute::is_positive) ? -1 : *snapshot[i].pcs));
    }
    CHECK(score_store(s, LabelSource::manual).total_cs == 0);
}
