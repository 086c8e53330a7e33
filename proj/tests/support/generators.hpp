#pragma once

// Random inputs shared by unit and acceptance tests.

#include <random>
#include <string>
#include <vector>

#include "wotchat/codec/fixture.hpp"
#include "wotchat/text.hpp"

namespace wotchat::testing {

inline std::string random_text(std::mt19937_64& rng) {
    static const std::vector<std::string> pieces = {
        "gg",    "wp",   "noob",  "u",      "tiger", "useless", "****", "go",    "left", "flank",
        "arty",  "help", "lol",   "\xF0\x9F\x98\x80", "caf\xC3\xA9", "\xE6\x88\x98", "ok",  "  ",
        "push",  "why",  "idiot", "thanks", "!",     "n00b",    "cap",  "\t",   "tomato", "xD",
    };
    std::uniform_int_distribution<int> n(1, 6);
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    std::string s;
    int words = n(rng);
    for (int i = 0; i < words; ++i) {
        if (i) s += ' ';
        s += pieces[pick(rng)];
    }
    if (trim(s).empty()) s += "x";
    return s;
}

inline codec::FixtureSpec random_fixture_spec(std::mt19937_64& rng, std::size_t max_events = 40) {
    using namespace codec;
    FixtureSpec spec;
    std::uniform_int_distribution<int> nplayers(1, 8);
    std::uniform_int_distribution<std::uint64_t> id(1, 0xFFFFFFFFFFFFull);
    const int players = nplayers(rng);
    for (int i = 0; i < players; ++i) {
        PlayerInfo p;
        p.account_id = id(rng) + static_cast<std::uint64_t>(i);  // distinct in practice
        p.display_name = "player_" + std::to_string(p.account_id % 100000);
        p.vehicle = (i % 2) ? "germany:G04_PzVI_Tiger_I" : "ussr:R04_T-34";
        p.team = 1 + i % 2;
        bool dup = false;
        for (const auto& q : spec.players) dup |= q.account_id == p.account_id;
        if (!dup) spec.players.push_back(p);
    }
    if (rng() % 4 == 0) spec.extra_meta_blocks.push_back("{\"vehicles\":{}, \"note\":\"second block\"}");

    std::uniform_int_distribution<std::size_t> nevents(0, max_events);
    std::uniform_int_distribution<int> kind(0, 9);
    // Coarse clocks so that ties are common.
    std::uniform_int_distribution<int> tick(0, 60);
    std::uniform_int_distribution<std::size_t> who(0, spec.players.size() - 1);
    const std::size_t count = nevents(rng);
    for (std::size_t i = 0; i < count; ++i) {
        const float clock = static_cast<float>(tick(rng)) * 0.5f;
        const int k = kind(rng);
        if (k < 6) {
            std::uint64_t author = spec.players[who(rng)].account_id;
            if (k == 0) author = 424242;  // not on the roster
            spec.events.emplace_back(FixtureChat{author, clock, random_text(rng)});
        } else if (k < 9) {
            std::uint64_t victim = spec.players[who(rng)].account_id;
            std::uint64_t killer = (k == 8) ? 0 : spec.players[who(rng)].account_id;
            if (killer == victim) killer = 0;
            spec.events.emplace_back(FixtureDeath{victim, killer, clock});
        } else {
            Bytes payload(rng() % 24);
            for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
            spec.events.emplace_back(FixtureRaw{static_cast<std::uint32_t>(1 + rng() % 30), clock, payload});
        }
    }
    return spec;
}

}  // namespace wotchat::testing
