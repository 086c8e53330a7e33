#pragma once

#include <stdexcept>
#include <variant>

#include "wotchat/codec/replay.hpp"

namespace wotchat::codec {

struct FixtureChat {
    std::uint64_t author = 0;
    float clock = 0.0f;
    std::string text;
};

struct FixtureDeath {
    std::uint64_t victim = 0;
    std::uint64_t killer = 0;
    float clock = 0.0f;
};

struct FixtureRaw {
    std::uint32_t packet_type = 0;
    float clock = 0.0f;
    Bytes payload;
};

using FixtureEvent = std::variant<FixtureChat, FixtureDeath, FixtureRaw>;

// Description of a synthetic replay. Events are written in stable clock
// order; the roster becomes meta block 0 and extra_meta_blocks follow it.
struct FixtureSpec {
    std::string realm = "EU";
    std::vector<PlayerInfo> players;
    std::vector<std::string> extra_meta_blocks;
    std::vector<FixtureEvent> events;
};

class SpecInvalid : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Deterministic: the same spec always yields the same bytes.
Bytes encode_fixture(const FixtureSpec& spec, const ReplayKey& key = default_test_key(),
                     const PacketSchema& schema = default_schema());

// Event list as decode -> extract should reproduce it.
std::vector<FixtureChat> expected_chats(const FixtureSpec& spec);
std::vector<FixtureDeath> expected_deaths(const FixtureSpec& spec);

}  // namespace wotchat::codec
