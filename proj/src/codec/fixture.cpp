#include "wotchat/codec/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <nlohmann/json.hpp>

#include "byte_io.hpp"
#include "wotchat/codec/blowfish.hpp"
#include "wotchat/text.hpp"
#include "zlib_stream.hpp"

namespace wotchat::codec {

namespace {

float event_clock(const FixtureEvent& e) {
    return std::visit([](const auto& v) { return v.clock; }, e);
}

bool fits(std::uint64_t v, std::uint32_t width) { return width >= 8 || v < (std::uint64_t{1} << (8 * width)); }

void put_field(Bytes& payload, FieldSpec f, std::uint64_t v, std::string_view name) {
    if (!fits(v, f.width)) throw SpecInvalid(std::string(name) + " does not fit schema width");
    detail::write_le(payload, f.offset, v, f.width);
}

std::string roster_block(const FixtureSpec& spec) {
    nlohmann::json roster = nlohmann::json::object();
    roster["realm"] = spec.realm;
    nlohmann::json vehicles = nlohmann::json::object();
    for (std::size_t i = 0; i < spec.players.size(); ++i) {
        const auto& p = spec.players[i];
        vehicles[std::to_string(i + 1)] = {
            {"accountDBID", p.account_id}, {"name", p.display_name}, {"vehicleType", p.vehicle}, {"team", p.team}};
    }
    roster["vehicles"] = std::move(vehicles);
    try {
        return roster.dump();
    } catch (const nlohmann::json::exception& e) {
        throw SpecInvalid(std::string("roster is not valid UTF-8: ") + e.what());
    }
}

void validate(const FixtureSpec& spec) {
    std::set<std::uint64_t> ids;
    for (const auto& p : spec.players) {
        if (p.account_id == 0) throw SpecInvalid("player account id must be non-zero");
        if (p.team != 1 && p.team != 2) throw SpecInvalid("player team must be 1 or 2");
        if (!ids.insert(p.account_id).second) throw SpecInvalid("duplicate player account id");
    }
    for (const auto& e : spec.events) {
        const float c = event_clock(e);
        if (!std::isfinite(c) || c < 0.0f) throw SpecInvalid("event clock must be finite and >= 0");
        if (const auto* chat = std::get_if<FixtureChat>(&e); chat && trim(chat->text).empty())
            throw SpecInvalid("chat text must be non-empty");
        if (const auto* d = std::get_if<FixtureDeath>(&e)) {
            if (d->victim == 0) throw SpecInvalid("death victim must be non-zero");
            if (d->victim == d->killer) throw SpecInvalid("death victim equals killer");
        }
    }
}

std::vector<std::size_t> clock_order(const FixtureSpec& spec) {
    std::vector<std::size_t> order(spec.events.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return event_clock(spec.events[a]) < event_clock(spec.events[b]);
    });
    return order;
}

struct PacketWriter {
    const PacketSchema& schema;
    Bytes& out;

    void record(std::uint32_t type, float clock, const Bytes& payload) {
        if (payload.size() > 0xFFFFFFFFu) throw SpecInvalid("payload too large");
        detail::append_u32(out, static_cast<std::uint32_t>(payload.size()));
        detail::append_u32(out, type);
        detail::append_f32(out, clock);
        out.insert(out.end(), payload.begin(), payload.end());
    }

    void operator()(const FixtureChat& c) {
        const std::size_t end = std::max<std::size_t>({schema.chat_author.offset + schema.chat_author.width,
                                                       schema.chat_text_len.offset + schema.chat_text_len.width,
                                                       schema.chat_text_offset + c.text.size()});
        Bytes payload(end, 0);
        put_field(payload, schema.chat_author, c.author, "chat author");
        put_field(payload, schema.chat_text_len, c.text.size(), "chat text length");
        std::copy(c.text.begin(), c.text.end(), payload.begin() + schema.chat_text_offset);
        record(schema.chat_type_id, c.clock, payload);
    }

    void operator()(const FixtureDeath& d) {
        const std::size_t end = std::max<std::size_t>(schema.death_victim.offset + schema.death_victim.width,
                                                      schema.death_killer.offset + schema.death_killer.width);
        Bytes payload(end, 0);
        put_field(payload, schema.death_victim, d.victim, "death victim");
        put_field(payload, schema.death_killer, d.killer, "death killer");
        record(schema.death_type_id, d.clock, payload);
    }

    void operator()(const FixtureRaw& r) {
        if (r.packet_type == schema.chat_type_id || r.packet_type == schema.death_type_id)
            throw SpecInvalid("raw packet uses a chat or death type id");
        record(r.packet_type, r.clock, r.payload);
    }
};

}  // namespace

Bytes encode_fixture(const FixtureSpec& spec, const ReplayKey& key, const PacketSchema& schema) {
    schema.validate();
    validate(spec);

    Bytes stream;
    PacketWriter writer{schema, stream};
    for (auto i : clock_order(spec)) std::visit(writer, spec.events[i]);

    std::vector<std::string> blocks;
    blocks.push_back(roster_block(spec));
    blocks.insert(blocks.end(), spec.extra_meta_blocks.begin(), spec.extra_meta_blocks.end());

    Bytes out;
    detail::append_u32(out, kReplayMagic);
    detail::append_u32(out, static_cast<std::uint32_t>(blocks.size()));
    for (const auto& b : blocks) {
        detail::append_u32(out, static_cast<std::uint32_t>(b.size()));
        out.insert(out.end(), b.begin(), b.end());
    }

    const Blowfish cipher(key);
    const auto encrypted = chain_encrypt(cipher, detail::zlib_compress(stream));
    out.insert(out.end(), encrypted.begin(), encrypted.end());
    return out;
}

std::vector<FixtureChat> expected_chats(const FixtureSpec& spec) {
    std::vector<FixtureChat> out;
    for (auto i : clock_order(spec))
        if (const auto* c = std::get_if<FixtureChat>(&spec.events[i])) out.push_back(*c);
    return out;
}

std::vector<FixtureDeath> expected_deaths(const FixtureSpec& spec) {
    std::vector<FixtureDeath> out;
    for (auto i : clock_order(spec))
        if (const auto* d = std::get_if<FixtureDeath>(&spec.events[i])) out.push_back(*d);
    return out;
}

}  // namespace wotchat::codec
