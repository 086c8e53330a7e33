#include "byte_io.hpp"
#include "wotchat/codec/replay.hpp"
#include "wotchat/text.hpp"

namespace wotchat::codec {

namespace {

std::uint64_t read_field(const Packet& p, FieldSpec f, std::string_view name) {
    if (std::size_t{f.offset} + f.width > p.payload.size())
        throw DecodeError(DecodeError::Kind::malformed_packet, p.offset,
                          std::string(name) + " field outside payload of " + std::to_string(p.payload.size()) + " bytes");
    return detail::read_le(p.payload, f.offset, f.width);
}

}  // namespace

std::string message_id_for(std::string_view match_id, std::size_t packet_index) {
    return std::string(match_id) + ":" + std::to_string(packet_index);
}

std::vector<ChatMessage> extract_chat(const ReplayDocument& doc, const PacketSchema& schema) {
    std::vector<ChatMessage> out;
    for (const auto& p : doc.packets) {
        if (p.packet_type != schema.chat_type_id) continue;
        const auto author = read_field(p, schema.chat_author, "chat author");
        const auto len = read_field(p, schema.chat_text_len, "chat text length");
        if (schema.chat_text_offset > p.payload.size() || len > p.payload.size() - schema.chat_text_offset)
            throw DecodeError(DecodeError::Kind::malformed_packet, p.offset, "chat text exceeds payload");

        std::string text(reinterpret_cast<const char*>(p.payload.data() + schema.chat_text_offset), len);
        if (trim(text).empty()) continue;

        ChatMessage m;
        m.message_id = message_id_for(doc.source_id, p.index);
        m.match_id = doc.source_id;
        m.author_account_id = author;
        m.clock = p.clock;
        m.text = std::move(text);
        m.unresolved = doc.find_player(author) == nullptr;
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<DeathEvent> extract_deaths(const ReplayDocument& doc, const PacketSchema& schema) {
    std::vector<DeathEvent> out;
    for (const auto& p : doc.packets) {
        if (p.packet_type != schema.death_type_id) continue;
        DeathEvent d;
        d.match_id = doc.source_id;
        d.victim_account_id = read_field(p, schema.death_victim, "death victim");
        d.killer_account_id = read_field(p, schema.death_killer, "death killer");
        d.clock = p.clock;
        if (d.victim_account_id == 0 || d.victim_account_id == d.killer_account_id)
            throw DecodeError(DecodeError::Kind::malformed_packet, p.offset, "death event victim is invalid");
        d.unresolved = doc.find_player(d.victim_account_id) == nullptr ||
                       (d.killer_account_id != 0 && doc.find_player(d.killer_account_id) == nullptr);
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace wotchat::codec
