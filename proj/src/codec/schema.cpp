#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "wotchat/codec/replay.hpp"
#include "wotchat/text.hpp"

namespace wotchat::codec {

namespace {

bool valid_width(std::uint32_t w, bool allow_narrow) {
    return w == 4 || w == 8 || (allow_narrow && (w == 1 || w == 2));
}

std::uint32_t parse_u32(std::string_view key, std::string_view value) {
    std::string s(value);
    char* end = nullptr;
    int base = (s.rfind("0x", 0) == 0 || s.rfind("0X", 0) == 0) ? 16 : 10;
    errno = 0;
    unsigned long v = std::strtoul(s.c_str(), &end, base);
    if (s.empty() || *end != '\0' || errno != 0 || v > 0xFFFFFFFFul || s[0] == '-')
        throw std::invalid_argument("schema: bad value for " + std::string(key) + ": '" + s + "'");
    return static_cast<std::uint32_t>(v);
}

}  // namespace

void PacketSchema::validate() const {
    if (chat_type_id == death_type_id) throw std::invalid_argument("schema: chat and death type ids must differ");
    if (!valid_width(chat_author.width, false) || !valid_width(death_victim.width, false) ||
        !valid_width(death_killer.width, false))
        throw std::invalid_argument("schema: account id fields must be 4 or 8 bytes wide");
    if (!valid_width(chat_text_len.width, true)) throw std::invalid_argument("schema: text length width must be 1, 2, 4 or 8");

    auto overlaps = [](FieldSpec a, FieldSpec b) {
        return a.offset < b.offset + b.width && b.offset < a.offset + a.width;
    };
    if (overlaps(chat_author, chat_text_len)) throw std::invalid_argument("schema: chat fields overlap");
    if (overlaps(death_victim, death_killer)) throw std::invalid_argument("schema: death fields overlap");
    if (chat_text_offset < chat_author.offset + chat_author.width &&
        chat_author.offset < chat_text_offset)
        throw std::invalid_argument("schema: chat text overlaps author field");
    if (chat_text_offset < chat_text_len.offset + chat_text_len.width && chat_text_len.offset < chat_text_offset)
        throw std::invalid_argument("schema: chat text overlaps length field");
    if (chat_text_offset <= chat_author.offset || chat_text_offset <= chat_text_len.offset)
        throw std::invalid_argument("schema: chat text must follow the fixed chat fields");
}

PacketSchema default_schema() { return PacketSchema{}; }

PacketSchema parse_schema(std::string_view text) {
    PacketSchema schema;
    const std::map<std::string, std::uint32_t*, std::less<>> fields = {
        {"chat_type_id", &schema.chat_type_id},
        {"death_type_id", &schema.death_type_id},
        {"chat.author.offset", &schema.chat_author.offset},
        {"chat.author.width", &schema.chat_author.width},
        {"chat.text_len.offset", &schema.chat_text_len.offset},
        {"chat.text_len.width", &schema.chat_text_len.width},
        {"chat.text.offset", &schema.chat_text_offset},
        {"death.victim.offset", &schema.death_victim.offset},
        {"death.victim.width", &schema.death_victim.width},
        {"death.killer.offset", &schema.death_killer.offset},
        {"death.killer.width", &schema.death_killer.width},
    };

    for (const auto& [key, value] : parse_key_value(text, "schema")) {
        auto it = fields.find(key);
        if (it == fields.end()) throw std::invalid_argument("schema: unknown key '" + key + "'");
        *it->second = parse_u32(key, value);
    }
    schema.validate();
    return schema;
}

PacketSchema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open schema file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_schema(ss.str());
}

ReplayKey default_test_key() {
    ReplayKey key;
    for (std::size_t i = 0; i < key.size(); ++i) key[i] = static_cast<std::uint8_t>(i);
    return key;
}

ReplayKey parse_key_hex(std::string_view hex) {
    auto bytes = decode_hex(hex);
    if (!bytes || bytes->size() != 16) throw std::invalid_argument("replay key must be exactly 32 hex digits");
    ReplayKey key;
    std::copy(bytes->begin(), bytes->end(), key.begin());
    return key;
}

ReplayKey key_from_environment() {
    if (const char* env = std::getenv("REPLAY_KEY_HEX"); env && *env) return parse_key_hex(env);
    return default_test_key();
}

}  // namespace wotchat::codec
