#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wotchat::codec {

using Bytes = std::vector<std::uint8_t>;
using ReplayKey = std::array<std::uint8_t, 16>;

inline constexpr std::uint32_t kReplayMagic = 0x12323411;
inline constexpr std::size_t kHeaderSize = 8;          // magic + block count
inline constexpr std::size_t kPacketHeaderSize = 12;   // size + type + clock

// Key bytes 0x00..0x0F. The real game key is never shipped.
ReplayKey default_test_key();

// 32 hex digits -> key. Throws std::invalid_argument.
ReplayKey parse_key_hex(std::string_view hex);

// REPLAY_KEY_HEX if set, otherwise default_test_key().
ReplayKey key_from_environment();

struct FieldSpec {
    std::uint32_t offset = 0;
    std::uint32_t width = 0;
};

// Where chat and death fields live inside packet payloads. Real layouts drift
// between game versions, so the layout is data, loaded from a key = value file.
struct PacketSchema {
    std::uint32_t chat_type_id = 35;
    std::uint32_t death_type_id = 36;
    FieldSpec chat_author{0, 8};
    FieldSpec chat_text_len{8, 4};
    std::uint32_t chat_text_offset = 12;
    FieldSpec death_victim{0, 8};
    FieldSpec death_killer{8, 8};

    // Throws std::invalid_argument on a bad layout.
    void validate() const;
};

PacketSchema default_schema();
PacketSchema parse_schema(std::string_view text);
PacketSchema load_schema(const std::filesystem::path& path);

struct Packet {
    std::uint32_t packet_type = 0;
    float clock = 0.0f;
    Bytes payload;
    std::size_t offset = 0;  // record offset within the inflated packet stream
    std::size_t index = 0;   // position in the stream, before clock sorting
};

struct PlayerInfo {
    std::uint64_t account_id = 0;
    std::string display_name;
    std::string vehicle;
    int team = 1;

    bool operator==(const PlayerInfo&) const = default;
};

struct ReplayDocument {
    std::string source_id;
    std::vector<std::string> meta_blocks;
    std::vector<Packet> packets;  // clock non-decreasing, ties in stream order
    std::vector<PlayerInfo> players;
    std::string realm = "EU";
    std::vector<std::string> warnings;

    const PlayerInfo* find_player(std::uint64_t account_id) const;
};

struct ChatMessage {
    std::string message_id;
    std::string match_id;
    std::uint64_t author_account_id = 0;
    float clock = 0.0f;
    std::string text;
    bool unresolved = false;  // author not on the roster
};

struct DeathEvent {
    std::string match_id;
    std::uint64_t victim_account_id = 0;
    std::uint64_t killer_account_id = 0;  // 0 = environment
    float clock = 0.0f;
    bool unresolved = false;
};

class DecodeError : public std::runtime_error {
public:
    enum class Kind { bad_magic, truncated_block, decryption_failure, malformed_packet };

    DecodeError(Kind kind, std::size_t offset, const std::string& what);

    Kind kind() const noexcept { return kind_; }
    // File offset for container errors; inflated-stream offset for packet errors.
    std::size_t offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

std::string_view to_string(DecodeError::Kind kind);

struct DecodeOptions {
    // Upper bound on the inflated packet stream.
    std::size_t max_inflated_bytes = std::size_t{512} << 20;
};

ReplayDocument decode_replay(std::span<const std::uint8_t> bytes, const ReplayKey& key,
                             const PacketSchema& schema, std::string source_id = {},
                             const DecodeOptions& options = {});

// Chat packets in clock order. Throws DecodeError(malformed_packet) when a
// chat payload does not fit the schema. Whitespace-only texts are skipped.
std::vector<ChatMessage> extract_chat(const ReplayDocument& doc, const PacketSchema& schema);

std::vector<DeathEvent> extract_deaths(const ReplayDocument& doc, const PacketSchema& schema);

std::string message_id_for(std::string_view match_id, std::size_t packet_index);

}  // namespace wotchat::codec
