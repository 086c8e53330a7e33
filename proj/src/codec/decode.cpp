#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "byte_io.hpp"
#include "wotchat/codec/blowfish.hpp"
#include "wotchat/codec/replay.hpp"
#include "wotchat/text.hpp"
#include "zlib_stream.hpp"

namespace wotchat::codec {

using detail::read_f32;
using detail::read_u32;

DecodeError::DecodeError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + " at offset " + std::to_string(offset) + ": " + what),
      kind_(kind),
      offset_(offset) {}

std::string_view to_string(DecodeError::Kind kind) {
    switch (kind) {
        case DecodeError::Kind::bad_magic: return "BadMagic";
        case DecodeError::Kind::truncated_block: return "TruncatedBlock";
        case DecodeError::Kind::decryption_failure: return "DecryptionFailure";
        case DecodeError::Kind::malformed_packet: return "MalformedPacket";
    }
    return "DecodeError";
}

const PlayerInfo* ReplayDocument::find_player(std::uint64_t account_id) const {
    auto it = std::find_if(players.begin(), players.end(),
                           [&](const PlayerInfo& p) { return p.account_id == account_id; });
    return it == players.end() ? nullptr : &*it;
}

namespace {

void read_roster(ReplayDocument& doc) {
    if (doc.meta_blocks.empty()) return;
    auto json = nlohmann::json::parse(doc.meta_blocks.front(), nullptr, false);
    if (json.is_discarded() || !json.is_object()) {
        doc.warnings.emplace_back("meta block 0 is not a JSON object; roster empty");
        return;
    }
    if (auto realm = json.find("realm"); realm != json.end() && realm->is_string()) doc.realm = realm->get<std::string>();

    auto vehicles = json.find("vehicles");
    if (vehicles == json.end() || !vehicles->is_object()) return;
    for (const auto& [key, v] : vehicles->items()) {
        if (!v.is_object() || !v.contains("accountDBID") || !v["accountDBID"].is_number_unsigned()) {
            doc.warnings.push_back("roster entry " + key + " has no account id");
            continue;
        }
        PlayerInfo p;
        p.account_id = v["accountDBID"].get<std::uint64_t>();
        p.display_name = v.value("name", std::string{});
        p.vehicle = v.value("vehicleType", std::string{});
        p.team = v.value("team", 1);
        doc.players.push_back(std::move(p));
    }
}

void read_packets(ReplayDocument& doc, std::span<const std::uint8_t> stream) {
    std::size_t off = 0;
    while (stream.size() - off >= kPacketHeaderSize) {
        const std::uint32_t size = read_u32(stream, off);
        const std::uint32_t type = read_u32(stream, off + 4);
        const float clock = read_f32(stream, off + 8);
        const std::size_t remaining = stream.size() - off - kPacketHeaderSize;
        if (size > remaining)
            throw DecodeError(DecodeError::Kind::malformed_packet, off,
                              "payload size " + std::to_string(size) + " exceeds remaining " + std::to_string(remaining));
        if (!std::isfinite(clock) || clock < 0.0f)
            throw DecodeError(DecodeError::Kind::malformed_packet, off, "invalid packet clock");

        Packet p;
        p.packet_type = type;
        p.clock = clock;
        auto body = stream.subspan(off + kPacketHeaderSize, size);
        p.payload.assign(body.begin(), body.end());
        p.offset = off;
        p.index = doc.packets.size();
        doc.packets.push_back(std::move(p));
        off += kPacketHeaderSize + size;
    }
    if (off != stream.size())
        doc.warnings.push_back("ignored " + std::to_string(stream.size() - off) + " trailing bytes after last packet");

    std::stable_sort(doc.packets.begin(), doc.packets.end(),
                     [](const Packet& a, const Packet& b) { return a.clock < b.clock; });
}

}  // namespace

ReplayDocument decode_replay(std::span<const std::uint8_t> bytes, const ReplayKey& key, const PacketSchema& schema,
                             std::string source_id, const DecodeOptions& options) {
    schema.validate();
    if (bytes.size() < kHeaderSize)
        throw DecodeError(DecodeError::Kind::truncated_block, 0, "file shorter than header");
    if (read_u32(bytes, 0) != kReplayMagic) throw DecodeError(DecodeError::Kind::bad_magic, 0, "unexpected magic");

    ReplayDocument doc;
    doc.source_id = source_id.empty() ? sha256_hex(bytes) : std::move(source_id);

    const std::uint32_t block_count = read_u32(bytes, 4);
    std::size_t off = kHeaderSize;
    // Every block needs at least its length prefix; reject counts that cannot fit.
    if (block_count > (bytes.size() - off) / 4)
        throw DecodeError(DecodeError::Kind::truncated_block, 4, "block count exceeds file size");
    doc.meta_blocks.reserve(block_count);
    for (std::uint32_t i = 0; i < block_count; ++i) {
        if (bytes.size() - off < 4) throw DecodeError(DecodeError::Kind::truncated_block, off, "missing block length");
        const std::uint32_t len = read_u32(bytes, off);
        if (len > bytes.size() - off - 4)
            throw DecodeError(DecodeError::Kind::truncated_block, off, "block length exceeds file size");
        doc.meta_blocks.emplace_back(reinterpret_cast<const char*>(bytes.data() + off + 4), len);
        off += 4 + len;
    }

    const auto encrypted = bytes.subspan(off);
    if (encrypted.size() % Blowfish::kBlockSize != 0)
        throw DecodeError(DecodeError::Kind::truncated_block, off + encrypted.size() / 8 * 8,
                          "encrypted payload is not a whole number of cipher blocks");

    const Blowfish cipher(key);
    const auto plain = chain_decrypt(cipher, encrypted);

    std::string error;
    auto inflated = detail::zlib_inflate(plain, options.max_inflated_bytes, error);
    if (!inflated) throw DecodeError(DecodeError::Kind::decryption_failure, off, error);
    // Only zero padding of a final partial block may follow the stream.
    const std::size_t tail = plain.size() - inflated->consumed;
    if (tail >= Blowfish::kBlockSize ||
        !std::all_of(plain.begin() + static_cast<std::ptrdiff_t>(inflated->consumed), plain.end(),
                     [](std::uint8_t b) { return b == 0; }))
        throw DecodeError(DecodeError::Kind::decryption_failure, off + inflated->consumed,
                          "unexpected bytes after compressed stream");

    read_roster(doc);
    read_packets(doc, inflated->data);
    return doc;
}

}  // namespace wotchat::codec
