#pragma once

// Independent container writer built directly on OpenSSL Blowfish and zlib.
// Used to craft files the library encoder refuses to produce (bad packet
// sizes, trailing bytes) and to cross-check the library encoder.

#define OPENSSL_SUPPRESS_DEPRECATED
#include <openssl/blowfish.h>
#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace wotchat::testing {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

inline std::vector<std::uint8_t> packet_record(std::uint32_t type, float clock, const std::vector<std::uint8_t>& payload) {
    std::vector<std::uint8_t> out;
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    put_u32(out, type);
    put_f32(out, clock);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

inline std::vector<std::uint8_t> openssl_chain_encrypt(const std::array<std::uint8_t, 16>& key,
                                                       std::vector<std::uint8_t> plain) {
    BF_KEY bf;
    BF_set_key(&bf, 16, key.data());
    plain.resize((plain.size() + 7) / 8 * 8, 0);
    std::vector<std::uint8_t> out(plain.size());
    std::array<std::uint8_t, 8> prev{};
    for (std::size_t off = 0; off < plain.size(); off += 8) {
        std::array<std::uint8_t, 8> block;
        for (int i = 0; i < 8; ++i) block[i] = plain[off + i] ^ prev[i];
        BF_ecb_encrypt(block.data(), out.data() + off, &bf, BF_ENCRYPT);
        std::memcpy(prev.data(), plain.data() + off, 8);
    }
    return out;
}

inline std::vector<std::uint8_t> oracle_container(const std::vector<std::string>& blocks,
                                                  const std::vector<std::uint8_t>& packet_stream,
                                                  const std::array<std::uint8_t, 16>& key) {
    std::vector<std::uint8_t> out;
    put_u32(out, 0x12323411);
    put_u32(out, static_cast<std::uint32_t>(blocks.size()));
    for (const auto& b : blocks) {
        put_u32(out, static_cast<std::uint32_t>(b.size()));
        out.insert(out.end(), b.begin(), b.end());
    }
    uLongf bound = compressBound(static_cast<uLong>(packet_stream.size()));
    std::vector<std::uint8_t> z(bound);
    compress2(z.data(), &bound, packet_stream.data(), static_cast<uLong>(packet_stream.size()), Z_DEFAULT_COMPRESSION);
    z.resize(bound);
    auto enc = openssl_chain_encrypt(key, z);
    out.insert(out.end(), enc.begin(), enc.end());
    return out;
}

}  // namespace wotchat::testing
