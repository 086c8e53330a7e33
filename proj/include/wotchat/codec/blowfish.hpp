#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace wotchat::codec {

// Blowfish block cipher (64-bit blocks, 32..448-bit keys). Blocks are read
// and written big-endian, the same convention as the reference
// implementation and OpenSSL's BF_ecb_encrypt.
class Blowfish {
public:
    static constexpr std::size_t kBlockSize = 8;

    explicit Blowfish(std::span<const std::uint8_t> key);

    void encrypt_block(std::span<std::uint8_t, kBlockSize> block) const;
    void decrypt_block(std::span<std::uint8_t, kBlockSize> block) const;

    void encrypt(std::uint32_t& left, std::uint32_t& right) const;
    void decrypt(std::uint32_t& left, std::uint32_t& right) const;

private:
    std::uint32_t feistel(std::uint32_t x) const;

    std::array<std::uint32_t, 18> p_;
    std::array<std::array<std::uint32_t, 256>, 4> s_;
};

// Plaintext-chained mode used by the replay container: every plaintext block
// is XORed with the previous plaintext block before encryption (the first
// block with zeros). A trailing partial block is zero-padded.
std::vector<std::uint8_t> chain_encrypt(const Blowfish& cipher, std::span<const std::uint8_t> plain);

// Input length must be a multiple of the block size.
std::vector<std::uint8_t> chain_decrypt(const Blowfish& cipher, std::span<const std::uint8_t> encrypted);

}  // namespace wotchat::codec
