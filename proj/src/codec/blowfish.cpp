#include "wotchat/codec/blowfish.hpp"

#include <stdexcept>

namespace wotchat::codec {

namespace {
#include "blowfish_tables.inc"

std::uint32_t load_be(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
           std::uint32_t{p[3]};
}

void store_be(std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v >> 24);
    p[1] = static_cast<std::uint8_t>(v >> 16);
    p[2] = static_cast<std::uint8_t>(v >> 8);
    p[3] = static_cast<std::uint8_t>(v);
}
}  // namespace

Blowfish::Blowfish(std::span<const std::uint8_t> key) : p_(kInitialP), s_(kInitialS) {
    if (key.size() < 4 || key.size() > 56)
        throw std::invalid_argument("blowfish key must be 4..56 bytes");

    std::size_t k = 0;
    for (auto& entry : p_) {
        std::uint32_t word = 0;
        for (int i = 0; i < 4; ++i) {
            word = (word << 8) | key[k];
            k = (k + 1) % key.size();
        }
        entry ^= word;
    }

    std::uint32_t left = 0, right = 0;
    for (std::size_t i = 0; i < p_.size(); i += 2) {
        encrypt(left, right);
        p_[i] = left;
        p_[i + 1] = right;
    }
    for (auto& box : s_) {
        for (std::size_t i = 0; i < box.size(); i += 2) {
            encrypt(left, right);
            box[i] = left;
            box[i + 1] = right;
        }
    }
}

std::uint32_t Blowfish::feistel(std::uint32_t x) const {
    return ((s_[0][x >> 24] + s_[1][(x >> 16) & 0xFF]) ^ s_[2][(x >> 8) & 0xFF]) + s_[3][x & 0xFF];
}

void Blowfish::encrypt(std::uint32_t& left, std::uint32_t& right) const {
    std::uint32_t l = left, r = right;
    for (std::size_t i = 0; i < 16; i += 2) {
        l ^= p_[i];
        r ^= feistel(l);
        r ^= p_[i + 1];
        l ^= feistel(r);
    }
    l ^= p_[16];
    r ^= p_[17];
    left = r;
    right = l;
}

void Blowfish::decrypt(std::uint32_t& left, std::uint32_t& right) const {
    std::uint32_t l = left, r = right;
    for (std::size_t i = 17; i > 1; i -= 2) {
        l ^= p_[i];
        r ^= feistel(l);
        r ^= p_[i - 1];
        l ^= feistel(r);
    }
    l ^= p_[1];
    r ^= p_[0];
    left = r;
    right = l;
}

void Blowfish::encrypt_block(std::span<std::uint8_t, kBlockSize> block) const {
    std::uint32_t l = load_be(block.data()), r = load_be(block.data() + 4);
    encrypt(l, r);
    store_be(block.data(), l);
    store_be(block.data() + 4, r);
}

void Blowfish::decrypt_block(std::span<std::uint8_t, kBlockSize> block) const {
    std::uint32_t l = load_be(block.data()), r = load_be(block.data() + 4);
    decrypt(l, r);
    store_be(block.data(), l);
    store_be(block.data() + 4, r);
}

std::vector<std::uint8_t> chain_encrypt(const Blowfish& cipher, std::span<const std::uint8_t> plain) {
    constexpr auto bs = Blowfish::kBlockSize;
    std::vector<std::uint8_t> out((plain.size() + bs - 1) / bs * bs, 0);
    std::copy(plain.begin(), plain.end(), out.begin());

    std::array<std::uint8_t, bs> previous{};
    for (std::size_t off = 0; off < out.size(); off += bs) {
        std::span<std::uint8_t, bs> block(out.data() + off, bs);
        std::array<std::uint8_t, bs> current;
        std::copy(block.begin(), block.end(), current.begin());
        for (std::size_t i = 0; i < bs; ++i) block[i] ^= previous[i];
        cipher.encrypt_block(block);
        previous = current;
    }
    return out;
}

std::vector<std::uint8_t> chain_decrypt(const Blowfish& cipher, std::span<const std::uint8_t> encrypted) {
    constexpr auto bs = Blowfish::kBlockSize;
    if (encrypted.size() % bs != 0)
        throw std::invalid_argument("chained ciphertext is not a whole number of blocks");

    std::vector<std::uint8_t> out(encrypted.begin(), encrypted.end());
    std::array<std::uint8_t, bs> previous{};
    for (std::size_t off = 0; off < out.size(); off += bs) {
        std::span<std::uint8_t, bs> block(out.data() + off, bs);
        cipher.decrypt_block(block);
        for (std::size_t i = 0; i < bs; ++i) block[i] ^= previous[i];
        std::copy(block.begin(), block.end(), previous.begin());
    }
    return out;
}

}  // namespace wotchat::codec
