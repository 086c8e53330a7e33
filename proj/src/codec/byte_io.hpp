#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

namespace wotchat::codec::detail {

inline std::uint64_t read_le(std::span<const std::uint8_t> in, std::size_t offset, std::size_t width) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v |= std::uint64_t{in[offset + i]} << (8 * i);
    return v;
}

inline std::uint32_t read_u32(std::span<const std::uint8_t> in, std::size_t offset) {
    return static_cast<std::uint32_t>(read_le(in, offset, 4));
}

inline float read_f32(std::span<const std::uint8_t> in, std::size_t offset) {
    return std::bit_cast<float>(read_u32(in, offset));
}

inline void write_le(std::span<std::uint8_t> out, std::size_t offset, std::uint64_t v, std::size_t width) {
    for (std::size_t i = 0; i < width; ++i) out[offset + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void append_f32(std::vector<std::uint8_t>& out, float v) { append_u32(out, std::bit_cast<std::uint32_t>(v)); }

}  // namespace wotchat::codec::detail
