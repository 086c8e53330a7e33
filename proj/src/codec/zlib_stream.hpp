#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wotchat::codec::detail {

std::vector<std::uint8_t> zlib_compress(std::span<const std::uint8_t> in);

struct InflateResult {
    std::vector<std::uint8_t> data;
    std::size_t consumed = 0;  // input bytes up to the end of the zlib stream
};

// Returns nullopt with `error` filled when the input is not one complete zlib
// stream or inflates beyond `limit` bytes.
std::optional<InflateResult> zlib_inflate(std::span<const std::uint8_t> in, std::size_t limit, std::string& error);

}  // namespace wotchat::codec::detail
