#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wotchat {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::string to_upper_ascii(std::string_view s);

// `key = value` lines; blank lines and lines starting with '#' are skipped.
// Throws std::invalid_argument naming `what` on a line without '='.
std::vector<std::pair<std::string, std::string>> parse_key_value(std::string_view text, std::string_view what);

std::string encode_hex(std::span<const std::uint8_t> bytes);
std::optional<std::vector<std::uint8_t>> decode_hex(std::string_view hex);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

// RFC 4180 field quoting.
std::string csv_field(std::string_view s);

// Shortest decimal form that round-trips.
std::string format_number(double v);
std::string format_number(float v);

// ISO-8601 UTC timestamp for the current time, second precision.
std::string utc_now_iso8601();

}  // namespace wotchat
