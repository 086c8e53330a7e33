#include "zlib_stream.hpp"

#include <zlib.h>

#include <array>
#include <stdexcept>

namespace wotchat::codec::detail {

std::vector<std::uint8_t> zlib_compress(std::span<const std::uint8_t> in) {
    uLongf bound = compressBound(static_cast<uLong>(in.size()));
    std::vector<std::uint8_t> out(bound);
    int rc = compress2(out.data(), &bound, in.data(), static_cast<uLong>(in.size()), Z_DEFAULT_COMPRESSION);
    if (rc != Z_OK) throw std::runtime_error("zlib compress2 failed");
    out.resize(bound);
    return out;
}

namespace {
struct InflateGuard {
    z_stream& s;
    ~InflateGuard() { inflateEnd(&s); }
};
}  // namespace

std::optional<InflateResult> zlib_inflate(std::span<const std::uint8_t> in, std::size_t limit, std::string& error) {
    z_stream strm{};
    strm.next_in = const_cast<Bytef*>(in.data());
    strm.avail_in = static_cast<uInt>(in.size());
    if (inflateInit(&strm) != Z_OK) {
        error = "inflateInit failed";
        return std::nullopt;
    }
    InflateGuard guard{strm};

    InflateResult result;
    std::array<std::uint8_t, 64 * 1024> chunk;
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        strm.next_out = chunk.data();
        strm.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&strm, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            error = strm.msg ? strm.msg : "inflate error " + std::to_string(rc);
            return std::nullopt;
        }
        std::size_t produced = chunk.size() - strm.avail_out;
        if (result.data.size() + produced > limit) {
            error = "inflated stream exceeds limit";
            return std::nullopt;
        }
        result.data.insert(result.data.end(), chunk.begin(), chunk.begin() + static_cast<std::ptrdiff_t>(produced));
        if (rc == Z_OK && produced == 0 && strm.avail_in == 0) {
            error = "zlib stream truncated";
            return std::nullopt;
        }
    }
    result.consumed = in.size() - strm.avail_in;
    return result;
}

}  // namespace wotchat::codec::detail
