#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ipu {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
    return std::string(b.begin(), b.end());
}

std::string hex_encode(ByteView data);
Bytes hex_decode(std::string_view hex);  // throws std::invalid_argument on bad input

std::string base64_encode(ByteView data);
Bytes base64_decode(std::string_view text);  // throws std::invalid_argument on bad input

}  // namespace ipu
