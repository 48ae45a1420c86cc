#pragma once

#include <array>
#include <cstdint>

namespace ipu::kernels::detail {

// Reflected CRC-32 (polynomial 0x04C11DB7, reflected form 0xEDB88320).
// Table 0 drives the bytewise reference; tables 1..7 the slicing-by-8 path.
constexpr std::array<std::array<uint32_t, 256>, 8> make_crc32_tables() {
    std::array<std::array<uint32_t, 256>, 8> t{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c >> 1) ^ ((c & 1) ? 0xEDB88320u : 0u);
        t[0][i] = c;
    }
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = t[0][i];
        for (size_t s = 1; s < 8; ++s) {
            c = t[0][c & 0xFF] ^ (c >> 8);
            t[s][i] = c;
        }
    }
    return t;
}

inline constexpr auto kCrc32Tables = make_crc32_tables();

}  // namespace ipu::kernels::detail
