#pragma once

#include <cstdint>

#include "ipu/common/bytes.hpp"

namespace ipu::csp {

// CRC-32, IEEE 802.3 polynomial 0x04C11DB7, reflected, init 0xFFFFFFFF,
// final xor 0xFFFFFFFF. crc32_of("123456789") == 0xCBF43926.
uint32_t crc32_of(ByteView data);

// Magic value of crc32 register after running over data ++ crc32(data) LE.
inline constexpr uint32_t kCrc32Residue = 0x2144DF1C;

// Streaming form for chunked files.
class Crc32 {
public:
    void update(ByteView data);
    uint32_t finish() const;

private:
    uint32_t reg_ = 0xFFFFFFFFu;
};

}  // namespace ipu::csp
