#pragma once

#include <array>
#include <cstdint>

#include "ipu/common/bytes.hpp"

namespace ipu::csp {

// SHA-1 per RFC 3174. Used only for the 4-byte HMAC auth trailer.
class Sha1 {
public:
    static constexpr size_t kDigestSize = 20;
    static constexpr size_t kBlockSize = 64;

    Sha1();
    void update(ByteView data);
    std::array<uint8_t, kDigestSize> finish();

    static std::array<uint8_t, kDigestSize> digest(ByteView data);

private:
    void process_block(const uint8_t* block);

    std::array<uint32_t, 5> state_;
    std::array<uint8_t, kBlockSize> buffer_;
    size_t buffered_ = 0;
    uint64_t total_bytes_ = 0;
};

std::array<uint8_t, Sha1::kDigestSize> hmac_sha1(ByteView key, ByteView data);

// First 4 bytes of HMAC-SHA1(key, data). Throws std::invalid_argument on an
// empty key.
std::array<uint8_t, 4> hmac_tag(ByteView key, ByteView data);

}  // namespace ipu::csp
