#pragma once

#include <vector>

#include "ipu/common/bytes.hpp"

namespace ipu::csp {

inline constexpr uint8_t kFend = 0xC0;
inline constexpr uint8_t kFesc = 0xDB;
inline constexpr uint8_t kTfend = 0xDC;
inline constexpr uint8_t kTfesc = 0xDD;

// FEND ++ escaped payload ++ FEND. In-payload FEND -> FESC TFEND,
// FESC -> FESC TFESC.
Bytes kiss_frame(ByteView payload);

struct KissUnframed {
    std::vector<Bytes> frames;
    Bytes residual;  // raw bytes of a trailing unterminated frame, if any
};

// Exact inverse of kiss_frame over a byte stream. Noise before the first FEND
// is discarded; an unterminated trailing frame (including a dangling escape)
// is returned as residual for the caller to prepend to the next read.
KissUnframed kiss_unframe(ByteView stream);

}  // namespace ipu::csp
