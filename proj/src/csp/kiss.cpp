#include "ipu/csp/kiss.hpp"

namespace ipu::csp {

Bytes kiss_frame(ByteView payload) {
    Bytes out;
    out.reserve(payload.size() + 2);
    out.push_back(kFend);
    for (uint8_t b : payload) {
        if (b == kFend) {
            out.push_back(kFesc);
            out.push_back(kTfend);
        } else if (b == kFesc) {
            out.push_back(kFesc);
            out.push_back(kTfesc);
        } else {
            out.push_back(b);
        }
    }
    out.push_back(kFend);
    return out;
}

KissUnframed kiss_unframe(ByteView stream) {
    KissUnframed result;
    Bytes current;
    bool in_frame = false;
    bool escaped = false;
    size_t frame_start = 0;

    for (size_t i = 0; i < stream.size(); ++i) {
        uint8_t b = stream[i];
        if (!in_frame) {
            if (b == kFend) {
                in_frame = true;
                frame_start = i;
                current.clear();
                escaped = false;
            }
            continue;  // noise outside frames
        }
        if (escaped) {
            if (b == kTfend) {
                current.push_back(kFend);
            } else if (b == kTfesc) {
                current.push_back(kFesc);
            } else {
                // Invalid escape; keep the byte. The CRC layer above catches
                // genuine corruption.
                current.push_back(b);
            }
            escaped = false;
        } else if (b == kFesc) {
            escaped = true;
        } else if (b == kFend) {
            result.frames.push_back(std::move(current));
            current.clear();
            in_frame = false;
        } else {
            current.push_back(b);
        }
    }
    if (in_frame) {
        result.residual.assign(stream.begin() + frame_start, stream.end());
    }
    return result;
}

}  // namespace ipu::csp
