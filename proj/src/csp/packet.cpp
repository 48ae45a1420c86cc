#include "ipu/csp/packet.hpp"

#include <cstring>
#include <stdexcept>

#include "ipu/csp/crc32.hpp"
#include "ipu/csp/sha1.hpp"

namespace ipu::csp {

const char* to_string(DecodeError e) {
    switch (e) {
        case DecodeError::ShortFrame: return "ShortFrame";
        case DecodeError::CrcMismatch: return "CrcMismatch";
        case DecodeError::AuthFailure: return "AuthFailure";
        case DecodeError::PayloadTooLong: return "PayloadTooLong";
        case DecodeError::MissingKey: return "MissingKey";
    }
    return "Unknown";
}

namespace {

uint32_t pack_header(const CspPacket& p) {
    return uint32_t(p.priority) << 30 | uint32_t(p.src_addr) << 24 |
           uint32_t(p.dst_addr) << 18 | uint32_t(p.dst_port) << 12 |
           uint32_t(p.src_port) << 6 | uint32_t(p.flags);
}

}  // namespace

Bytes encode_packet(const CspPacket& p, std::optional<ByteView> key) {
    if (p.priority > 3) throw std::invalid_argument("priority exceeds 2 bits");
    if (p.src_addr > kMaxAddress || p.dst_addr > kMaxAddress)
        throw std::invalid_argument("address exceeds 6 bits");
    if (p.src_port > 63 || p.dst_port > 63) throw std::invalid_argument("port exceeds 6 bits");
    if (p.flags & kFlagReservedMask) throw std::invalid_argument("reserved flag bits must be zero");
    if (p.payload.size() > kMaxPayload) throw std::invalid_argument("payload exceeds 1024 bytes");
    if (p.has_flag(kFlagHmac) && !key) throw std::invalid_argument("HMAC flag requires a key");

    Bytes out;
    out.reserve(kHeaderSize + p.payload.size() + 8);
    uint32_t header = pack_header(p);
    out.push_back(uint8_t(header >> 24));
    out.push_back(uint8_t(header >> 16));
    out.push_back(uint8_t(header >> 8));
    out.push_back(uint8_t(header));
    out.insert(out.end(), p.payload.begin(), p.payload.end());

    if (p.has_flag(kFlagHmac)) {
        auto tag = hmac_tag(*key, out);
        out.insert(out.end(), tag.begin(), tag.end());
    }
    if (p.has_flag(kFlagCrc)) {
        uint32_t crc = crc32_of(out);
        out.push_back(uint8_t(crc));
        out.push_back(uint8_t(crc >> 8));
        out.push_back(uint8_t(crc >> 16));
        out.push_back(uint8_t(crc >> 24));
    }
    return out;
}

Expected<CspPacket, DecodeError> decode_packet(ByteView frame, std::optional<ByteView> key) {
    if (frame.size() < kHeaderSize) return DecodeError::ShortFrame;

    uint32_t header = uint32_t(frame[0]) << 24 | uint32_t(frame[1]) << 16 |
                      uint32_t(frame[2]) << 8 | uint32_t(frame[3]);
    CspPacket p;
    p.priority = uint8_t(header >> 30 & 0x03);
    p.src_addr = uint8_t(header >> 24 & 0x3F);
    p.dst_addr = uint8_t(header >> 18 & 0x3F);
    p.dst_port = uint8_t(header >> 12 & 0x3F);
    p.src_port = uint8_t(header >> 6 & 0x3F);
    p.flags = uint8_t(header & 0x3F);

    size_t end = frame.size();

    if (p.has_flag(kFlagCrc)) {
        if (end < kHeaderSize + 4) return DecodeError::ShortFrame;
        uint32_t stored = uint32_t(frame[end - 4]) | uint32_t(frame[end - 3]) << 8 |
                          uint32_t(frame[end - 2]) << 16 | uint32_t(frame[end - 1]) << 24;
        if (crc32_of(frame.subspan(0, end - 4)) != stored) return DecodeError::CrcMismatch;
        end -= 4;
    }
    if (p.has_flag(kFlagHmac)) {
        if (!key) return DecodeError::MissingKey;
        if (end < kHeaderSize + 4) return DecodeError::ShortFrame;
        auto expected = hmac_tag(*key, frame.subspan(0, end - 4));
        if (std::memcmp(expected.data(), frame.data() + end - 4, 4) != 0)
            return DecodeError::AuthFailure;
        end -= 4;
    }

    if (end - kHeaderSize > kMaxPayload) return DecodeError::PayloadTooLong;
    p.payload.assign(frame.begin() + kHeaderSize, frame.begin() + end);
    return p;
}

}  // namespace ipu::csp
