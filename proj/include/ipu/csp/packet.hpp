#pragma once

#include <cstdint>
#include <optional>

#include "ipu/common/bytes.hpp"
#include "ipu/common/expected.hpp"

namespace ipu::csp {

// Flag bits within the 6-bit header field, MSB-first:
// HMAC, CRC, FRAG, ACKREQ, reserved, reserved.
enum PacketFlags : uint8_t {
    kFlagHmac = 0x20,
    kFlagCrc = 0x10,
    kFlagFrag = 0x08,
    kFlagAckReq = 0x04,
    kFlagReservedMask = 0x03,
};

inline constexpr size_t kMaxPayload = 1024;
inline constexpr size_t kHeaderSize = 4;
inline constexpr uint8_t kMaxAddress = 63;
inline constexpr uint8_t kMaxPort = 63;

// Addressed, flagged datagram; the unit of all satellite<->ground traffic.
// Wire header is one 32-bit big-endian word, MSB-first fields:
// priority(2) | src_addr(6) | dst_addr(6) | dst_port(6) | src_port(6) | flags(6).
struct CspPacket {
    uint8_t priority = 0;  // 0..3
    uint8_t src_addr = 0;  // 0..63
    uint8_t dst_addr = 0;
    uint8_t dst_port = 0;
    uint8_t src_port = 0;
    uint8_t flags = 0;
    Bytes payload;

    bool has_flag(uint8_t f) const { return (flags & f) != 0; }
    bool operator==(const CspPacket&) const = default;
};

enum class DecodeError {
    ShortFrame,      // fewer bytes than the header + flagged trailers require
    CrcMismatch,     // corruption
    AuthFailure,     // tampering or key mismatch
    PayloadTooLong,  // payload exceeds kMaxPayload
    MissingKey,      // HMAC flag set but no key supplied
};

const char* to_string(DecodeError e);

// Header ++ payload ++ [4-byte HMAC-SHA1 tag over header+payload] ++
// [4-byte little-endian CRC32 over everything preceding it].
// Throws std::invalid_argument on field overflow, oversized payload, or an
// HMAC flag without a key.
Bytes encode_packet(const CspPacket& p, std::optional<ByteView> key = std::nullopt);

Expected<CspPacket, DecodeError> decode_packet(ByteView frame,
                                               std::optional<ByteView> key = std::nullopt);

}  // namespace ipu::csp
