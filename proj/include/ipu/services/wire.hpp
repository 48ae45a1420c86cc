#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include "ipu/common/bytes.hpp"

namespace ipu::services {

// Service ports bound on a payload node, above the core ports 1-4.
inline constexpr uint8_t kPortFtp = 10;
inline constexpr uint8_t kPortInferenceTest = 11;
inline constexpr uint8_t kPortRayScan = 12;
inline constexpr uint8_t kPortWorkload = 13;
inline constexpr uint8_t kPortSlots = 14;

// Ground-side source port whose inbox collects service replies.
inline constexpr uint8_t kGroundServicePort = 20;

// One request and at most one reply per packet. Multi-byte integers are
// big-endian; strings and blobs carry an 8- or 16-bit length prefix. The
// first payload byte is the opcode, the first reply byte a WireStatus.
enum class WireStatus : uint8_t {
    Ok = 0,
    NotFound = 1,
    OutsideRoot = 2,
    Exists = 3,
    BadRequest = 4,
    NoSession = 5,
    CrcMismatch = 6,
    Incomplete = 7,
    TooLarge = 8,
    IoError = 9,
    UnknownWorkload = 10,
    Timeout = 11,
    Failed = 12,
};

const char* to_string(WireStatus s);

enum class FtpOp : uint8_t {
    UploadInit = 0x01,   // session u16 | chunk_size u32 | chunk_count u32 |
                         // total u64 | whole_crc u32 | name str8
                         // -> status | received_count u32
    UploadChunk = 0x02,  // session u16 | index u32 | data...   (no reply)
    UploadBitmap = 0x03, // session u16 | from u32
                         // -> status | from u32 | n_bits u16 | packed bits
    UploadFinish = 0x04, // session u16 -> status | missing u32 (on Incomplete)
    DownloadInit = 0x10, // session u16 | chunk_size u32 | name str8
                         // -> status | chunk_count u32 | total u64 | whole_crc u32
    DownloadChunk = 0x11,  // session u16 | index u32 -> status | index u32 | data
    DownloadDone = 0x12,   // session u16 -> status
    List = 0x20,           // path str8 -> status | json str16
    Move = 0x21,           // overwrite u8 | from str8 | to str8 -> status
    Copy = 0x22,           // overwrite u8 | from str8 | to str8 -> status
    Remove = 0x23,         // path str8 -> status
};

// The chunk header (op + session + index) must share one packet with the data.
inline constexpr uint32_t kMaxWireChunkSize = 1000;
// Bits per bitmap window reply; keeps the reply packet comfortably sized.
inline constexpr uint32_t kBitmapWindowBits = 4096;

enum class InferOp : uint8_t {
    Run = 0x01,  // batch_size u16
                 // -> status | pass u8 | digest u32 | latency_ms f64 | timestamp i64
};

enum class RayOp : uint8_t {
    Scan = 0x01,  // image path str8
                  // -> status | degenerate u8 | threshold u8 | cluster count u16
                  //    | report path str8
};

enum class WorkloadOp : uint8_t {
    Run = 0x01,  // entry str8 | args str8 | time_limit_s f64
                 // -> status | log str16 | output count u8 | output paths str8...
};

enum class SlotOp : uint8_t {
    Status = 0x01,   // -> status | table json str16
    Install = 0x02,  // slot u8 | bundle str8 -> status
    Confirm = 0x03,  // -> status | boot record json str16
};

// Big-endian serializer for wire payloads.
class WireWriter {
public:
    WireWriter& u8(uint8_t v);
    WireWriter& u16(uint16_t v);
    WireWriter& u32(uint32_t v);
    WireWriter& u64(uint64_t v);
    WireWriter& i64(int64_t v) { return u64(static_cast<uint64_t>(v)); }
    WireWriter& f64(double v) { return u64(std::bit_cast<uint64_t>(v)); }
    WireWriter& str8(std::string_view s);    // throws std::invalid_argument over 255
    WireWriter& str16(std::string_view s);   // throws std::invalid_argument over 65535
    WireWriter& raw(ByteView data);

    Bytes take() { return std::move(buf_); }
    size_t size() const { return buf_.size(); }

private:
    Bytes buf_;
};

// Bounds-checked cursor; any overrun latches failed() instead of throwing,
// so handlers can reject malformed requests with a status reply.
class WireReader {
public:
    explicit WireReader(ByteView data) : data_(data) {}

    uint8_t u8();
    uint16_t u16();
    uint32_t u32();
    uint64_t u64();
    int64_t i64() { return static_cast<int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str8();
    std::string str16();
    Bytes rest();

    bool failed() const { return failed_; }
    size_t remaining() const { return data_.size() - pos_; }

private:
    bool take(size_t n);

    ByteView data_;
    size_t pos_ = 0;
    bool failed_ = false;
};

}  // namespace ipu::services
