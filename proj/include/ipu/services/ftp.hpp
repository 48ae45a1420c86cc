#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ipu/common/bytes.hpp"
#include "ipu/common/expected.hpp"

namespace ipu::services {

inline constexpr uint32_t kMinChunkSize = 64;

// Default chunk sizes per link regime: 200 bytes leaves generous headroom in
// one packet payload at 9600 bit/s; 1000 bytes is the largest round size that
// still fits the chunk header inside a single packet on the fast link.
inline constexpr uint32_t kChunkSizeSlowLink = 200;
inline constexpr uint32_t kChunkSizeFastLink = 1000;

// Describes one file split into fixed-size chunks, each integrity-checked
// individually, with a whole-file checksum verified before reassembly.
struct TransferManifest {
    std::string file_name;
    uint64_t total_bytes = 0;
    uint32_t chunk_size_bytes = 0;
    uint32_t chunk_count = 0;
    std::vector<uint32_t> per_chunk_crc32;
    uint32_t whole_file_crc32 = 0;

    // Throws std::invalid_argument on inconsistent fields.
    void validate() const;

    std::string to_json() const;
    static TransferManifest from_json(const std::string& text);
};

enum class JoinFault : uint8_t {
    MissingChunk,
    ChunkCrcMismatch,
    FileCrcMismatch,
};

const char* to_string(JoinFault f);

struct JoinError {
    JoinFault fault;
    uint32_t chunk_index = 0;  // meaningful for the per-chunk faults
};

struct SplitResult {
    TransferManifest manifest;
    std::vector<Bytes> chunks;
};

// Splits `file` into chunks of `chunk_size` bytes (the last chunk may be
// shorter, never empty). Throws std::invalid_argument if chunk_size < 64.
SplitResult ftp_split(ByteView file, uint32_t chunk_size, std::string file_name = "");

// Reassembles a file, verifying every chunk checksum and then the whole-file
// checksum. Absent entries report MissingChunk with the lowest such index.
Expected<Bytes, JoinError> ftp_join(const TransferManifest& manifest,
                                    const std::vector<std::optional<Bytes>>& chunks);

// Byte-packed received-chunk bitmap (LSB of byte 0 = chunk 0).
class ChunkBitmap {
public:
    ChunkBitmap() = default;
    explicit ChunkBitmap(uint32_t count) : count_(count), bits_((count + 7) / 8, 0) {}

    uint32_t count() const { return count_; }
    bool test(uint32_t i) const { return (bits_[i / 8] >> (i % 8)) & 1; }
    void set(uint32_t i) { bits_[i / 8] |= uint8_t(1u << (i % 8)); }
    bool all_set() const;
    uint32_t popcount() const;
    std::vector<uint32_t> missing() const;

    // Window extraction/merge for wire transport: `bit_count` bits starting
    // at `from`, packed LSB-first.
    Bytes window(uint32_t from, uint32_t bit_count) const;
    void merge_window(uint32_t from, uint32_t bit_count, ByteView packed);

    const Bytes& raw() const { return bits_; }
    void restore(uint32_t count, Bytes bits);

private:
    uint32_t count_ = 0;
    Bytes bits_;
};

enum class TransferState : uint8_t { Active, Complete, Aborted };
enum class TransferDirection : uint8_t { Up, Down };

const char* to_string(TransferState s);

// Receiver- or sender-side record of one chunked transfer in progress.
struct TransferSession {
    uint16_t session_id = 0;
    TransferDirection direction = TransferDirection::Up;
    TransferState state = TransferState::Active;
    TransferManifest manifest;
    ChunkBitmap received;
    Bytes data;  // assembled in place at chunk offsets

    std::string to_json() const;  // excludes `data`, persisted separately
    static TransferSession from_json(const std::string& text);
};

}  // namespace ipu::services
