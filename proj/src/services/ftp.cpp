#include "ipu/services/ftp.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "ipu/csp/crc32.hpp"
#include "json.hpp"

namespace ipu::services {

using nlohmann::json;

const char* to_string(JoinFault f) {
    switch (f) {
        case JoinFault::MissingChunk: return "MissingChunk";
        case JoinFault::ChunkCrcMismatch: return "ChunkCrcMismatch";
        case JoinFault::FileCrcMismatch: return "FileCrcMismatch";
    }
    return "?";
}

const char* to_string(TransferState s) {
    switch (s) {
        case TransferState::Active: return "Active";
        case TransferState::Complete: return "Complete";
        case TransferState::Aborted: return "Aborted";
    }
    return "?";
}

void TransferManifest::validate() const {
    if (chunk_size_bytes < kMinChunkSize) {
        throw std::invalid_argument("manifest: chunk size below minimum");
    }
    const uint64_t expect =
        total_bytes == 0 ? 0 : (total_bytes + chunk_size_bytes - 1) / chunk_size_bytes;
    if (chunk_count != expect) {
        throw std::invalid_argument("manifest: chunk count does not match file size");
    }
    if (per_chunk_crc32.size() != chunk_count) {
        throw std::invalid_argument("manifest: per-chunk checksum list length mismatch");
    }
}

std::string TransferManifest::to_json() const {
    json j;
    j["file_name"] = file_name;
    j["total_bytes"] = total_bytes;
    j["chunk_size_bytes"] = chunk_size_bytes;
    j["chunk_count"] = chunk_count;
    j["per_chunk_crc32"] = per_chunk_crc32;
    j["whole_file_crc32"] = whole_file_crc32;
    return j.dump(2);
}

TransferManifest TransferManifest::from_json(const std::string& text) {
    TransferManifest m;
    try {
        json j = json::parse(text);
        m.file_name = j.at("file_name").get<std::string>();
        m.total_bytes = j.at("total_bytes").get<uint64_t>();
        m.chunk_size_bytes = j.at("chunk_size_bytes").get<uint32_t>();
        m.chunk_count = j.at("chunk_count").get<uint32_t>();
        m.per_chunk_crc32 = j.at("per_chunk_crc32").get<std::vector<uint32_t>>();
        m.whole_file_crc32 = j.at("whole_file_crc32").get<uint32_t>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("manifest JSON: ") + e.what());
    }
    m.validate();
    return m;
}

SplitResult ftp_split(ByteView file, uint32_t chunk_size, std::string file_name) {
    if (chunk_size < kMinChunkSize) {
        throw std::invalid_argument("ftp_split: chunk size below 64 bytes");
    }
    SplitResult out;
    out.manifest.file_name = std::move(file_name);
    out.manifest.total_bytes = file.size();
    out.manifest.chunk_size_bytes = chunk_size;
    out.manifest.whole_file_crc32 = csp::crc32_of(file);
    for (size_t off = 0; off < file.size(); off += chunk_size) {
        const size_t len = std::min<size_t>(chunk_size, file.size() - off);
        ByteView piece = file.subspan(off, len);
        out.manifest.per_chunk_crc32.push_back(csp::crc32_of(piece));
        out.chunks.emplace_back(piece.begin(), piece.end());
    }
    out.manifest.chunk_count = static_cast<uint32_t>(out.chunks.size());
    return out;
}

Expected<Bytes, JoinError> ftp_join(const TransferManifest& manifest,
                                    const std::vector<std::optional<Bytes>>& chunks) {
    manifest.validate();
    if (chunks.size() != manifest.chunk_count) {
        const uint32_t first_absent = static_cast<uint32_t>(chunks.size());
        return JoinError{JoinFault::MissingChunk, first_absent};
    }
    for (uint32_t i = 0; i < manifest.chunk_count; ++i) {
        if (!chunks[i].has_value()) return JoinError{JoinFault::MissingChunk, i};
        const Bytes& c = *chunks[i];
        const uint64_t expect_len =
            i + 1 < manifest.chunk_count
                ? manifest.chunk_size_bytes
                : manifest.total_bytes - uint64_t{i} * manifest.chunk_size_bytes;
        if (c.size() != expect_len || csp::crc32_of(c) != manifest.per_chunk_crc32[i]) {
            return JoinError{JoinFault::ChunkCrcMismatch, i};
        }
    }
    Bytes file;
    file.reserve(manifest.total_bytes);
    for (const auto& c : chunks) file.insert(file.end(), c->begin(), c->end());
    if (csp::crc32_of(file) != manifest.whole_file_crc32) {
        return JoinError{JoinFault::FileCrcMismatch, 0};
    }
    return file;
}

bool ChunkBitmap::all_set() const { return popcount() == count_; }

uint32_t ChunkBitmap::popcount() const {
    uint32_t n = 0;
    for (uint32_t i = 0; i < count_; ++i) n += test(i);
    return n;
}

std::vector<uint32_t> ChunkBitmap::missing() const {
    std::vector<uint32_t> out;
    for (uint32_t i = 0; i < count_; ++i) {
        if (!test(i)) out.push_back(i);
    }
    return out;
}

Bytes ChunkBitmap::window(uint32_t from, uint32_t bit_count) const {
    Bytes out((bit_count + 7) / 8, 0);
    for (uint32_t i = 0; i < bit_count; ++i) {
        const uint32_t bit = from + i;
        if (bit < count_ && test(bit)) out[i / 8] |= uint8_t(1u << (i % 8));
    }
    return out;
}

void ChunkBitmap::merge_window(uint32_t from, uint32_t bit_count, ByteView packed) {
    for (uint32_t i = 0; i < bit_count; ++i) {
        const uint32_t bit = from + i;
        if (bit >= count_) break;
        if (i / 8 < packed.size() && ((packed[i / 8] >> (i % 8)) & 1)) set(bit);
    }
}

void ChunkBitmap::restore(uint32_t count, Bytes bits) {
    if (bits.size() != (count + 7u) / 8) {
        throw std::invalid_argument("bitmap: stored bits do not match chunk count");
    }
    count_ = count;
    bits_ = std::move(bits);
}

std::string TransferSession::to_json() const {
    json j;
    j["session_id"] = session_id;
    j["direction"] = direction == TransferDirection::Up ? "up" : "down";
    j["state"] = to_string(state);
    j["manifest"] = json::parse(manifest.to_json());
    j["received_bits"] = base64_encode(received.raw());
    return j.dump(2);
}

TransferSession TransferSession::from_json(const std::string& text) {
    TransferSession s;
    try {
        json j = json::parse(text);
        s.session_id = j.at("session_id").get<uint16_t>();
        s.direction =
            j.at("direction").get<std::string>() == "up" ? TransferDirection::Up
                                                         : TransferDirection::Down;
        const std::string state = j.at("state").get<std::string>();
        s.state = state == "Complete"  ? TransferState::Complete
                  : state == "Aborted" ? TransferState::Aborted
                                       : TransferState::Active;
        s.manifest = TransferManifest::from_json(j.at("manifest").dump());
        s.received.restore(s.manifest.chunk_count,
                           base64_decode(j.at("received_bits").get<std::string>()));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("session JSON: ") + e.what());
    }
    return s;
}

}  // namespace ipu::services
