#include "ipu/services/wire.hpp"

#include <stdexcept>

namespace ipu::services {

const char* to_string(WireStatus s) {
    switch (s) {
        case WireStatus::Ok: return "Ok";
        case WireStatus::NotFound: return "NotFound";
        case WireStatus::OutsideRoot: return "OutsideRoot";
        case WireStatus::Exists: return "Exists";
        case WireStatus::BadRequest: return "BadRequest";
        case WireStatus::NoSession: return "NoSession";
        case WireStatus::CrcMismatch: return "CrcMismatch";
        case WireStatus::Incomplete: return "Incomplete";
        case WireStatus::TooLarge: return "TooLarge";
        case WireStatus::IoError: return "IoError";
        case WireStatus::UnknownWorkload: return "UnknownWorkload";
        case WireStatus::Timeout: return "Timeout";
        case WireStatus::Failed: return "Failed";
    }
    return "?";
}

WireWriter& WireWriter::u8(uint8_t v) {
    buf_.push_back(v);
    return *this;
}

WireWriter& WireWriter::u16(uint16_t v) {
    buf_.push_back(uint8_t(v >> 8));
    buf_.push_back(uint8_t(v));
    return *this;
}

WireWriter& WireWriter::u32(uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) buf_.push_back(uint8_t(v >> s));
    return *this;
}

WireWriter& WireWriter::u64(uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) buf_.push_back(uint8_t(v >> s));
    return *this;
}

WireWriter& WireWriter::str8(std::string_view s) {
    if (s.size() > 255) throw std::invalid_argument("wire: string over 255 bytes");
    u8(uint8_t(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
    return *this;
}

WireWriter& WireWriter::str16(std::string_view s) {
    if (s.size() > 65535) throw std::invalid_argument("wire: string over 64 KiB");
    u16(uint16_t(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
    return *this;
}

WireWriter& WireWriter::raw(ByteView data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
    return *this;
}

bool WireReader::take(size_t n) {
    if (failed_ || data_.size() - pos_ < n) {
        failed_ = true;
        return false;
    }
    return true;
}

uint8_t WireReader::u8() {
    if (!take(1)) return 0;
    return data_[pos_++];
}

uint16_t WireReader::u16() {
    if (!take(2)) return 0;
    uint16_t v = uint16_t(data_[pos_] << 8 | data_[pos_ + 1]);
    pos_ += 2;
    return v;
}

uint32_t WireReader::u32() {
    if (!take(4)) return 0;
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_ + i];
    pos_ += 4;
    return v;
}

uint64_t WireReader::u64() {
    if (!take(8)) return 0;
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_ + i];
    pos_ += 8;
    return v;
}

std::string WireReader::str8() {
    const size_t len = u8();
    if (!take(len)) return {};
    std::string s(data_.begin() + pos_, data_.begin() + pos_ + len);
    pos_ += len;
    return s;
}

std::string WireReader::str16() {
    const size_t len = u16();
    if (!take(len)) return {};
    std::string s(data_.begin() + pos_, data_.begin() + pos_ + len);
    pos_ += len;
    return s;
}

Bytes WireReader::rest() {
    if (failed_) return {};
    Bytes out(data_.begin() + pos_, data_.end());
    pos_ = data_.size();
    return out;
}

}  // namespace ipu::services
