#include "ipu/csp/sha1.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <stdexcept>

namespace ipu::csp {

Sha1::Sha1() : state_{0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u} {}

void Sha1::update(ByteView data) {
    total_bytes_ += data.size();
    size_t offset = 0;
    if (buffered_ > 0) {
        size_t take = std::min(kBlockSize - buffered_, data.size());
        std::memcpy(buffer_.data() + buffered_, data.data(), take);
        buffered_ += take;
        offset = take;
        if (buffered_ == kBlockSize) {
            process_block(buffer_.data());
            buffered_ = 0;
        }
    }
    while (offset + kBlockSize <= data.size()) {
        process_block(data.data() + offset);
        offset += kBlockSize;
    }
    if (offset < data.size()) {
        std::memcpy(buffer_.data(), data.data() + offset, data.size() - offset);
        buffered_ = data.size() - offset;
    }
}

std::array<uint8_t, Sha1::kDigestSize> Sha1::finish() {
    uint64_t bit_length = total_bytes_ * 8;
    uint8_t pad = 0x80;
    update(ByteView(&pad, 1));
    uint8_t zero = 0;
    while (buffered_ != 56) update(ByteView(&zero, 1));
    uint8_t len_be[8];
    for (int i = 0; i < 8; ++i) len_be[i] = uint8_t(bit_length >> (56 - 8 * i));
    update(ByteView(len_be, 8));

    std::array<uint8_t, kDigestSize> out;
    for (int i = 0; i < 5; ++i) {
        out[4 * i] = uint8_t(state_[i] >> 24);
        out[4 * i + 1] = uint8_t(state_[i] >> 16);
        out[4 * i + 2] = uint8_t(state_[i] >> 8);
        out[4 * i + 3] = uint8_t(state_[i]);
    }
    return out;
}

std::array<uint8_t, Sha1::kDigestSize> Sha1::digest(ByteView data) {
    Sha1 h;
    h.update(data);
    return h.finish();
}

void Sha1::process_block(const uint8_t* block) {
    uint32_t w[80];
    for (int t = 0; t < 16; ++t) {
        w[t] = uint32_t(block[4 * t]) << 24 | uint32_t(block[4 * t + 1]) << 16 |
               uint32_t(block[4 * t + 2]) << 8 | uint32_t(block[4 * t + 3]);
    }
    for (int t = 16; t < 80; ++t) {
        w[t] = std::rotl(w[t - 3] ^ w[t - 8] ^ w[t - 14] ^ w[t - 16], 1);
    }

    uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3], e = state_[4];
    for (int t = 0; t < 80; ++t) {
        uint32_t f, k;
        if (t < 20) {
            f = (b & c) | (~b & d);
            k = 0x5A827999u;
        } else if (t < 40) {
            f = b ^ c ^ d;
            k = 0x6ED9EBA1u;
        } else if (t < 60) {
            f = (b & c) | (b & d) | (c & d);
            k = 0x8F1BBCDCu;
        } else {
            f = b ^ c ^ d;
            k = 0xCA62C1D6u;
        }
        uint32_t temp = std::rotl(a, 5) + f + e + k + w[t];
        e = d;
        d = c;
        c = std::rotl(b, 30);
        b = a;
        a = temp;
    }
    state_[0] += a;
    state_[1] += b;
    state_[2] += c;
    state_[3] += d;
    state_[4] += e;
}

std::array<uint8_t, Sha1::kDigestSize> hmac_sha1(ByteView key, ByteView data) {
    std::array<uint8_t, Sha1::kBlockSize> padded{};
    if (key.size() > Sha1::kBlockSize) {
        auto hashed = Sha1::digest(key);
        std::memcpy(padded.data(), hashed.data(), hashed.size());
    } else {
        std::memcpy(padded.data(), key.data(), key.size());
    }

    std::array<uint8_t, Sha1::kBlockSize> ipad, opad;
    for (size_t i = 0; i < Sha1::kBlockSize; ++i) {
        ipad[i] = padded[i] ^ 0x36;
        opad[i] = padded[i] ^ 0x5C;
    }

    Sha1 inner;
    inner.update(ipad);
    inner.update(data);
    auto inner_digest = inner.finish();

    Sha1 outer;
    outer.update(opad);
    outer.update(inner_digest);
    return outer.finish();
}

std::array<uint8_t, 4> hmac_tag(ByteView key, ByteView data) {
    if (key.empty()) throw std::invalid_argument("HMAC key must be non-empty");
    auto full = hmac_sha1(key, data);
    return {full[0], full[1], full[2], full[3]};
}

}  // namespace ipu::csp
