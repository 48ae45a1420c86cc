#include <algorithm>
#include <cmath>

#include "crc32_tables.hpp"
#include "ipu/kernels/kernels.hpp"

namespace ipu::kernels::scalar {

void scale_u8_to_unit(const uint8_t* src, float* dst, size_t n) {
    constexpr float kInv256 = 1.0f / 256.0f;
    for (size_t i = 0; i < n; ++i) dst[i] = float(src[i]) * kInv256;
}

void quantize_u8(const float* src, uint8_t* dst, size_t n, float scale, int zero_point) {
    // rintf rounds half-to-even in the default FP environment, matching the
    // AVX2 cvtps_epi32 rounding mode.
    for (size_t i = 0; i < n; ++i) {
        long q = std::lrintf(src[i] / scale) + zero_point;
        dst[i] = uint8_t(std::clamp(q, 0L, 255L));
    }
}

void dequantize_u8(const uint8_t* src, float* dst, size_t n, float scale, int zero_point) {
    for (size_t i = 0; i < n; ++i) dst[i] = float(int(src[i]) - zero_point) * scale;
}

float dot_f32(const float* a, const float* b, size_t n) {
    float acc = 0.0f;
    for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

int64_t dot_u8u8(const uint8_t* a, const uint8_t* b, size_t n) {
    int64_t acc = 0;
    for (size_t i = 0; i < n; ++i) acc += int32_t(a[i]) * int32_t(b[i]);
    return acc;
}

uint64_t sum_u8(const uint8_t* src, size_t n) {
    uint64_t acc = 0;
    for (size_t i = 0; i < n; ++i) acc += src[i];
    return acc;
}

void histogram256(const uint8_t* src, size_t n, uint32_t* out) {
    for (size_t i = 0; i < n; ++i) ++out[src[i]];
}

void binarize_gt(const uint8_t* src, uint8_t* dst, size_t n, uint8_t threshold) {
    for (size_t i = 0; i < n; ++i) dst[i] = src[i] > threshold ? 1 : 0;
}

uint32_t crc32_update(uint32_t reg, const uint8_t* data, size_t n) {
    const auto& table = detail::kCrc32Tables[0];
    for (size_t i = 0; i < n; ++i) reg = table[(reg ^ data[i]) & 0xFF] ^ (reg >> 8);
    return reg;
}

}  // namespace ipu::kernels::scalar

namespace ipu::kernels::fast {

uint32_t crc32_update(uint32_t reg, const uint8_t* data, size_t n) {
    const auto& t = detail::kCrc32Tables;
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        reg ^= uint32_t(data[i]) | uint32_t(data[i + 1]) << 8 |
               uint32_t(data[i + 2]) << 16 | uint32_t(data[i + 3]) << 24;
        reg = t[7][reg & 0xFF] ^ t[6][(reg >> 8) & 0xFF] ^
              t[5][(reg >> 16) & 0xFF] ^ t[4][reg >> 24] ^
              t[3][data[i + 4]] ^ t[2][data[i + 5]] ^
              t[1][data[i + 6]] ^ t[0][data[i + 7]];
    }
    return scalar::crc32_update(reg, data + i, n - i);
}

void histogram256(const uint8_t* src, size_t n, uint32_t* out) {
    // Four interleaved sub-histograms break the store-to-load dependency on
    // runs of equal bytes; merged at the end.
    uint32_t h0[256] = {0}, h1[256] = {0}, h2[256] = {0}, h3[256] = {0};
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        ++h0[src[i]];
        ++h1[src[i + 1]];
        ++h2[src[i + 2]];
        ++h3[src[i + 3]];
    }
    for (; i < n; ++i) ++h0[src[i]];
    for (int v = 0; v < 256; ++v) out[v] += h0[v] + h1[v] + h2[v] + h3[v];
}

}  // namespace ipu::kernels::fast
