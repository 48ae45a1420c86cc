#include "ipu/kernels/kernels.hpp"

#if defined(IPU_HAVE_AVX2)

#include <immintrin.h>

#include <algorithm>

namespace ipu::kernels::avx2 {

void scale_u8_to_unit(const uint8_t* src, float* dst, size_t n) {
    const __m256 inv256 = _mm256_set1_ps(1.0f / 256.0f);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m128i bytes = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(src + i));
        __m256 v = _mm256_cvtepi32_ps(_mm256_cvtepu8_epi32(bytes));
        _mm256_storeu_ps(dst + i, _mm256_mul_ps(v, inv256));
    }
    scalar::scale_u8_to_unit(src + i, dst + i, n - i);
}

void quantize_u8(const float* src, uint8_t* dst, size_t n, float scale, int zero_point) {
    const __m256 vscale = _mm256_set1_ps(scale);
    const __m256i vzp = _mm256_set1_epi32(zero_point);
    const __m256i vzero = _mm256_setzero_si256();
    const __m256i vmax = _mm256_set1_epi32(255);
    const __m256i lane_fix = _mm256_setr_epi32(0, 4, 1, 5, 2, 6, 3, 7);
    size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        __m256i q[4];
        for (int k = 0; k < 4; ++k) {
            __m256 x = _mm256_loadu_ps(src + i + 8 * k);
            // div (not reciprocal mul) and cvtps round-half-even keep this
            // bit-identical to the scalar reference.
            __m256i v = _mm256_cvtps_epi32(_mm256_div_ps(x, vscale));
            v = _mm256_add_epi32(v, vzp);
            q[k] = _mm256_min_epi32(_mm256_max_epi32(v, vzero), vmax);
        }
        __m256i p01 = _mm256_packs_epi32(q[0], q[1]);
        __m256i p23 = _mm256_packs_epi32(q[2], q[3]);
        __m256i packed = _mm256_packus_epi16(p01, p23);
        packed = _mm256_permutevar8x32_epi32(packed, lane_fix);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), packed);
    }
    scalar::quantize_u8(src + i, dst + i, n - i, scale, zero_point);
}

void dequantize_u8(const uint8_t* src, float* dst, size_t n, float scale, int zero_point) {
    const __m256 vscale = _mm256_set1_ps(scale);
    const __m256i vzp = _mm256_set1_epi32(zero_point);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m128i bytes = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(src + i));
        __m256i v = _mm256_sub_epi32(_mm256_cvtepu8_epi32(bytes), vzp);
        _mm256_storeu_ps(dst + i, _mm256_mul_ps(_mm256_cvtepi32_ps(v), vscale));
    }
    scalar::dequantize_u8(src + i, dst + i, n - i, scale, zero_point);
}

namespace {

float hsum(__m256 v) {
    __m128 s = _mm_add_ps(_mm256_castps256_ps128(v), _mm256_extractf128_ps(v, 1));
    s = _mm_add_ps(s, _mm_movehl_ps(s, s));
    s = _mm_add_ss(s, _mm_movehdup_ps(s));
    return _mm_cvtss_f32(s);
}

int64_t hsum_i32_to_i64(__m256i v) {
    alignas(32) int32_t lanes[8];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), v);
    int64_t total = 0;
    for (int32_t x : lanes) total += x;
    return total;
}

}  // namespace

float dot_f32(const float* a, const float* b, size_t n) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    __m256 acc2 = _mm256_setzero_ps();
    __m256 acc3 = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
        acc2 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 16), _mm256_loadu_ps(b + i + 16), acc2);
        acc3 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 24), _mm256_loadu_ps(b + i + 24), acc3);
    }
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    }
    float total = hsum(_mm256_add_ps(_mm256_add_ps(acc0, acc1), _mm256_add_ps(acc2, acc3)));
    for (; i < n; ++i) total += a[i] * b[i];
    return total;
}

int64_t dot_u8u8(const uint8_t* a, const uint8_t* b, size_t n) {
    // madd accumulates pairs of u8*u8 products (<= 130050 per lane step), so
    // an i32 lane stays safe for >16k steps; spill to i64 well before that.
    constexpr size_t kBlockBytes = 8192 * 16;
    int64_t total = 0;
    size_t i = 0;
    while (i + 16 <= n) {
        size_t block_end = i + std::min((n - i) / 16 * 16, kBlockBytes);
        __m256i acc = _mm256_setzero_si256();
        for (; i + 16 <= block_end; i += 16) {
            __m256i va = _mm256_cvtepu8_epi16(_mm_loadu_si128(reinterpret_cast<const __m128i*>(a + i)));
            __m256i vb = _mm256_cvtepu8_epi16(_mm_loadu_si128(reinterpret_cast<const __m128i*>(b + i)));
            acc = _mm256_add_epi32(acc, _mm256_madd_epi16(va, vb));
        }
        total += hsum_i32_to_i64(acc);
    }
    for (; i < n; ++i) total += int32_t(a[i]) * int32_t(b[i]);
    return total;
}

uint64_t sum_u8(const uint8_t* src, size_t n) {
    __m256i acc = _mm256_setzero_si256();
    const __m256i zero = _mm256_setzero_si256();
    size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        acc = _mm256_add_epi64(acc, _mm256_sad_epu8(v, zero));
    }
    alignas(32) uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
    uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) total += src[i];
    return total;
}

void binarize_gt(const uint8_t* src, uint8_t* dst, size_t n, uint8_t threshold) {
    const __m256i bias = _mm256_set1_epi8(char(0x80));
    const __m256i vthr = _mm256_xor_si256(_mm256_set1_epi8(char(threshold)), bias);
    const __m256i one = _mm256_set1_epi8(1);
    size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        __m256i gt = _mm256_cmpgt_epi8(_mm256_xor_si256(v, bias), vthr);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_and_si256(gt, one));
    }
    scalar::binarize_gt(src + i, dst + i, n - i, threshold);
}

}  // namespace ipu::kernels::avx2

#endif  // IPU_HAVE_AVX2
