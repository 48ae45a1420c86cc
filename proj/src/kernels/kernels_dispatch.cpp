#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ipu/kernels/kernels.hpp"

namespace ipu::kernels {

bool avx2_available() {
#if defined(IPU_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

enum class Variant { Scalar, Avx2 };

Variant resolve_variant() {
    const char* env = std::getenv("IPU_SIMD");
    std::string mode = env ? env : "auto";
    if (mode == "scalar") return Variant::Scalar;
    if (mode == "avx2") {
        if (!avx2_available()) throw std::runtime_error("IPU_SIMD=avx2 but AVX2 is unavailable");
        return Variant::Avx2;
    }
    if (mode != "auto" && mode != "") throw std::runtime_error("IPU_SIMD must be auto, scalar, or avx2");
    return avx2_available() ? Variant::Avx2 : Variant::Scalar;
}

const Variant kVariant = resolve_variant();

}  // namespace

const std::string& active_variant() {
    static const std::string name = kVariant == Variant::Avx2 ? "avx2" : "scalar";
    return name;
}

#if defined(IPU_HAVE_AVX2)
#define IPU_DISPATCH(fn, ...) \
    return kVariant == Variant::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define IPU_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void scale_u8_to_unit(const uint8_t* src, float* dst, size_t n) {
    IPU_DISPATCH(scale_u8_to_unit, src, dst, n);
}

void quantize_u8(const float* src, uint8_t* dst, size_t n, float scale, int zero_point) {
    IPU_DISPATCH(quantize_u8, src, dst, n, scale, zero_point);
}

void dequantize_u8(const uint8_t* src, float* dst, size_t n, float scale, int zero_point) {
    IPU_DISPATCH(dequantize_u8, src, dst, n, scale, zero_point);
}

float dot_f32(const float* a, const float* b, size_t n) {
    IPU_DISPATCH(dot_f32, a, b, n);
}

int64_t dot_u8u8(const uint8_t* a, const uint8_t* b, size_t n) {
    IPU_DISPATCH(dot_u8u8, a, b, n);
}

uint64_t sum_u8(const uint8_t* src, size_t n) {
    IPU_DISPATCH(sum_u8, src, n);
}

void histogram256(const uint8_t* src, size_t n, uint32_t* out) {
    fast::histogram256(src, n, out);
}

void binarize_gt(const uint8_t* src, uint8_t* dst, size_t n, uint8_t threshold) {
    IPU_DISPATCH(binarize_gt, src, dst, n, threshold);
}

uint32_t crc32_update(uint32_t reg, const uint8_t* data, size_t n) {
    return fast::crc32_update(reg, data, n);
}

#undef IPU_DISPATCH

}  // namespace ipu::kernels
