#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Data-parallel primitives behind the hot loops: tile scaling, affine
// quantization, dot products for the classifier backends, histogramming and
// binarization for image analysis, and CRC32.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The top-level functions dispatch once at startup based on runtime
// CPU detection; the IPU_SIMD environment variable (auto|scalar|avx2) forces
// a path. Variants are equivalence-tested against the scalar reference:
// integer kernels and the elementwise float kernels match bit-exactly, the
// reducing float kernel (dot_f32) matches within accumulation-order error.

namespace ipu::kernels {

// Active dispatch target, e.g. "scalar" or "avx2". Resolved once.
const std::string& active_variant();
bool avx2_available();

// v -> v / 256.0f, guaranteeing outputs in [0, 1).
void scale_u8_to_unit(const uint8_t* src, float* dst, size_t n);

// q = clamp(rint(x / scale) + zero_point, 0, 255). Round-half-even in every
// variant, so results are bit-identical across paths.
void quantize_u8(const float* src, uint8_t* dst, size_t n, float scale, int zero_point);

// x = (q - zero_point) * scale.
void dequantize_u8(const uint8_t* src, float* dst, size_t n, float scale, int zero_point);

float dot_f32(const float* a, const float* b, size_t n);

// Widening dot product of two unsigned byte vectors, exact in int64.
int64_t dot_u8u8(const uint8_t* a, const uint8_t* b, size_t n);

uint64_t sum_u8(const uint8_t* src, size_t n);

// out[v] = count of bytes equal to v. Caller provides 256 slots; not cleared.
void histogram256(const uint8_t* src, size_t n, uint32_t* out);

// dst[i] = src[i] > threshold ? 1 : 0 (unsigned compare).
void binarize_gt(const uint8_t* src, uint8_t* dst, size_t n, uint8_t threshold);

// CRC-32 (IEEE, reflected) register update; init/final-xor handled by callers.
uint32_t crc32_update(uint32_t reg, const uint8_t* data, size_t n);

// Scalar reference implementations (always built; the oracle side of every
// equivalence test).
namespace scalar {
void scale_u8_to_unit(const uint8_t* src, float* dst, size_t n);
void quantize_u8(const float* src, uint8_t* dst, size_t n, float scale, int zero_point);
void dequantize_u8(const uint8_t* src, float* dst, size_t n, float scale, int zero_point);
float dot_f32(const float* a, const float* b, size_t n);
int64_t dot_u8u8(const uint8_t* a, const uint8_t* b, size_t n);
uint64_t sum_u8(const uint8_t* src, size_t n);
void histogram256(const uint8_t* src, size_t n, uint32_t* out);
void binarize_gt(const uint8_t* src, uint8_t* dst, size_t n, uint8_t threshold);
uint32_t crc32_update(uint32_t reg, const uint8_t* data, size_t n);
}  // namespace scalar

#if defined(IPU_HAVE_AVX2)
namespace avx2 {
void scale_u8_to_unit(const uint8_t* src, float* dst, size_t n);
void quantize_u8(const float* src, uint8_t* dst, size_t n, float scale, int zero_point);
void dequantize_u8(const uint8_t* src, float* dst, size_t n, float scale, int zero_point);
float dot_f32(const float* a, const float* b, size_t n);
int64_t dot_u8u8(const uint8_t* a, const uint8_t* b, size_t n);
uint64_t sum_u8(const uint8_t* src, size_t n);
void binarize_gt(const uint8_t* src, uint8_t* dst, size_t n, uint8_t threshold);
}  // namespace avx2
#endif

// Feature-independent fast variants, dispatched and tested like the SIMD ones.
namespace fast {
uint32_t crc32_update(uint32_t reg, const uint8_t* data, size_t n);  // slicing-by-8
void histogram256(const uint8_t* src, size_t n, uint32_t* out);      // 4-way sub-histograms
}  // namespace fast

}  // namespace ipu::kernels
