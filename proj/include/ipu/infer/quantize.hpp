#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ipu::infer {

// Per-tensor affine 8-bit quantization: x ~ scale * (q - zero_point).
struct QuantizedTensor {
    std::vector<uint8_t> values;
    float scale = 1.0f;
    int zero_point = 0;
    std::vector<size_t> shape;

    size_t size() const { return values.size(); }
};

// scale = (max-min)/255, zero_point = round(-min/scale) clamped to [0,255].
// A constant tensor degenerates to scale 1 with the zero point placed so the
// constant round-trips exactly. Throws std::invalid_argument on NaN/Inf
// input. Round-trip error is <= scale/2 elementwise.
QuantizedTensor quantize_affine(std::span<const float> values,
                                std::vector<size_t> shape = {});

std::vector<float> dequantize(const QuantizedTensor& q);

}  // namespace ipu::infer
