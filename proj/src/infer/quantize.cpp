#include "ipu/infer/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ipu/kernels/kernels.hpp"

namespace ipu::infer {

QuantizedTensor quantize_affine(std::span<const float> values, std::vector<size_t> shape) {
    QuantizedTensor q;
    q.shape = std::move(shape);
    if (values.empty()) return q;

    float lo = values[0], hi = values[0];
    for (float v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("quantize_affine: non-finite input");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    if (lo == hi) {
        // Degenerate constant tensor: place the grid so the constant maps
        // exactly (scale 1 for representable constants, stretched otherwise).
        const float c = lo;
        if (std::abs(c) <= 255.0f) {
            q.scale = 1.0f;
            q.zero_point = static_cast<int>(std::clamp(std::lrintf(-c), 0L, 255L));
        } else {
            q.scale = std::abs(c) / 255.0f;
            q.zero_point = c > 0 ? 0 : 255;
        }
    } else {
        // Extend the range to include zero so the zero point is always
        // representable; otherwise tensors that do not span zero would clamp
        // the zero point and lose the scale/2 round-trip guarantee near one
        // end of the range.
        const float rlo = std::min(lo, 0.0f);
        const float rhi = std::max(hi, 0.0f);
        q.scale = (rhi - rlo) / 255.0f;
        q.zero_point = static_cast<int>(std::clamp(std::lrintf(-rlo / q.scale), 0L, 255L));
    }

    q.values.resize(values.size());
    kernels::quantize_u8(values.data(), q.values.data(), values.size(), q.scale, q.zero_point);
    return q;
}

std::vector<float> dequantize(const QuantizedTensor& q) {
    std::vector<float> out(q.values.size());
    kernels::dequantize_u8(q.values.data(), out.data(), out.size(), q.scale, q.zero_point);
    return out;
}

}  // namespace ipu::infer
