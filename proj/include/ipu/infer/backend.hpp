#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ipu/common/expected.hpp"

namespace ipu::infer {

inline constexpr int kNumClasses = 5;

enum class Precision { Uint8, Float32 };

using Logits = std::array<float, kNumClasses>;

// One batch of flattened tiles. Exactly one of `u8`/`f32` is populated,
// matching the backend's input precision; both hold count * elems_per_tile
// values. `indices` carries the flat patch index of each tile so faults can
// name the offender and reports can be assembled in grid order.
struct TileBatch {
    std::vector<int> indices;
    std::vector<uint8_t> u8;
    std::vector<float> f32;
    size_t count = 0;
    size_t elems_per_tile = 0;
};

struct BackendFault {
    std::string message;
};

// 5-class tile classifier. Implementations are immutable after construction
// and safe to call from multiple threads; identical batches produce identical
// logits.
class ClassifierBackend {
public:
    virtual ~ClassifierBackend() = default;
    virtual Precision precision() const = 0;
    virtual size_t input_elems() const = 0;
    virtual Expected<std::vector<Logits>, BackendFault> infer(const TileBatch& batch) = 0;
};

inline float softmax_confidence(const Logits& logits, int* argmax_out = nullptr) {
    int arg = 0;
    for (int k = 1; k < kNumClasses; ++k) {
        if (logits[k] > logits[arg]) arg = k;
    }
    // Stable softmax; only the max-class probability is ever needed.
    double denom = 0.0;
    for (int k = 0; k < kNumClasses; ++k) {
        denom += std::exp(static_cast<double>(logits[k]) - logits[arg]);
    }
    if (argmax_out) *argmax_out = arg;
    return static_cast<float>(1.0 / denom);
}

}  // namespace ipu::infer
