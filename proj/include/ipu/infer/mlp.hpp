#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ipu/infer/backend.hpp"

namespace ipu::infer {

// Small dense classifier: input -> hidden (ReLU) -> 5 logits. It exists to
// exercise the pipeline and the 8-bit quantization path end to end at desk
// scale; real deployment models travel through the FTP service as opaque
// blobs and are never executed here.
struct MlpWeights {
    size_t input_dim = 0;
    size_t hidden_dim = 0;
    std::vector<float> w1;  // hidden_dim x input_dim, row-major
    std::vector<float> b1;  // hidden_dim
    std::vector<float> w2;  // kNumClasses x hidden_dim, row-major
    std::vector<float> b2;  // kNumClasses

    void validate() const;  // throws std::invalid_argument on shape mismatch

    std::string to_json() const;  // base64 float32-LE blobs
    static MlpWeights from_json(const std::string& text);

    static MlpWeights random(size_t input_dim, size_t hidden_dim, uint64_t seed);
};

// Float32 mode consumes tiles scaled to [0,1) and computes in float.
// Uint8 mode consumes raw 8-bit tiles (implicit scale 1/256, zero point 0),
// quantizes weights per-tensor at construction and hidden activations
// per-tile at runtime, runs both layers as integer dot products, and
// dequantizes at the head.
std::unique_ptr<ClassifierBackend> mlp_backend(MlpWeights weights, Precision precision);

}  // namespace ipu::infer
