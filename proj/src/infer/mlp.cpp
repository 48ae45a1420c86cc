#include "ipu/infer/mlp.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ipu/common/bytes.hpp"
#include "ipu/infer/quantize.hpp"
#include "ipu/kernels/kernels.hpp"
#include "json.hpp"

namespace ipu::infer {

using nlohmann::json;

namespace {

std::string floats_to_b64(const std::vector<float>& v) {
    Bytes raw;
    raw.reserve(v.size() * 4);
    for (float f : v) {
        uint32_t bits = std::bit_cast<uint32_t>(f);
        for (int k = 0; k < 4; ++k) raw.push_back(static_cast<uint8_t>(bits >> (8 * k)));
    }
    return base64_encode(raw);
}

std::vector<float> b64_to_floats(const std::string& text) {
    Bytes raw = base64_decode(text);
    if (raw.size() % 4 != 0) throw std::invalid_argument("weight blob not float-aligned");
    std::vector<float> v(raw.size() / 4);
    for (size_t i = 0; i < v.size(); ++i) {
        uint32_t bits = 0;
        for (int b = 3; b >= 0; --b) bits = bits << 8 | raw[i * 4 + b];
        v[i] = std::bit_cast<float>(bits);
    }
    return v;
}

}  // namespace

void MlpWeights::validate() const {
    if (input_dim == 0) throw std::invalid_argument("mlp: input_dim must be positive");
    if (hidden_dim < 8) throw std::invalid_argument("mlp: hidden_dim must be >= 8");
    if (w1.size() != hidden_dim * input_dim) throw std::invalid_argument("mlp: w1 shape mismatch");
    if (b1.size() != hidden_dim) throw std::invalid_argument("mlp: b1 shape mismatch");
    if (w2.size() != static_cast<size_t>(kNumClasses) * hidden_dim) {
        throw std::invalid_argument("mlp: w2 shape mismatch");
    }
    if (b2.size() != static_cast<size_t>(kNumClasses)) {
        throw std::invalid_argument("mlp: b2 shape mismatch");
    }
}

std::string MlpWeights::to_json() const {
    validate();
    json j{{"input_dim", input_dim}, {"hidden_dim", hidden_dim}, {"num_classes", kNumClasses},
           {"w1_b64", floats_to_b64(w1)}, {"b1_b64", floats_to_b64(b1)},
           {"w2_b64", floats_to_b64(w2)}, {"b2_b64", floats_to_b64(b2)}};
    return j.dump();
}

MlpWeights MlpWeights::from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        if (j.at("num_classes").get<int>() != kNumClasses) {
            throw std::invalid_argument("mlp: unsupported class count");
        }
        MlpWeights w;
        w.input_dim = j.at("input_dim").get<size_t>();
        w.hidden_dim = j.at("hidden_dim").get<size_t>();
        w.w1 = b64_to_floats(j.at("w1_b64").get<std::string>());
        w.b1 = b64_to_floats(j.at("b1_b64").get<std::string>());
        w.w2 = b64_to_floats(j.at("w2_b64").get<std::string>());
        w.b2 = b64_to_floats(j.at("b2_b64").get<std::string>());
        w.validate();
        return w;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("mlp: malformed JSON: ") + e.what());
    }
}

MlpWeights MlpWeights::random(size_t input_dim, size_t hidden_dim, uint64_t seed) {
    MlpWeights w;
    w.input_dim = input_dim;
    w.hidden_dim = hidden_dim;
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> n1(0.0f, 1.0f / std::sqrt(static_cast<float>(input_dim)));
    std::normal_distribution<float> n2(0.0f, 1.0f / std::sqrt(static_cast<float>(hidden_dim)));
    w.w1.resize(hidden_dim * input_dim);
    for (auto& f : w.w1) f = n1(rng);
    w.b1.assign(hidden_dim, 0.0f);
    w.w2.resize(static_cast<size_t>(kNumClasses) * hidden_dim);
    for (auto& f : w.w2) f = n2(rng);
    w.b2.assign(kNumClasses, 0.0f);
    w.validate();
    return w;
}

namespace {

class FloatMlp final : public ClassifierBackend {
public:
    explicit FloatMlp(MlpWeights w) : w_(std::move(w)) {}

    Precision precision() const override { return Precision::Float32; }
    size_t input_elems() const override { return w_.input_dim; }

    Expected<std::vector<Logits>, BackendFault> infer(const TileBatch& batch) override {
        if (batch.elems_per_tile != w_.input_dim || batch.f32.size() != batch.count * w_.input_dim) {
            return BackendFault{"float mlp: batch shape mismatch"};
        }
        std::vector<Logits> out(batch.count);
        std::vector<float> hidden(w_.hidden_dim);
        for (size_t t = 0; t < batch.count; ++t) {
            const float* x = batch.f32.data() + t * w_.input_dim;
            for (size_t j = 0; j < w_.hidden_dim; ++j) {
                float h = kernels::dot_f32(w_.w1.data() + j * w_.input_dim, x, w_.input_dim) +
                          w_.b1[j];
                hidden[j] = h > 0.0f ? h : 0.0f;
            }
            for (int k = 0; k < kNumClasses; ++k) {
                out[t][k] = kernels::dot_f32(w_.w2.data() + k * w_.hidden_dim, hidden.data(),
                                             w_.hidden_dim) +
                            w_.b2[k];
            }
        }
        return out;
    }

private:
    MlpWeights w_;
};

// Integer-domain evaluation. With activations a (scale sa, zero za) and
// weights q (scale sw, zero zw):
//   sum_i sa(a_i-za) * sw(q_i-zw)
//     = sa*sw * (dot(a,q) - zw*sum(a) - za*sum(q) + n*za*zw)
// so each row needs one u8 dot, one activation sum, and a precomputed weight
// row sum.
class Int8Mlp final : public ClassifierBackend {
public:
    explicit Int8Mlp(MlpWeights w) : w_(std::move(w)) {
        qw1_ = quantize_affine(w_.w1, {w_.hidden_dim, w_.input_dim});
        qw2_ = quantize_affine(w_.w2, {static_cast<size_t>(kNumClasses), w_.hidden_dim});
        w2_row_sums_.resize(kNumClasses);
        for (int k = 0; k < kNumClasses; ++k) {
            w2_row_sums_[k] = static_cast<int64_t>(
                kernels::sum_u8(qw2_.values.data() + k * w_.hidden_dim, w_.hidden_dim));
        }
    }

    Precision precision() const override { return Precision::Uint8; }
    size_t input_elems() const override { return w_.input_dim; }

    Expected<std::vector<Logits>, BackendFault> infer(const TileBatch& batch) override {
        if (batch.elems_per_tile != w_.input_dim || batch.u8.size() != batch.count * w_.input_dim) {
            return BackendFault{"int8 mlp: batch shape mismatch"};
        }
        // Raw tiles carry the affine (1/256, 0): x = q / 256.
        const float sa = 1.0f / 256.0f;
        const auto n2 = static_cast<int64_t>(w_.hidden_dim);
        std::vector<Logits> out(batch.count);
        std::vector<float> hidden(w_.hidden_dim);
        for (size_t t = 0; t < batch.count; ++t) {
            const uint8_t* a = batch.u8.data() + t * w_.input_dim;
            const auto sum_a = static_cast<int64_t>(kernels::sum_u8(a, w_.input_dim));
            for (size_t j = 0; j < w_.hidden_dim; ++j) {
                int64_t dot = kernels::dot_u8u8(a, qw1_.values.data() + j * w_.input_dim,
                                                w_.input_dim);
                int64_t corrected = dot - static_cast<int64_t>(qw1_.zero_point) * sum_a;
                // za = 0, so the za terms vanish.
                float h = sa * qw1_.scale * static_cast<float>(corrected) + w_.b1[j];
                hidden[j] = h > 0.0f ? h : 0.0f;
            }
            QuantizedTensor qh = quantize_affine(hidden, {w_.hidden_dim});
            const auto sum_h = static_cast<int64_t>(kernels::sum_u8(qh.values.data(), qh.size()));
            const auto zh = static_cast<int64_t>(qh.zero_point);
            const auto zw = static_cast<int64_t>(qw2_.zero_point);
            for (int k = 0; k < kNumClasses; ++k) {
                int64_t dot = kernels::dot_u8u8(qh.values.data(),
                                                qw2_.values.data() + k * w_.hidden_dim,
                                                w_.hidden_dim);
                int64_t corrected = dot - zw * sum_h - zh * w2_row_sums_[k] + n2 * zh * zw;
                out[t][k] = qh.scale * qw2_.scale * static_cast<float>(corrected) + w_.b2[k];
            }
        }
        return out;
    }

private:
    MlpWeights w_;
    QuantizedTensor qw1_, qw2_;
    std::vector<int64_t> w2_row_sums_;
};

}  // namespace

std::unique_ptr<ClassifierBackend> mlp_backend(MlpWeights weights, Precision precision) {
    weights.validate();
    if (precision == Precision::Float32) return std::make_unique<FloatMlp>(std::move(weights));
    return std::make_unique<Int8Mlp>(std::move(weights));
}

}  // namespace ipu::infer
