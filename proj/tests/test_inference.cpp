#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ipu/infer/golden.hpp"
#include "ipu/infer/mlp.hpp"
#include "ipu/infer/quantize.hpp"

using namespace ipu;
using namespace ipu::infer;

namespace {

constexpr size_t kTileElems = size_t{224} * 224 * 3;  // 150,528

// Solves the ridge least-squares system (A + lambda*I) w = b for a small
// dense symmetric system via Gaussian elimination.
std::vector<double> solve_ridge(std::vector<std::vector<double>> a, std::vector<double> b,
                                double lambda) {
    const size_t n = a.size();
    for (size_t i = 0; i < n; ++i) a[i][i] += lambda;
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (size_t r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (size_t i = n; i-- > 0;) {
        double s = b[i];
        for (size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

// 5-class tiles: class k pixels are uniform in the band [40k+5, 40k+34], so
// mean intensity separates the classes by a wide margin.
std::vector<uint8_t> make_class_tile(int class_id, std::mt19937_64& rng) {
    std::vector<uint8_t> tile(kTileElems);
    std::uniform_int_distribution<int> band(40 * class_id + 5, 40 * class_id + 34);
    for (auto& b : tile) b = static_cast<uint8_t>(band(rng));
    return tile;
}

TileBatch u8_batch(const std::vector<std::vector<uint8_t>>& tiles) {
    TileBatch batch;
    batch.elems_per_tile = kTileElems;
    batch.count = tiles.size();
    for (size_t i = 0; i < tiles.size(); ++i) {
        batch.indices.push_back(static_cast<int>(i));
        batch.u8.insert(batch.u8.end(), tiles[i].begin(), tiles[i].end());
    }
    return batch;
}

TileBatch f32_batch(const std::vector<std::vector<uint8_t>>& tiles) {
    TileBatch batch;
    batch.elems_per_tile = kTileElems;
    batch.count = tiles.size();
    for (size_t i = 0; i < tiles.size(); ++i) {
        batch.indices.push_back(static_cast<int>(i));
        for (uint8_t b : tiles[i]) batch.f32.push_back(static_cast<float>(b) / 256.0f);
    }
    return batch;
}

}  // namespace

TEST_CASE("affine quantization round-trips within scale/2") {
    // Degenerate constant tensor maps exactly.
    auto q3 = quantize_affine(std::vector<float>{3.0f, 3.0f});
    CHECK(q3.scale == 1.0f);
    auto back3 = dequantize(q3);
    CHECK(back3 == std::vector<float>{3.0f, 3.0f});
    auto qneg = quantize_affine(std::vector<float>{-7.0f, -7.0f, -7.0f});
    CHECK(dequantize(qneg) == std::vector<float>{-7.0f, -7.0f, -7.0f});
    auto q0 = quantize_affine(std::vector<float>{0.0f});
    CHECK(dequantize(q0) == std::vector<float>{0.0f});

    // [0, 1] uses the full 8-bit range and is exact at the endpoints.
    auto q01 = quantize_affine(std::vector<float>{0.0f, 1.0f});
    CHECK(q01.scale == doctest::Approx(1.0f / 255).epsilon(1e-6));
    CHECK(q01.zero_point == 0);
    auto back01 = dequantize(q01);
    CHECK(back01[0] == 0.0f);
    CHECK(back01[1] == doctest::Approx(1.0f).epsilon(1e-6));

    CHECK_THROWS_AS(quantize_affine(std::vector<float>{1.0f, std::nanf("")}),
                    std::invalid_argument);
    CHECK_THROWS_AS(quantize_affine(std::vector<float>{INFINITY}), std::invalid_argument);

    // Property: 1000 random tensors, elementwise |x - roundtrip(x)| <= scale/2
    // (with a sliver of float-arithmetic headroom).
    std::mt19937_64 rng(2024);
    for (int iter = 0; iter < 1000; ++iter) {
        size_t n = 1 + rng() % 64;
        std::uniform_real_distribution<float> center(-50.0f, 50.0f);
        std::uniform_real_distribution<float> spread(0.0f, 100.0f);
        float c = center(rng), s = spread(rng);
        std::vector<float> x(n);
        std::uniform_real_distribution<float> val(c - s, c + s);
        for (auto& v : x) v = val(rng);
        auto q = quantize_affine(x);
        auto back = dequantize(q);
        for (size_t i = 0; i < n; ++i) {
            REQUIRE(std::abs(back[i] - x[i]) <= 0.5 * q.scale * (1.0 + 1e-5));
        }
    }
}

TEST_CASE("golden backend is a pure lookup with faults on missing indices") {
    auto table = GoldenTable::synthetic(3, 4, 17);
    REQUIRE(table.complete());
    auto backend = golden_backend(table, kTileElems);
    CHECK(backend->precision() == Precision::Uint8);

    TileBatch batch;
    batch.elems_per_tile = kTileElems;
    batch.indices = {5, 0, 11};
    batch.count = 3;
    batch.u8.resize(3 * kTileElems);
    auto out = backend->infer(batch);
    REQUIRE(out.ok());
    CHECK(out.value()[0] == table.logits.at(5));
    CHECK(out.value()[1] == table.logits.at(0));
    CHECK(out.value()[2] == table.logits.at(11));

    // Determinism: identical batch, identical logits.
    auto again = backend->infer(batch);
    REQUIRE(again.ok());
    CHECK(again.value() == out.value());

    // Permuted submission yields the same per-index values.
    std::swap(batch.indices[0], batch.indices[2]);
    auto permuted = backend->infer(batch);
    REQUIRE(permuted.ok());
    CHECK(permuted.value()[0] == table.logits.at(11));
    CHECK(permuted.value()[2] == table.logits.at(5));

    batch.indices = {99};
    batch.count = 1;
    batch.u8.resize(kTileElems);
    auto fault = backend->infer(batch);
    REQUIRE(!fault.ok());
    CHECK(fault.error().message.find("99") != std::string::npos);
}

TEST_CASE("golden tables serialize to JSON and digest canonically") {
    auto table = GoldenTable::synthetic(20, 20, 4242);
    CHECK(table.complete());
    auto back = GoldenTable::from_json(table.to_json());
    CHECK(back.logits == table.logits);
    CHECK(back.rows == 20);
    CHECK(back.cols == 20);
    CHECK(back.digest() == table.digest());

    // The digest is order-canonical and content-sensitive.
    std::vector<Logits> in_order;
    for (const auto& [i, v] : table.logits) in_order.push_back(v);
    CHECK(logits_digest(in_order) == table.digest());
    in_order[7][2] += 0.001f;
    CHECK(logits_digest(in_order) != table.digest());

    CHECK_THROWS_AS(GoldenTable::from_json("{"), std::invalid_argument);
    CHECK_THROWS_AS(GoldenTable::synthetic(0, 4, 1), std::invalid_argument);
}

TEST_CASE("mlp weights validate shapes and serialize with base64 blobs") {
    auto w = MlpWeights::random(64, 8, 5);
    auto back = MlpWeights::from_json(w.to_json());
    CHECK(back.w1 == w.w1);
    CHECK(back.b1 == w.b1);
    CHECK(back.w2 == w.w2);
    CHECK(back.b2 == w.b2);

    MlpWeights bad = w;
    bad.w1.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    MlpWeights thin = w;
    thin.hidden_dim = 4;
    CHECK_THROWS_AS(thin.validate(), std::invalid_argument);
}

TEST_CASE("zero-weight mlp emits zero logits and uniform softmax") {
    MlpWeights w;
    w.input_dim = kTileElems;
    w.hidden_dim = 8;
    w.w1.assign(w.hidden_dim * w.input_dim, 0.0f);
    w.b1.assign(w.hidden_dim, 0.0f);
    w.w2.assign(kNumClasses * w.hidden_dim, 0.0f);
    w.b2.assign(kNumClasses, 0.0f);

    std::mt19937_64 rng(3);
    std::vector<std::vector<uint8_t>> tiles{make_class_tile(2, rng)};
    for (auto precision : {Precision::Float32, Precision::Uint8}) {
        auto backend = mlp_backend(w, precision);
        auto batch = precision == Precision::Float32 ? f32_batch(tiles) : u8_batch(tiles);
        auto out = backend->infer(batch);
        REQUIRE(out.ok());
        for (float logit : out.value()[0]) CHECK(logit == 0.0f);
        CHECK(softmax_confidence(out.value()[0]) == doctest::Approx(0.2f));
    }
}

TEST_CASE("int8 mlp deviates from float within the analytic per-layer bound") {
    const size_t hidden = 8;
    auto w = MlpWeights::random(kTileElems, hidden, 77);
    std::mt19937_64 rng(78);
    std::vector<std::vector<uint8_t>> tiles;
    for (int k = 0; k < 4; ++k) tiles.push_back(make_class_tile(k, rng));

    auto float_out = mlp_backend(w, Precision::Float32)->infer(f32_batch(tiles));
    auto int8_out = mlp_backend(w, Precision::Uint8)->infer(u8_batch(tiles));
    REQUIRE(float_out.ok());
    REQUIRE(int8_out.ok());

    // Bound computed from first principles: weight rounding <= scale/2 per
    // element, hidden requantization <= (hidden range + propagated error)/510,
    // head weight rounding applied to the perturbed activations.
    const float sw1 = quantize_affine(w.w1).scale;
    const float sw2 = quantize_affine(w.w2).scale;
    for (size_t t = 0; t < tiles.size(); ++t) {
        double sum_x = 0.0;
        std::vector<double> x(kTileElems);
        for (size_t i = 0; i < kTileElems; ++i) {
            x[i] = tiles[t][i] / 256.0;
            sum_x += x[i];
        }
        std::vector<double> h(hidden);
        double h_max = 0.0;
        const double e1 = 0.5 * sw1 * sum_x;  // worst-case weight rounding, x >= 0
        for (size_t j = 0; j < hidden; ++j) {
            double acc = w.b1[j];
            for (size_t i = 0; i < kTileElems; ++i) acc += double{w.w1[j * kTileElems + i]} * x[i];
            h[j] = std::max(0.0, acc);
            h_max = std::max(h_max, h[j]);
        }
        const double sh = (h_max + e1) / 255.0;  // hidden requantization scale bound
        const double d = e1 + 0.5 * sh;          // per-hidden-unit deviation bound
        for (int k = 0; k < kNumClasses; ++k) {
            double bound = 1e-3;  // float accumulation slack
            for (size_t j = 0; j < hidden; ++j) {
                bound += std::abs(w.w2[k * hidden + j]) * d + 0.5 * sw2 * (h[j] + d);
            }
            double dev = std::abs(double{float_out.value()[t][k]} - int8_out.value()[t][k]);
            CAPTURE(t); CAPTURE(k);
            REQUIRE(dev <= bound);
        }
    }

    // Determinism of both backends on a repeated batch.
    auto float_again = mlp_backend(w, Precision::Float32)->infer(f32_batch(tiles));
    auto int8_again = mlp_backend(w, Precision::Uint8)->infer(u8_batch(tiles));
    CHECK(float_again.value() == float_out.value());
    CHECK(int8_again.value() == int8_out.value());
}

TEST_CASE("int8 accuracy stays within 2 points of float on separable tiles") {
    // Hinge features over the pixel sum of a fixed 10% input subset: w1 rows
    // are 0/1 masks (exactly representable under affine quantization), b1
    // places the hinge knees across the class range.
    const size_t hidden = 8;
    const size_t subset = kTileElems / 10;
    const double knees[hidden] = {0.0, 0.154, 0.2, 0.311, 0.4, 0.467, 0.6, 0.623};

    MlpWeights w;
    w.input_dim = kTileElems;
    w.hidden_dim = hidden;
    w.w1.assign(hidden * kTileElems, 0.0f);
    for (size_t j = 0; j < hidden; ++j) {
        for (size_t i = 0; i < subset; ++i) w.w1[j * kTileElems + i] = 1.0f;
    }
    w.b1.resize(hidden);
    for (size_t j = 0; j < hidden; ++j) {
        w.b1[j] = static_cast<float>(-knees[j] * subset);
    }
    w.w2.assign(kNumClasses * hidden, 0.0f);
    w.b2.assign(kNumClasses, 0.0f);

    // Dataset: 100 training + 100 evaluation tiles, balanced classes.
    std::mt19937_64 rng(4096);
    auto make_set = [&](size_t count) {
        std::vector<std::vector<uint8_t>> tiles;
        std::vector<int> labels;
        for (size_t i = 0; i < count; ++i) {
            int k = static_cast<int>(i % kNumClasses);
            tiles.push_back(make_class_tile(k, rng));
            labels.push_back(k);
        }
        return std::pair(tiles, labels);
    };
    auto [train_tiles, train_labels] = make_set(100);
    auto [eval_tiles, eval_labels] = make_set(100);

    // Train once, in float: ridge least squares of one-hot targets on the
    // hinge features (plus bias), solved class by class.
    auto features = [&](const std::vector<uint8_t>& tile) {
        double s = 0.0;
        for (size_t i = 0; i < subset; ++i) s += tile[i] / 256.0;
        std::vector<double> phi(hidden + 1);
        for (size_t j = 0; j < hidden; ++j) phi[j] = std::max(0.0, s - knees[j] * subset);
        phi[hidden] = 1.0;
        return phi;
    };
    const size_t dim = hidden + 1;
    std::vector<std::vector<double>> gram(dim, std::vector<double>(dim, 0.0));
    std::vector<std::vector<double>> rhs(kNumClasses, std::vector<double>(dim, 0.0));
    for (size_t i = 0; i < train_tiles.size(); ++i) {
        auto phi = features(train_tiles[i]);
        for (size_t a = 0; a < dim; ++a) {
            for (size_t b = 0; b < dim; ++b) gram[a][b] += phi[a] * phi[b];
            rhs[train_labels[i]][a] += phi[a];
        }
    }
    for (int k = 0; k < kNumClasses; ++k) {
        auto coeff = solve_ridge(gram, rhs[k], 1e-3);
        for (size_t j = 0; j < hidden; ++j) w.w2[k * hidden + j] = static_cast<float>(coeff[j]);
        w.b2[k] = static_cast<float>(coeff[hidden]);
    }

    auto accuracy = [&](ClassifierBackend& backend, Precision prec) {
        int correct = 0;
        for (size_t start = 0; start < eval_tiles.size(); start += 25) {
            std::vector<std::vector<uint8_t>> chunk(eval_tiles.begin() + start,
                                                    eval_tiles.begin() + start + 25);
            auto batch = prec == Precision::Float32 ? f32_batch(chunk) : u8_batch(chunk);
            auto out = backend.infer(batch);
            REQUIRE(out.ok());
            for (size_t i = 0; i < 25; ++i) {
                int argmax = 0;
                softmax_confidence(out.value()[i], &argmax);
                if (argmax == eval_labels[start + i]) ++correct;
            }
        }
        return correct / static_cast<double>(eval_tiles.size());
    };

    auto float_backend = mlp_backend(w, Precision::Float32);
    auto int8_backend = mlp_backend(w, Precision::Uint8);
    double acc_float = accuracy(*float_backend, Precision::Float32);
    double acc_int8 = accuracy(*int8_backend, Precision::Uint8);
    CAPTURE(acc_float);
    CAPTURE(acc_int8);
    CHECK(acc_float >= 0.90);  // the dataset really is separable
    CHECK(std::abs(acc_float - acc_int8) <= 0.02);

    // Argmax stability: where the float top-2 gap exceeds twice the analytic
    // deviation bound, both precisions must pick the same class.
    const float sw1 = quantize_affine(w.w1).scale;
    const float sw2 = quantize_affine(w.w2).scale;
    int exercised = 0;
    for (size_t i = 0; i < 25; ++i) {
        std::vector<std::vector<uint8_t>> one{eval_tiles[i]};
        auto fo = float_backend->infer(f32_batch(one));
        auto io = int8_backend->infer(u8_batch(one));
        REQUIRE(fo.ok());
        REQUIRE(io.ok());
        auto phi = features(eval_tiles[i]);
        double sum_x = 0.0;
        for (uint8_t b : eval_tiles[i]) sum_x += b / 256.0;
        double e1 = 0.5 * sw1 * sum_x;
        double h_max = 0.0;
        for (size_t j = 0; j < hidden; ++j) h_max = std::max(h_max, phi[j]);
        double d = e1 + 0.5 * (h_max + e1) / 255.0;
        double bound_max = 0.0;
        for (int k = 0; k < kNumClasses; ++k) {
            double bound = 1e-3;
            for (size_t j = 0; j < hidden; ++j) {
                bound += std::abs(w.w2[k * hidden + j]) * d + 0.5 * sw2 * (phi[j] + d);
            }
            bound_max = std::max(bound_max, bound);
        }
        Logits fl = fo.value()[0];
        std::sort(fl.begin(), fl.end(), std::greater<>());
        if (fl[0] - fl[1] > 2 * bound_max) {
            ++exercised;
            int fa = 0, ia = 0;
            softmax_confidence(fo.value()[0], &fa);
            softmax_confidence(io.value()[0], &ia);
            CHECK(fa == ia);
        }
    }
    CHECK(exercised > 0);  // the property was not vacuous
}
