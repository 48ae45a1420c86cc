#include <chrono>
#include <cstring>
#include <filesystem>
#include <random>
#include <set>
#include <thread>

#include "doctest.h"
#include "ipu/infer/golden.hpp"
#include "ipu/pipeline/bounded_queue.hpp"
#include "ipu/pipeline/pipeline.hpp"

using namespace ipu;
using namespace ipu::pipeline;

namespace {

// Backend with scriptable behavior for pipeline-mechanics tests.
class MockBackend final : public infer::ClassifierBackend {
public:
    MockBackend(size_t elems, infer::Precision prec = infer::Precision::Uint8)
        : elems_(elems), prec_(prec) {}

    infer::Precision precision() const override { return prec_; }
    size_t input_elems() const override { return elems_; }

    Expected<std::vector<infer::Logits>, infer::BackendFault> infer(
        const infer::TileBatch& batch) override {
        if (fail_at_call_ >= 0 && calls_ == fail_at_call_) {
            return infer::BackendFault{"injected fault"};
        }
        ++calls_;
        if (sleep_max_us_ > 0) {
            std::this_thread::sleep_for(std::chrono::microseconds(rng_() % sleep_max_us_));
        }
        std::vector<infer::Logits> out(batch.count);
        for (size_t i = 0; i < batch.count; ++i) {
            // Logit 0 encodes the patch index so ordering is checkable.
            out[i] = {static_cast<float>(batch.indices[i]), 0, 0, 0, 0};
        }
        return out;
    }

    int calls() const { return calls_; }
    void set_fail_at(int call) { fail_at_call_ = call; }
    void set_random_sleep(uint32_t max_us, uint64_t seed) {
        sleep_max_us_ = max_us;
        rng_.seed(seed);
    }

private:
    size_t elems_;
    infer::Precision prec_;
    int calls_ = 0;
    int fail_at_call_ = -1;
    uint32_t sleep_max_us_ = 0;
    std::mt19937_64 rng_;
};

}  // namespace

TEST_CASE("patch grid floors to whole tiles and records discarded margins") {
    auto g = make_patch_grid(4512, 4512);
    CHECK(g.rows == 20);
    CHECK(g.cols == 20);
    CHECK(g.patch_count() == 400);
    CHECK(g.discarded_right_px == 32);
    CHECK(g.discarded_bottom_px == 32);
    CHECK(g.cols * 224 + g.discarded_right_px == 4512);

    auto one = make_patch_grid(224, 224);
    CHECK(one.patch_count() == 1);
    CHECK(one.discarded_right_px == 0);
    CHECK(one.discarded_bottom_px == 0);

    CHECK(make_patch_grid(2272, 2272).patch_count() == 100);

    CHECK_THROWS_AS(make_patch_grid(223, 4512), std::invalid_argument);
    CHECK_THROWS_AS(make_patch_grid(4512, 100), std::invalid_argument);
}

TEST_CASE("extract_patch copies the exact frame region") {
    // Closed-form frame: value at (x, y, c) = (x + y + c) mod 256.
    Frame f;
    f.width_px = 500;
    f.height_px = 460;
    f.data.resize(f.row_bytes() * f.height_px);
    for (int y = 0; y < f.height_px; ++y) {
        for (int x = 0; x < f.width_px; ++x) {
            for (int c = 0; c < 3; ++c) {
                f.data[(static_cast<size_t>(y) * f.width_px + x) * 3 + c] =
                    static_cast<uint8_t>((x + y + c) % 256);
            }
        }
    }
    auto grid = make_patch_grid(f.width_px, f.height_px);
    REQUIRE(grid.rows == 2);
    REQUIRE(grid.cols == 2);
    for (int row = 0; row < grid.rows; ++row) {
        for (int col = 0; col < grid.cols; ++col) {
            Tile t = extract_patch(f, grid, row, col);
            REQUIRE(t.pixels.size() == size_t{224} * 224 * 3);
            for (int y = 0; y < 224; ++y) {
                for (int x = 0; x < 224; ++x) {
                    for (int c = 0; c < 3; ++c) {
                        int fx = col * 224 + x, fy = row * 224 + y;
                        CAPTURE(row); CAPTURE(col); CAPTURE(x); CAPTURE(y);
                        REQUIRE(t.pixels[(static_cast<size_t>(y) * 224 + x) * 3 + c] ==
                                static_cast<uint8_t>((fx + fy + c) % 256));
                    }
                }
            }
        }
    }
    CHECK_THROWS_AS(extract_patch(f, grid, 2, 0), std::out_of_range);
    CHECK_THROWS_AS(extract_patch(f, grid, 0, -1), std::out_of_range);
}

TEST_CASE("tiling then reassembly reproduces the frame minus discarded margins") {
    Frame f = Frame::random(1000, 700, 42);
    auto grid = make_patch_grid(f.width_px, f.height_px);
    const int kept_w = grid.cols * grid.tile_px, kept_h = grid.rows * grid.tile_px;

    Bytes rebuilt(static_cast<size_t>(kept_w) * kept_h * 3);
    for (int row = 0; row < grid.rows; ++row) {
        for (int col = 0; col < grid.cols; ++col) {
            Tile t = extract_patch(f, grid, row, col);
            for (int y = 0; y < grid.tile_px; ++y) {
                std::memcpy(rebuilt.data() +
                                ((static_cast<size_t>(row) * grid.tile_px + y) * kept_w +
                                 static_cast<size_t>(col) * grid.tile_px) * 3,
                            t.pixels.data() + static_cast<size_t>(y) * grid.tile_px * 3,
                            static_cast<size_t>(grid.tile_px) * 3);
            }
        }
    }
    for (int y = 0; y < kept_h; ++y) {
        REQUIRE(std::memcmp(rebuilt.data() + static_cast<size_t>(y) * kept_w * 3,
                            f.data.data() + static_cast<size_t>(y) * f.row_bytes(),
                            static_cast<size_t>(kept_w) * 3) == 0);
    }
}

TEST_CASE("scale_to_unit maps bytes into the half-open unit interval") {
    Tile t;
    t.pixels = {0, 255, 128, 1};
    auto f = scale_to_unit(t);
    CHECK(f[0] == 0.0f);
    CHECK(f[1] == 0.99609375f);  // 255/256
    CHECK(f[2] == 0.5f);
    CHECK(f[3] == 0.00390625f);
    Frame frame = Frame::random(448, 224, 3);
    auto grid = make_patch_grid(frame.width_px, frame.height_px);
    for (int col = 0; col < grid.cols; ++col) {
        for (float v : scale_to_unit(extract_patch(frame, grid, 0, col))) {
            REQUIRE(v >= 0.0f);
            REQUIRE(v < 1.0f);
        }
    }
}

TEST_CASE("run_inference reports golden logits in grid order for any batching") {
    Frame f = Frame::random(896, 672, 7);  // 4 cols x 3 rows = 12 patches
    auto grid = make_patch_grid(f.width_px, f.height_px);
    auto table = infer::GoldenTable::synthetic(grid.rows, grid.cols, 99);
    const size_t elems = size_t{224} * 224 * 3;

    std::vector<infer::Logits> expected;
    for (int i = 0; i < grid.patch_count(); ++i) expected.push_back(table.logits.at(i));

    for (int batch_size : {1, 5, 12, 16}) {
        for (size_t capacity : {size_t{1}, size_t{2}, size_t{8}}) {
            auto backend = infer::golden_backend(table, elems);
            auto report = run_inference(f, *backend, batch_size, capacity);
            REQUIRE(report.valid);
            CHECK(report.patches_inferred == 12);
            CHECK(report.per_patch_logits == expected);
            CHECK(report.batch_size == batch_size);
            size_t expect_batches = (12 + batch_size - 1) / batch_size;
            CHECK(report.per_batch_latency_ms.size() == expect_batches);
            double batch_sum = 0;
            for (double ms : report.per_batch_latency_ms) batch_sum += ms;
            CHECK(report.total_latency_ms >= batch_sum);
        }
    }
}

TEST_CASE("batch padding arithmetic: 400 patches in batches of 7 and 16") {
    Frame f = Frame::random(4512, 4512, 1);
    auto grid = make_patch_grid(f.width_px, f.height_px);
    auto table = infer::GoldenTable::synthetic(grid.rows, grid.cols, 5);
    const size_t elems = size_t{224} * 224 * 3;

    auto b16 = infer::golden_backend(table, elems);
    auto r16 = run_inference(f, *b16, 16, 8);
    REQUIRE(r16.valid);
    CHECK(r16.per_batch_latency_ms.size() == 25);  // 400 = 25 full batches
    CHECK(r16.per_patch_logits.size() == 400);

    auto b7 = infer::golden_backend(table, elems);
    auto r7 = run_inference(f, *b7, 7, 8);
    REQUIRE(r7.valid);
    CHECK(r7.per_batch_latency_ms.size() == 58);  // ceil(400/7), last padded by 5
    CHECK(r7.per_patch_logits.size() == 400);     // pad outputs dropped
    CHECK(r7.per_patch_logits == r16.per_patch_logits);
}

TEST_CASE("backend fault aborts the run with an invalid report") {
    Frame f = Frame::random(896, 672, 8);
    auto grid = make_patch_grid(f.width_px, f.height_px);
    auto table = infer::GoldenTable::synthetic(grid.rows, grid.cols, 99);
    table.logits.erase(5);  // hole in the table
    auto backend = infer::golden_backend(table, size_t{224} * 224 * 3);
    auto report = run_inference(f, *backend, 4, 2);
    CHECK(!report.valid);
    CHECK(report.error.find("patch index 5") != std::string::npos);
}

TEST_CASE("producer/consumer pipeline survives randomized scheduling 100x") {
    Frame f = Frame::random(896, 448, 77);  // 8 patches
    std::mt19937_64 rng(123);
    for (int run = 0; run < 100; ++run) {
        MockBackend backend(size_t{224} * 224 * 3);
        backend.set_random_sleep(200, rng());
        int batch_size = 1 + static_cast<int>(rng() % 10);
        size_t capacity = 1 + rng() % 4;
        auto report = run_inference(f, backend, batch_size, capacity);
        REQUIRE(report.valid);
        REQUIRE(report.per_patch_logits.size() == 8);
        for (int i = 0; i < 8; ++i) {
            REQUIRE(report.per_patch_logits[i][0] == static_cast<float>(i));
        }
    }
    // Fault mid-stream with a blocked producer must not deadlock either.
    for (int fail_at : {0, 1}) {
        MockBackend backend(size_t{224} * 224 * 3);
        backend.set_fail_at(fail_at);
        auto report = run_inference(f, backend, 2, 1);
        CHECK(!report.valid);
        CHECK(report.error == "injected fault");
    }
}

TEST_CASE("latency extrapolation applies the x400 and x4 rules exactly") {
    CHECK(extrapolate_latency(10.0, 1) == 4000.0);
    CHECK(extrapolate_latency(1000.0, 100) == 4000.0);
    CHECK(extrapolate_latency(4000.0, 400) == 4000.0);
    // Constant per-patch cost: measuring k patches then extrapolating equals
    // measuring all 400, exactly.
    const double cost_ms = 2.5;
    for (int k : {1, 100, 400}) {
        CHECK(extrapolate_latency(cost_ms * k, k) == cost_ms * 400);
    }
    CHECK_THROWS_AS(extrapolate_latency(10.0, 7), std::invalid_argument);
    CHECK_THROWS_AS(extrapolate_latency(10.0, 0), std::invalid_argument);
}

TEST_CASE("patch selection filters by class and confidence, sorted") {
    PatchGrid grid = make_patch_grid(896, 672);  // 4x3
    InferenceRunReport report;
    report.valid = true;
    report.patches_inferred = grid.patch_count();
    report.per_patch_logits.assign(grid.patch_count(), infer::Logits{0, 0, 0, 0, 0});

    // Three strong class-2 detections with distinct confidences, one weak.
    report.per_patch_logits[3] = {0, 0, 8, 0, 0};
    report.per_patch_logits[7] = {0, 0, 6, 0, 0};
    report.per_patch_logits[10] = {0, 0, 10, 0, 0};
    report.per_patch_logits[1] = {0, 0, 0.5f, 0, 0};

    auto picks = select_patches(report, grid, {2}, 0.9f);
    REQUIRE(picks.size() == 3);
    CHECK(picks[0].row == 2); CHECK(picks[0].col == 2);   // index 10, conf highest
    CHECK(picks[1].row == 0); CHECK(picks[1].col == 3);   // index 3
    CHECK(picks[2].row == 1); CHECK(picks[2].col == 3);   // index 7
    CHECK(picks[0].class_id == 2);
    CHECK(picks[0].confidence > picks[1].confidence);
    CHECK(picks[1].confidence > picks[2].confidence);

    // Threshold 0 with every class interesting selects everything, ties in
    // (row, col) order.
    auto all = select_patches(report, grid, {0, 1, 2, 3, 4}, 0.0f);
    CHECK(all.size() == 12);

    // Threshold 1.0 keeps only exact-1.0 confidences.
    report.per_patch_logits[4] = {0, -1000, -1000, -1000, -1000};  // softmax == 1.0f
    auto exact = select_patches(report, grid, {0, 1, 2, 3, 4}, 1.0f);
    REQUIRE(exact.size() == 1);
    CHECK(exact[0].row == 1);
    CHECK(exact[0].col == 0);

    CHECK_THROWS_AS(select_patches(report, grid, {0}, 1.5f), std::invalid_argument);
}

TEST_CASE("frames round-trip through the raw+sidecar file format") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "ipu_frame_io_test";
    fs::create_directories(dir);
    auto base = (dir / "capture_000").string();

    Frame f = Frame::random(448, 256, 21);
    save_frame(f, base);
    Frame back = load_frame(base);
    CHECK(back.width_px == f.width_px);
    CHECK(back.height_px == f.height_px);
    CHECK(back.channels == f.channels);
    CHECK(back.data == f.data);

    CHECK_THROWS_AS(load_frame((dir / "nope").string()), std::invalid_argument);
    fs::remove_all(dir);
}
