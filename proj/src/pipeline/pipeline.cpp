#include "ipu/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <thread>

#include "ipu/kernels/kernels.hpp"
#include "ipu/pipeline/bounded_queue.hpp"
#include "json.hpp"

namespace ipu::pipeline {

PatchGrid make_patch_grid(int width_px, int height_px, int tile_px) {
    if (tile_px <= 0) throw std::invalid_argument("tile size must be positive");
    if (width_px < tile_px || height_px < tile_px) {
        throw std::invalid_argument("frame smaller than one tile");
    }
    PatchGrid g;
    g.tile_px = tile_px;
    g.cols = width_px / tile_px;
    g.rows = height_px / tile_px;
    g.discarded_right_px = width_px - g.cols * tile_px;
    g.discarded_bottom_px = height_px - g.rows * tile_px;
    return g;
}

Tile extract_patch(const Frame& frame, const PatchGrid& grid, int row, int col) {
    if (row < 0 || row >= grid.rows || col < 0 || col >= grid.cols) {
        throw std::out_of_range("patch index outside grid");
    }
    const size_t tile_row_bytes = static_cast<size_t>(grid.tile_px) * frame.channels;
    Tile t;
    t.row = row;
    t.col = col;
    t.pixels.resize(tile_row_bytes * grid.tile_px);
    const size_t src_row0 = static_cast<size_t>(row) * grid.tile_px;
    const size_t src_col_byte = static_cast<size_t>(col) * grid.tile_px * frame.channels;
    for (int y = 0; y < grid.tile_px; ++y) {
        const uint8_t* src = frame.data.data() + (src_row0 + y) * frame.row_bytes() + src_col_byte;
        std::memcpy(t.pixels.data() + static_cast<size_t>(y) * tile_row_bytes, src, tile_row_bytes);
    }
    return t;
}

std::vector<float> scale_to_unit(const Tile& tile) {
    std::vector<float> out(tile.pixels.size());
    kernels::scale_u8_to_unit(tile.pixels.data(), out.data(), out.size());
    return out;
}

std::string InferenceRunReport::to_json() const {
    nlohmann::json j;
    j["valid"] = valid;
    j["error"] = error;
    j["batch_size"] = batch_size;
    j["patches_inferred"] = patches_inferred;
    j["total_latency_ms"] = total_latency_ms;
    j["per_batch_latency_ms"] = per_batch_latency_ms;
    nlohmann::json logits = nlohmann::json::array();
    for (const auto& v : per_patch_logits) logits.push_back(std::vector<float>(v.begin(), v.end()));
    j["per_patch_logits"] = logits;
    return j.dump();
}

namespace {

struct TileWork {
    int flat_index = 0;
    Bytes u8;
    std::vector<float> f32;
};

}  // namespace

InferenceRunReport run_inference(const Frame& frame, infer::ClassifierBackend& backend,
                                 int batch_size, size_t queue_capacity) {
    frame.validate();
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    PatchGrid grid = make_patch_grid(frame.width_px, frame.height_px);
    const size_t elems =
        static_cast<size_t>(grid.tile_px) * grid.tile_px * frame.channels;
    const bool wants_float = backend.precision() == infer::Precision::Float32;

    InferenceRunReport report;
    report.batch_size = batch_size;
    report.patches_inferred = grid.patch_count();
    report.per_patch_logits.resize(grid.patch_count());

    const auto t0 = std::chrono::steady_clock::now();
    BoundedQueue<TileWork> queue(queue_capacity);

    std::thread producer([&] {
        for (int row = 0; row < grid.rows; ++row) {
            for (int col = 0; col < grid.cols; ++col) {
                Tile tile = extract_patch(frame, grid, row, col);
                TileWork work;
                work.flat_index = grid.flat_index(row, col);
                if (wants_float) {
                    work.f32 = scale_to_unit(tile);
                } else {
                    work.u8 = std::move(tile.pixels);
                }
                if (!queue.push(std::move(work))) return;  // consumer aborted
            }
        }
        queue.close();
    });

    bool faulted = false;
    while (!faulted) {
        infer::TileBatch batch;
        batch.elems_per_tile = elems;
        while (static_cast<int>(batch.count) < batch_size) {
            auto work = queue.pop();
            if (!work) break;  // producer finished
            batch.indices.push_back(work->flat_index);
            if (wants_float) {
                batch.f32.insert(batch.f32.end(), work->f32.begin(), work->f32.end());
            } else {
                batch.u8.insert(batch.u8.end(), work->u8.begin(), work->u8.end());
            }
            ++batch.count;
        }
        if (batch.count == 0) break;

        // Pad a short final batch to the fixed batch size; pad outputs are
        // dropped below because their indices are absent.
        const size_t real = batch.count;
        while (static_cast<int>(batch.count) < batch_size) {
            batch.indices.push_back(batch.indices.back());
            if (wants_float) {
                batch.f32.insert(batch.f32.end(), batch.f32.end() - elems, batch.f32.end());
            } else {
                batch.u8.insert(batch.u8.end(), batch.u8.end() - elems, batch.u8.end());
            }
            ++batch.count;
        }

        const auto b0 = std::chrono::steady_clock::now();
        auto result = backend.infer(batch);
        const auto b1 = std::chrono::steady_clock::now();
        report.per_batch_latency_ms.push_back(
            std::chrono::duration<double, std::milli>(b1 - b0).count());

        if (!result.ok()) {
            report.error = result.error().message;
            faulted = true;
            queue.close();  // unblock the producer
            break;
        }
        for (size_t i = 0; i < real; ++i) {
            report.per_patch_logits[batch.indices[i]] = result.value()[i];
        }
        if (real < static_cast<size_t>(batch_size)) break;  // short batch = end of stream
    }

    producer.join();
    const auto t1 = std::chrono::steady_clock::now();
    report.total_latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    report.valid = !faulted;
    return report;
}

double extrapolate_latency(double measured_ms, int patches_measured) {
    if (patches_measured != 1 && patches_measured != 100 && patches_measured != 400) {
        throw std::invalid_argument("extrapolation defined for 1, 100, or 400 patches only");
    }
    return measured_ms * (400.0 / patches_measured);
}

std::vector<PatchSelection> select_patches(const InferenceRunReport& report,
                                           const PatchGrid& grid,
                                           const std::set<int>& interest_classes,
                                           float min_confidence) {
    if (min_confidence < 0.0f || min_confidence > 1.0f) {
        throw std::invalid_argument("confidence threshold must be in [0,1]");
    }
    std::vector<PatchSelection> picks;
    for (size_t i = 0; i < report.per_patch_logits.size(); ++i) {
        int argmax = 0;
        float conf = infer::softmax_confidence(report.per_patch_logits[i], &argmax);
        if (!interest_classes.count(argmax) || conf < min_confidence) continue;
        PatchSelection s;
        s.row = static_cast<int>(i) / grid.cols;
        s.col = static_cast<int>(i) % grid.cols;
        s.class_id = argmax;
        s.confidence = conf;
        picks.push_back(s);
    }
    std::stable_sort(picks.begin(), picks.end(), [](const PatchSelection& a, const PatchSelection& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.row != b.row) return a.row < b.row;
        return a.col < b.col;
    });
    return picks;
}

}  // namespace ipu::pipeline
