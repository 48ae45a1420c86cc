#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "ipu/infer/backend.hpp"
#include "ipu/pipeline/frame.hpp"

namespace ipu::pipeline {

inline constexpr int kTilePx = 224;

// Tiling of a frame into kTilePx squares; partial tiles at the right/bottom
// edges are discarded, not padded.
struct PatchGrid {
    int tile_px = kTilePx;
    int cols = 0;
    int rows = 0;
    int discarded_right_px = 0;
    int discarded_bottom_px = 0;

    int patch_count() const { return rows * cols; }
    int flat_index(int row, int col) const { return row * cols + col; }
};

// Throws std::invalid_argument if the frame is smaller than one tile.
PatchGrid make_patch_grid(int width_px, int height_px, int tile_px = kTilePx);

struct Tile {
    int row = 0;
    int col = 0;
    Bytes pixels;  // tile_px * tile_px * channels interleaved bytes
};

// Copies one tile out of the frame with a block copy per pixel row (never
// per value). Throws std::out_of_range on indices outside the grid.
Tile extract_patch(const Frame& frame, const PatchGrid& grid, int row, int col);

// v -> v/256 elementwise, results always in [0,1).
std::vector<float> scale_to_unit(const Tile& tile);

struct InferenceRunReport {
    std::vector<infer::Logits> per_patch_logits;  // (row, col) row-major order
    std::vector<double> per_batch_latency_ms;
    double total_latency_ms = 0.0;
    int batch_size = 0;
    int patches_inferred = 0;
    bool valid = false;
    std::string error;  // backend fault message when invalid

    std::string to_json() const;
};

// Full-frame inference: a producer thread extracts and preprocesses tiles in
// row-major order into a bounded queue while the calling thread drains
// batches into the backend. The final short batch is padded to batch_size
// and the pad outputs are dropped. On a backend fault the report comes back
// invalid with the fault message and whatever logits were already computed.
InferenceRunReport run_inference(const Frame& frame, infer::ClassifierBackend& backend,
                                 int batch_size, size_t queue_capacity);

// Full-image latency from a partial measurement; the grid is 400 patches, so
// legal measured counts are 1 (x400), 100 (x4), and 400 (x1).
double extrapolate_latency(double measured_ms, int patches_measured);

struct PatchSelection {
    int row = 0;
    int col = 0;
    int class_id = 0;
    float confidence = 0.0f;  // softmax probability of the argmax class
};

// Patches whose argmax class is interesting and whose confidence clears the
// threshold, sorted by confidence descending, ties by (row, col) ascending.
std::vector<PatchSelection> select_patches(const InferenceRunReport& report,
                                           const PatchGrid& grid,
                                           const std::set<int>& interest_classes,
                                           float min_confidence);

}  // namespace ipu::pipeline
