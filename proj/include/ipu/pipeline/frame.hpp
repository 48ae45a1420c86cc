#pragma once

#include <cstdint>
#include <string>

#include "ipu/common/bytes.hpp"

namespace ipu::pipeline {

// Full camera frame: interleaved RGB8, row-major. On disk a frame is a raw
// `.raw` byte file plus a `.json` sidecar carrying the dimensions.
struct Frame {
    int width_px = 0;
    int height_px = 0;
    int channels = 3;
    Bytes data;

    size_t row_bytes() const { return static_cast<size_t>(width_px) * channels; }
    void validate() const;  // throws std::invalid_argument if data length disagrees

    // Deterministic pseudo-random frame (the desk-scale stand-in for a
    // camera capture).
    static Frame random(int width_px, int height_px, uint64_t seed);
};

// `path_base` names the pair <path_base>.raw / <path_base>.json.
void save_frame(const Frame& frame, const std::string& path_base);
Frame load_frame(const std::string& path_base);  // throws on missing/inconsistent files

}  // namespace ipu::pipeline
