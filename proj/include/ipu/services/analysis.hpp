#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ipu/common/bytes.hpp"

namespace ipu::services {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;  // row-major, width*height

    uint8_t at(int x, int y) const { return pixels[size_t(y) * width + x]; }
    void validate() const;  // throws std::invalid_argument on shape mismatch
};

struct OtsuResult {
    int threshold = 0;   // 0-255
    bool degenerate = false;  // no split improves on zero between-class variance
};

using Histogram = std::array<uint64_t, 256>;

Histogram histogram_of(const GrayImage& img);

// Threshold maximizing the between-class variance w0*w1*(mu0-mu1)^2 with
// classes {<= t} and {> t}; ties resolved toward the smallest threshold.
// Throws std::invalid_argument when the histogram is empty.
OtsuResult otsu_threshold(const Histogram& hist);

struct BoundingBox {
    int x0 = 0, y0 = 0;  // inclusive
    int x1 = 0, y1 = 0;  // inclusive
    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
};

struct Cluster {
    BoundingBox box;
    uint32_t pixel_count = 0;
    uint8_t peak_intensity = 0;
};

// High-intensity particle-strike candidates in a dark frame.
struct RayDetection {
    std::string source_image_id;
    int64_t timestamp_ms = 0;
    int threshold = 0;
    bool degenerate_threshold = false;
    std::vector<Cluster> clusters;  // sorted by pixel_count descending

    std::string to_json() const;
};

// Binarizes at intensity > threshold and labels 4-connected components.
// Clusters come back sorted by pixel count descending (ties: top-left box
// first). Zero clusters is a normal outcome for a clean frame.
RayDetection detect_clusters(const GrayImage& img, int threshold);

// Extracts the bounding-box region of one cluster for downlink.
GrayImage crop_cluster(const GrayImage& img, const BoundingBox& box);

}  // namespace ipu::services
