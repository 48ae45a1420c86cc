#include "ipu/services/analysis.hpp"

#include <algorithm>
#include <stdexcept>

#include "ipu/kernels/kernels.hpp"
#include "json.hpp"

namespace ipu::services {

using nlohmann::json;

void GrayImage::validate() const {
    if (width <= 0 || height <= 0) throw std::invalid_argument("image: empty dimensions");
    if (pixels.size() != size_t(width) * size_t(height)) {
        throw std::invalid_argument("image: pixel buffer does not match dimensions");
    }
}

Histogram histogram_of(const GrayImage& img) {
    img.validate();
    uint32_t counts[256] = {};
    kernels::histogram256(img.pixels.data(), img.pixels.size(), counts);
    Histogram hist{};
    for (int v = 0; v < 256; ++v) hist[v] = counts[v];
    return hist;
}

OtsuResult otsu_threshold(const Histogram& hist) {
    uint64_t total = 0;
    uint64_t weighted_total = 0;
    for (int v = 0; v < 256; ++v) {
        total += hist[v];
        weighted_total += hist[v] * uint64_t(v);
    }
    if (total == 0) throw std::invalid_argument("otsu: empty histogram");

    OtsuResult result;
    double best = 0.0;
    bool found = false;
    uint64_t w0 = 0;      // pixels at or below t
    uint64_t sum0 = 0;    // intensity mass at or below t
    for (int t = 0; t < 255; ++t) {  // t = 255 leaves the upper class empty
        w0 += hist[t];
        sum0 += hist[t] * uint64_t(t);
        const uint64_t w1 = total - w0;
        if (w0 == 0 || w1 == 0) continue;
        const double mu0 = double(sum0) / double(w0);
        const double mu1 = double(weighted_total - sum0) / double(w1);
        const double diff = mu0 - mu1;
        const double variance = double(w0) * double(w1) * diff * diff;
        if (variance > best) {  // strict: the smallest t wins ties
            best = variance;
            result.threshold = t;
            found = true;
        }
    }
    if (!found || best == 0.0) {
        // No threshold separates anything (constant image): report 0 and flag
        // it, since dark frames are the common capture.
        return OtsuResult{0, true};
    }
    return result;
}

std::string RayDetection::to_json() const {
    json j;
    j["source_image_id"] = source_image_id;
    j["timestamp_ms"] = timestamp_ms;
    j["threshold"] = threshold;
    j["degenerate_threshold"] = degenerate_threshold;
    j["clusters"] = json::array();
    for (const auto& c : clusters) {
        j["clusters"].push_back({{"x0", c.box.x0},
                                 {"y0", c.box.y0},
                                 {"x1", c.box.x1},
                                 {"y1", c.box.y1},
                                 {"pixel_count", c.pixel_count},
                                 {"peak_intensity", c.peak_intensity}});
    }
    return j.dump(2);
}

RayDetection detect_clusters(const GrayImage& img, int threshold) {
    img.validate();
    if (threshold < 0 || threshold > 255) {
        throw std::invalid_argument("detect_clusters: threshold outside 0-255");
    }
    RayDetection out;
    out.threshold = threshold;

    const size_t n = img.pixels.size();
    std::vector<uint8_t> mask(n);
    kernels::binarize_gt(img.pixels.data(), mask.data(), n, uint8_t(threshold));

    // Iterative flood fill over the binary mask, 4-connected. `mask` doubles
    // as the visited set: pixels are cleared as they are claimed.
    std::vector<size_t> stack;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const size_t start = size_t(y) * img.width + x;
            if (!mask[start]) continue;
            Cluster c;
            c.box = {x, y, x, y};
            mask[start] = 0;
            stack.assign(1, start);
            while (!stack.empty()) {
                const size_t idx = stack.back();
                stack.pop_back();
                const int px = int(idx % img.width);
                const int py = int(idx / img.width);
                ++c.pixel_count;
                c.peak_intensity = std::max(c.peak_intensity, img.pixels[idx]);
                c.box.x0 = std::min(c.box.x0, px);
                c.box.x1 = std::max(c.box.x1, px);
                c.box.y0 = std::min(c.box.y0, py);
                c.box.y1 = std::max(c.box.y1, py);
                const size_t neighbors[4] = {idx - 1, idx + 1, idx - img.width, idx + img.width};
                const bool valid[4] = {px > 0, px + 1 < img.width, py > 0, py + 1 < img.height};
                for (int k = 0; k < 4; ++k) {
                    if (valid[k] && mask[neighbors[k]]) {
                        mask[neighbors[k]] = 0;
                        stack.push_back(neighbors[k]);
                    }
                }
            }
            out.clusters.push_back(c);
        }
    }

    std::sort(out.clusters.begin(), out.clusters.end(), [](const Cluster& a, const Cluster& b) {
        if (a.pixel_count != b.pixel_count) return a.pixel_count > b.pixel_count;
        if (a.box.y0 != b.box.y0) return a.box.y0 < b.box.y0;
        return a.box.x0 < b.box.x0;
    });
    return out;
}

GrayImage crop_cluster(const GrayImage& img, const BoundingBox& box) {
    img.validate();
    if (box.x0 < 0 || box.y0 < 0 || box.x1 >= img.width || box.y1 >= img.height ||
        box.x0 > box.x1 || box.y0 > box.y1) {
        throw std::out_of_range("crop_cluster: box outside image");
    }
    GrayImage crop;
    crop.width = box.width();
    crop.height = box.height();
    crop.pixels.resize(size_t(crop.width) * crop.height);
    for (int y = 0; y < crop.height; ++y) {
        const uint8_t* src = img.pixels.data() + size_t(box.y0 + y) * img.width + box.x0;
        std::copy(src, src + crop.width, crop.pixels.begin() + size_t(y) * crop.width);
    }
    return crop;
}

}  // namespace ipu::services
