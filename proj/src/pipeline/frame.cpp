#include "ipu/pipeline/frame.hpp"

#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace ipu::pipeline {

using nlohmann::json;

void Frame::validate() const {
    if (width_px <= 0 || height_px <= 0 || channels <= 0) {
        throw std::invalid_argument("frame dimensions must be positive");
    }
    if (data.size() != static_cast<size_t>(width_px) * height_px * channels) {
        throw std::invalid_argument("frame data length disagrees with dimensions");
    }
}

Frame Frame::random(int width_px, int height_px, uint64_t seed) {
    Frame f;
    f.width_px = width_px;
    f.height_px = height_px;
    f.data.resize(static_cast<size_t>(width_px) * height_px * f.channels);
    std::mt19937_64 rng(seed);
    size_t i = 0;
    // Draw 8 bytes per engine call; the tail reuses the last word.
    for (; i + 8 <= f.data.size(); i += 8) {
        uint64_t word = rng();
        for (int k = 0; k < 8; ++k) f.data[i + k] = static_cast<uint8_t>(word >> (8 * k));
    }
    for (uint64_t word = rng(); i < f.data.size(); ++i, word >>= 8) {
        f.data[i] = static_cast<uint8_t>(word);
    }
    f.validate();
    return f;
}

void save_frame(const Frame& frame, const std::string& path_base) {
    frame.validate();
    std::ofstream raw(path_base + ".raw", std::ios::binary | std::ios::trunc);
    if (!raw) throw std::runtime_error("cannot write " + path_base + ".raw");
    raw.write(reinterpret_cast<const char*>(frame.data.data()),
              static_cast<std::streamsize>(frame.data.size()));
    if (!raw) throw std::runtime_error("short write to " + path_base + ".raw");

    json sidecar{{"width", frame.width_px}, {"height", frame.height_px},
                 {"channels", frame.channels}};
    std::ofstream meta(path_base + ".json", std::ios::trunc);
    if (!meta) throw std::runtime_error("cannot write " + path_base + ".json");
    meta << sidecar.dump(2) << '\n';
}

Frame load_frame(const std::string& path_base) {
    std::ifstream meta(path_base + ".json");
    if (!meta) throw std::invalid_argument("missing sidecar " + path_base + ".json");
    json sidecar;
    try {
        meta >> sidecar;
    } catch (const json::exception& e) {
        throw std::invalid_argument("bad sidecar " + path_base + ".json: " + e.what());
    }
    Frame f;
    f.width_px = sidecar.at("width").get<int>();
    f.height_px = sidecar.at("height").get<int>();
    f.channels = sidecar.value("channels", 3);

    std::ifstream raw(path_base + ".raw", std::ios::binary);
    if (!raw) throw std::invalid_argument("missing frame data " + path_base + ".raw");
    f.data.assign(std::istreambuf_iterator<char>(raw), std::istreambuf_iterator<char>());
    f.validate();
    return f;
}

}  // namespace ipu::pipeline
