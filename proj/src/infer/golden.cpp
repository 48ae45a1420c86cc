#include "ipu/infer/golden.hpp"

#include <bit>
#include <random>
#include <stdexcept>

#include "ipu/common/bytes.hpp"
#include "ipu/kernels/kernels.hpp"
#include "json.hpp"

namespace ipu::infer {

using nlohmann::json;

namespace {

void append_logits_le(Bytes& out, const Logits& v) {
    for (float f : v) {
        uint32_t bits = std::bit_cast<uint32_t>(f);
        for (int k = 0; k < 4; ++k) out.push_back(static_cast<uint8_t>(bits >> (8 * k)));
    }
}

}  // namespace

uint32_t GoldenTable::digest() const {
    Bytes canon;
    canon.reserve(logits.size() * kNumClasses * 4);
    for (const auto& [index, v] : logits) append_logits_le(canon, v);  // map is index-ordered
    return kernels::crc32_update(0xFFFFFFFFu, canon.data(), canon.size()) ^ 0xFFFFFFFFu;
}

uint32_t logits_digest(const std::vector<Logits>& logits) {
    Bytes canon;
    canon.reserve(logits.size() * kNumClasses * 4);
    for (const auto& v : logits) append_logits_le(canon, v);
    return kernels::crc32_update(0xFFFFFFFFu, canon.data(), canon.size()) ^ 0xFFFFFFFFu;
}

std::string GoldenTable::to_json() const {
    // Logits as one base64 float array in index order keeps the file compact
    // enough to travel over the slow link as a single FTP blob.
    Bytes packed;
    json indices = json::array();
    for (const auto& [index, v] : logits) {
        indices.push_back(index);
        append_logits_le(packed, v);
    }
    json j{{"dataset_id", dataset_id},
           {"timestamp_ms", timestamp_ms},
           {"rows", rows},
           {"cols", cols},
           {"indices", indices},
           {"logits_b64", base64_encode(packed)}};
    return j.dump();
}

GoldenTable GoldenTable::from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        GoldenTable t;
        t.dataset_id = j.at("dataset_id").get<std::string>();
        t.timestamp_ms = j.at("timestamp_ms").get<int64_t>();
        t.rows = j.at("rows").get<int>();
        t.cols = j.at("cols").get<int>();
        Bytes packed = base64_decode(j.at("logits_b64").get<std::string>());
        const auto& indices = j.at("indices");
        if (packed.size() != indices.size() * kNumClasses * 4) {
            throw std::invalid_argument("golden table: logit blob length mismatch");
        }
        size_t off = 0;
        for (const auto& idx : indices) {
            Logits v;
            for (int k = 0; k < kNumClasses; ++k) {
                uint32_t bits = 0;
                for (int b = 3; b >= 0; --b) bits = bits << 8 | packed[off + b];
                v[k] = std::bit_cast<float>(bits);
                off += 4;
            }
            t.logits[idx.get<int>()] = v;
        }
        return t;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("golden table: malformed JSON: ") + e.what());
    }
}

GoldenTable GoldenTable::synthetic(int rows, int cols, uint64_t seed) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("golden table: empty grid");
    GoldenTable t;
    t.dataset_id = "synthetic-" + std::to_string(seed);
    t.timestamp_ms = 0;
    t.rows = rows;
    t.cols = cols;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-5.0f, 5.0f);
    for (int i = 0; i < rows * cols; ++i) {
        Logits v;
        for (auto& f : v) f = dist(rng);
        t.logits[i] = v;
    }
    return t;
}

namespace {

class GoldenBackend final : public ClassifierBackend {
public:
    GoldenBackend(GoldenTable table, size_t input_elems)
        : table_(std::move(table)), input_elems_(input_elems) {}

    Precision precision() const override { return Precision::Uint8; }
    size_t input_elems() const override { return input_elems_; }

    Expected<std::vector<Logits>, BackendFault> infer(const TileBatch& batch) override {
        std::vector<Logits> out;
        out.reserve(batch.count);
        for (size_t i = 0; i < batch.count; ++i) {
            auto it = table_.logits.find(batch.indices[i]);
            if (it == table_.logits.end()) {
                return BackendFault{"golden table has no entry for patch index " +
                                    std::to_string(batch.indices[i])};
            }
            out.push_back(it->second);
        }
        return out;
    }

private:
    GoldenTable table_;
    size_t input_elems_;
};

}  // namespace

std::unique_ptr<ClassifierBackend> golden_backend(GoldenTable table, size_t input_elems) {
    return std::make_unique<GoldenBackend>(std::move(table), input_elems);
}

}  // namespace ipu::infer
