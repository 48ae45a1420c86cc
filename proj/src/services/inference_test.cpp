#include "ipu/services/inference_test.hpp"

#include <utility>

#include "json.hpp"

namespace ipu::services {

using nlohmann::json;

std::string InferenceTestRecord::to_json_line() const {
    json j;
    j["timestamp_ms"] = timestamp_ms;
    j["total_latency_ms"] = total_latency_ms;
    j["logit_digest"] = logit_digest;
    j["pass"] = pass;
    j["error"] = error;
    return j.dump();
}

InferenceTestService::InferenceTestService(pipeline::Frame frame, infer::GoldenTable table)
    : frame_(std::move(frame)), backend_table_(std::move(table)) {
    frame_.validate();
    const auto grid = pipeline::make_patch_grid(frame_.width_px, frame_.height_px);
    if (grid.rows != backend_table_.rows || grid.cols != backend_table_.cols ||
        !backend_table_.complete()) {
        throw std::invalid_argument("inference test: golden table does not cover the frame");
    }
    reference_digest_ = backend_table_.digest();
}

void InferenceTestService::corrupt_backend_table(infer::GoldenTable table) {
    backend_table_ = std::move(table);
}

InferenceTestRecord InferenceTestService::run(int64_t now_ms, int batch_size) {
    auto backend = infer::golden_backend(backend_table_,
                                         size_t(pipeline::kTilePx) * pipeline::kTilePx * 3);
    auto report = pipeline::run_inference(frame_, *backend, batch_size, /*queue_capacity=*/4);

    InferenceTestRecord rec;
    rec.timestamp_ms = now_ms;
    rec.total_latency_ms = report.total_latency_ms;
    if (!report.valid) {
        rec.pass = false;
        rec.error = report.error;
    } else {
        rec.logit_digest = infer::logits_digest(report.per_patch_logits);
        rec.pass = rec.logit_digest == reference_digest_;
        if (!rec.pass) rec.error = "logit digest mismatch against golden table";
    }
    log_.push_back(rec);
    return rec;
}

}  // namespace ipu::services
