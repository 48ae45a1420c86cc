#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ipu/infer/golden.hpp"
#include "ipu/pipeline/frame.hpp"
#include "ipu/pipeline/pipeline.hpp"

namespace ipu::services {

struct InferenceTestRecord {
    int64_t timestamp_ms = 0;
    double total_latency_ms = 0.0;
    uint32_t logit_digest = 0;
    bool pass = false;
    std::string error;  // backend fault or digest mismatch description

    std::string to_json_line() const;
};

// On-demand self-test: runs the tiling pipeline over a stored reference frame
// with the golden-logits backend and compares the resulting logit digest with
// the table's own. A mismatch means the compute path corrupted data — the
// fault this check exists to catch.
class InferenceTestService {
public:
    InferenceTestService(pipeline::Frame frame, infer::GoldenTable table);

    // Replaces the table behind the backend while keeping the reference
    // digest; used to inject computational faults in tests.
    void corrupt_backend_table(infer::GoldenTable table);

    InferenceTestRecord run(int64_t now_ms, int batch_size = 16);

    const std::vector<InferenceTestRecord>& log() const { return log_; }
    uint32_t reference_digest() const { return reference_digest_; }

private:
    pipeline::Frame frame_;
    infer::GoldenTable backend_table_;
    uint32_t reference_digest_ = 0;
    std::vector<InferenceTestRecord> log_;
};

}  // namespace ipu::services
