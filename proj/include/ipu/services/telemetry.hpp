#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ipu/csp/param_table.hpp"

namespace ipu::services {

// Housekeeping parameter ids published by every payload node. All read-only
// over the network: remote sets come back NotWritable.
inline constexpr const char* kTelemetryIds[4] = {
    "cpu_util_pct",
    "mem_used_bytes",
    "disk_free_bytes",
    "cpu_temp_c",
};

struct TelemetrySample {
    int64_t timestamp_ms = 0;
    double cpu_util_pct = 0.0;
    int64_t mem_used_bytes = 0;
    int64_t disk_free_bytes = 0;
    double cpu_temp_c = 0.0;
};

// Deterministic housekeeping source: values follow slow pseudo-random walks
// seeded per node, standing in for /proc and sensor reads at desk scale.
class TelemetrySource {
public:
    explicit TelemetrySource(uint64_t seed);

    TelemetrySample sample(int64_t now_ms);

private:
    uint64_t state_;
    uint64_t tick_ = 0;
};

// Publishes a sample into the node's parameter table (creating the entries
// read-only on first use) and appends one CSV row per parameter to `csv_log`
// in the format: iso_timestamp,param_id,value
void publish_telemetry(csp::ParameterTable& params, const TelemetrySample& s,
                       std::string* csv_log);

}  // namespace ipu::services
