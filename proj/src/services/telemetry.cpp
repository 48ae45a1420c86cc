#include "ipu/services/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ipu/common/time.hpp"

namespace ipu::services {

namespace {

// splitmix64 step: cheap, seedable, and stable across platforms.
uint64_t next_u64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double unit_draw(uint64_t& state) {
    return double(next_u64(state) >> 11) * 0x1.0p-53;
}

}  // namespace

TelemetrySource::TelemetrySource(uint64_t seed) : state_(seed ^ 0xA5A5A5A5DEADBEEFull) {}

TelemetrySample TelemetrySource::sample(int64_t now_ms) {
    ++tick_;
    TelemetrySample s;
    s.timestamp_ms = now_ms;
    // Slow oscillation plus jitter keeps consecutive samples plausible.
    const double phase = double(tick_) * 0.37;
    s.cpu_util_pct = std::clamp(35.0 + 25.0 * std::sin(phase) + 10.0 * unit_draw(state_), 0.0, 100.0);
    s.mem_used_bytes = int64_t(180e6 + 40e6 * std::sin(phase * 0.5) + 20e6 * unit_draw(state_));
    s.disk_free_bytes = int64_t(7.2e9 - 1e6 * double(tick_) - 5e5 * unit_draw(state_));
    s.cpu_temp_c = 38.0 + 6.0 * std::sin(phase * 0.21) + 1.5 * unit_draw(state_);
    return s;
}

void publish_telemetry(csp::ParameterTable& params, const TelemetrySample& s,
                       std::string* csv_log) {
    struct Row {
        const char* id;
        csp::ParamValue value;
    };
    const Row rows[4] = {
        {kTelemetryIds[0], s.cpu_util_pct},
        {kTelemetryIds[1], s.mem_used_bytes},
        {kTelemetryIds[2], s.disk_free_bytes},
        {kTelemetryIds[3], s.cpu_temp_c},
    };
    for (const Row& row : rows) {
        params.define(row.id, row.value, /*writable=*/false, s.timestamp_ms);
        if (csv_log) {
            char value_text[32];
            if (std::holds_alternative<double>(row.value)) {
                std::snprintf(value_text, sizeof(value_text), "%.3f",
                              std::get<double>(row.value));
            } else {
                std::snprintf(value_text, sizeof(value_text), "%lld",
                              static_cast<long long>(std::get<int64_t>(row.value)));
            }
            *csv_log += iso8601_utc(s.timestamp_ms);
            *csv_log += ',';
            *csv_log += row.id;
            *csv_log += ',';
            *csv_log += value_text;
            *csv_log += '\n';
        }
    }
}

}  // namespace ipu::services
