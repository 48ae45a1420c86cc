#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ipu/common/bytes.hpp"
#include "ipu/common/expected.hpp"

namespace ipu::csp {

using ParamValue = std::variant<bool, int64_t, double, std::string, Bytes>;

inline constexpr size_t kMaxParamIdLength = 32;
inline constexpr size_t kMaxParamStringLength = 128;
inline constexpr size_t kMaxParamBlobLength = 256;

enum class ParamError {
    UnknownParameter,
    NotWritable,
    TypeMismatch,
    InvalidValue,  // id/string/blob over length limits
};

const char* to_string(ParamError e);

struct ParamEntry {
    ParamValue value;
    bool writable = true;
    int64_t timestamp_ms = 0;
};

// Per-node key/value store of telemetry and control flags. Safe for
// concurrent readers and writers; per-entry updates are atomic under one
// table mutex. Entry timestamps never decrease.
class ParameterTable {
public:
    // Creates or replaces an entry. Local access ignores the writable flag
    // (the owning node publishes read-only telemetry through this).
    void define(const std::string& id, ParamValue value, bool writable, int64_t timestamp_ms);

    Expected<ParamEntry, ParamError> get(const std::string& id) const;

    // Remote set: rejects unknown ids, non-writable entries, and values whose
    // type differs from the current one.
    Expected<int64_t, ParamError> set_remote(const std::string& id, ParamValue value,
                                             int64_t timestamp_ms);

    // Local set: same checks minus writability.
    Expected<int64_t, ParamError> set_local(const std::string& id, ParamValue value,
                                            int64_t timestamp_ms);

    std::vector<std::string> ids() const;

private:
    Expected<int64_t, ParamError> set_impl(const std::string& id, ParamValue value,
                                           int64_t timestamp_ms, bool enforce_writable);

    mutable std::mutex mutex_;
    std::map<std::string, ParamEntry> entries_;
};

}  // namespace ipu::csp
