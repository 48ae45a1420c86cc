#include "ipu/csp/param_table.hpp"

#include <algorithm>
#include <stdexcept>

namespace ipu::csp {

const char* to_string(ParamError e) {
    switch (e) {
        case ParamError::UnknownParameter: return "UnknownParameter";
        case ParamError::NotWritable: return "NotWritable";
        case ParamError::TypeMismatch: return "TypeMismatch";
        case ParamError::InvalidValue: return "InvalidValue";
    }
    return "Unknown";
}

namespace {

bool value_fits(const ParamValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return s->size() <= kMaxParamStringLength;
    if (const auto* b = std::get_if<Bytes>(&v)) return b->size() <= kMaxParamBlobLength;
    return true;
}

}  // namespace

void ParameterTable::define(const std::string& id, ParamValue value, bool writable,
                            int64_t timestamp_ms) {
    if (id.empty() || id.size() > kMaxParamIdLength)
        throw std::invalid_argument("parameter id length out of range");
    if (!value_fits(value)) throw std::invalid_argument("parameter value exceeds size limit");
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    int64_t ts = timestamp_ms;
    if (it != entries_.end()) ts = std::max(ts, it->second.timestamp_ms);
    entries_[id] = ParamEntry{std::move(value), writable, ts};
}

Expected<ParamEntry, ParamError> ParameterTable::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) return ParamError::UnknownParameter;
    return it->second;
}

Expected<int64_t, ParamError> ParameterTable::set_remote(const std::string& id, ParamValue value,
                                                         int64_t timestamp_ms) {
    return set_impl(id, std::move(value), timestamp_ms, true);
}

Expected<int64_t, ParamError> ParameterTable::set_local(const std::string& id, ParamValue value,
                                                        int64_t timestamp_ms) {
    return set_impl(id, std::move(value), timestamp_ms, false);
}

Expected<int64_t, ParamError> ParameterTable::set_impl(const std::string& id, ParamValue value,
                                                       int64_t timestamp_ms,
                                                       bool enforce_writable) {
    if (!value_fits(value)) return ParamError::InvalidValue;
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) return ParamError::UnknownParameter;
    if (enforce_writable && !it->second.writable) return ParamError::NotWritable;
    if (it->second.value.index() != value.index()) return ParamError::TypeMismatch;
    it->second.value = std::move(value);
    it->second.timestamp_ms = std::max(it->second.timestamp_ms, timestamp_ms);
    return it->second.timestamp_ms;
}

std::vector<std::string> ParameterTable::ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [id, _] : entries_) out.push_back(id);
    return out;
}

}  // namespace ipu::csp
