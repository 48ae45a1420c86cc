#include "ipu/services/workload.hpp"

#include <chrono>
#include <stdexcept>

namespace ipu::services {

namespace {

double steady_now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

const char* to_string(WorkloadError e) {
    switch (e) {
        case WorkloadError::UnknownWorkload: return "UnknownWorkload";
        case WorkloadError::Timeout: return "Timeout";
        case WorkloadError::Failed: return "Failed";
    }
    return "?";
}

WorkloadContext::WorkloadContext(Storage& storage, std::string args, double time_limit_s)
    : storage_(storage), args_(std::move(args)), deadline_s_(time_limit_s),
      start_s_(steady_now_s()) {}

bool WorkloadContext::checkpoint() {
    if (!deadline_exceeded_ && steady_now_s() - start_s_ > deadline_s_) {
        deadline_exceeded_ = true;
    }
    return !deadline_exceeded_;
}

void WorkloadRegistry::register_workload(const std::string& entry_id, WorkloadFn fn) {
    if (entry_id.empty() || !fn) {
        throw std::invalid_argument("workload registration needs an id and a handler");
    }
    registry_[entry_id] = std::move(fn);
}

std::vector<std::string> WorkloadRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, fn] : registry_) out.push_back(id);
    return out;
}

Expected<WorkloadReport, WorkloadError> WorkloadRegistry::run(const WorkloadDescriptor& desc,
                                                              Storage& storage) const {
    if (desc.time_limit_s <= 0) throw std::invalid_argument("workload time limit must be > 0");
    auto it = registry_.find(desc.entry_id);
    if (it == registry_.end()) return WorkloadError::UnknownWorkload;

    WorkloadContext ctx(storage, desc.args, desc.time_limit_s);
    const double start = steady_now_s();
    const bool ok = it->second(ctx);
    const double elapsed = steady_now_s() - start;

    if (ctx.deadline_exceeded()) return WorkloadError::Timeout;
    if (!ok) return WorkloadError::Failed;
    return WorkloadReport{desc.entry_id, ctx.outputs(), ctx.log_text(), elapsed};
}

}  // namespace ipu::services
