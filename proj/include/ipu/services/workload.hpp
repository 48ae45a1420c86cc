#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ipu/common/expected.hpp"
#include "ipu/services/storage.hpp"

namespace ipu::services {

enum class WorkloadError : uint8_t {
    UnknownWorkload,
    Timeout,
    Failed,  // workload reported an error of its own
};

const char* to_string(WorkloadError e);

struct WorkloadDescriptor {
    std::string entry_id;
    std::string args;
    double time_limit_s = 10.0;
};

// Execution context handed to a workload. Outputs are confined to the node's
// storage root; the deadline is cooperative — workloads poll checkpoint() at
// convenient boundaries and must return promptly once it reports false.
class WorkloadContext {
public:
    WorkloadContext(Storage& storage, std::string args, double time_limit_s);

    Storage& storage() { return storage_; }
    const std::string& args() const { return args_; }

    // False once the deadline has passed; the run is then reported Timeout.
    bool checkpoint();
    bool deadline_exceeded() const { return deadline_exceeded_; }

    void log(const std::string& line) { log_ += line + '\n'; }
    const std::string& log_text() const { return log_; }

    void add_output_file(const std::string& rel_path) { outputs_.push_back(rel_path); }
    const std::vector<std::string>& outputs() const { return outputs_; }

private:
    Storage& storage_;
    std::string args_;
    double deadline_s_;
    double start_s_;
    bool deadline_exceeded_ = false;
    std::string log_;
    std::vector<std::string> outputs_;
};

// A workload returns true on success, false to report Failed. Returning after
// checkpoint() turned false is reported as Timeout regardless.
using WorkloadFn = std::function<bool(WorkloadContext&)>;

struct WorkloadReport {
    std::string entry_id;
    std::vector<std::string> output_files;
    std::string log;
    double elapsed_s = 0.0;
};

// In-process registry of user-supplied entry points, keyed by id.
class WorkloadRegistry {
public:
    void register_workload(const std::string& entry_id, WorkloadFn fn);
    std::vector<std::string> ids() const;

    Expected<WorkloadReport, WorkloadError> run(const WorkloadDescriptor& desc,
                                                Storage& storage) const;

private:
    std::map<std::string, WorkloadFn> registry_;
};

}  // namespace ipu::services
