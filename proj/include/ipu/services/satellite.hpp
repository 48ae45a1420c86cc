#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "ipu/csp/node.hpp"
#include "ipu/services/ftp.hpp"
#include "ipu/services/inference_test.hpp"
#include "ipu/services/slots.hpp"
#include "ipu/services/storage.hpp"
#include "ipu/services/telemetry.hpp"
#include "ipu/services/workload.hpp"

namespace ipu::services {

// A complete payload node: CSP endpoint with file transfer, inference
// self-test, ray detection, workloads and the slot manager bound on ports
// 10-14, plus the core services every node carries. State persists under one
// directory so a node survives process restarts:
//   files/        payload mass storage (FTP root)
//   sessions/     unfinished transfers (manifest JSON + partial data)
//   slots.json    software slot table
//   boot_log.jsonl, telemetry.csv, inference_log.jsonl
class SatelliteNode {
public:
    SatelliteNode(uint8_t address, std::filesystem::path state_dir, uint64_t seed = 1);
    ~SatelliteNode();

    std::shared_ptr<csp::Node> node() { return node_; }
    Storage& storage() { return storage_; }
    SlotTable& slot_table() { return slot_table_; }
    WorkloadRegistry& workloads() { return workloads_; }
    const std::filesystem::path& state_dir() const { return state_dir_; }

    // Installs the reference frame + golden table behind the self-test port.
    void set_inference_fixture(pipeline::Frame frame, infer::GoldenTable table);
    InferenceTestService* inference_service();

    // One slot-machine boot cycle. A remote reboot request triggers this with
    // watchdog_fired = false. SafeMode disables everything but the core
    // services, file transfer and the slot manager.
    BootResult boot(bool watchdog_fired, int64_t now_ms);
    bool safe_mode() const { return safe_mode_; }

    void sample_telemetry(int64_t now_ms);

    // Persists sessions, slot table and pending log lines.
    void flush();

private:
    void bind_services();
    void load_persisted_state();
    void persist_session(const TransferSession& s);
    void drop_session_files(uint16_t id);
    void append_boot_log();

    void handle_ftp(const csp::CspPacket& p, csp::ServiceContext& ctx);
    void handle_inference_test(const csp::CspPacket& p, csp::ServiceContext& ctx);
    void handle_ray_scan(const csp::CspPacket& p, csp::ServiceContext& ctx);
    void handle_workload(const csp::CspPacket& p, csp::ServiceContext& ctx);
    void handle_slots(const csp::CspPacket& p, csp::ServiceContext& ctx);

    std::filesystem::path state_dir_;
    std::shared_ptr<csp::Node> node_;
    Storage storage_;
    std::map<uint16_t, TransferSession> sessions_;
    SlotTable slot_table_;
    size_t boot_log_written_ = 0;
    TelemetrySource telemetry_;
    std::string telemetry_csv_pending_;
    WorkloadRegistry workloads_;
    std::optional<InferenceTestService> infer_test_;
    bool safe_mode_ = false;
};

}  // namespace ipu::services
