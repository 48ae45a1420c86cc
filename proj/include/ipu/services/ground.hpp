#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ipu/common/expected.hpp"
#include "ipu/csp/network.hpp"
#include "ipu/csp/packet.hpp"
#include "ipu/services/ftp.hpp"
#include "ipu/services/storage.hpp"
#include "ipu/services/wire.hpp"

namespace ipu::services {

// Transport abstraction the ground client runs over: the zero-latency
// in-process router for unit tests, or the link simulator for end-to-end
// runs. `exchange` performs one request/reply attempt; nullopt means the
// request or its reply was lost (the client retries at its own level).
struct SatTransport {
    std::function<void(const csp::CspPacket&)> send;  // fire-and-forget datagram
    std::function<std::optional<Bytes>(const csp::CspPacket&)> exchange;
    std::function<double()> now_s = [] { return 0.0; };
};

// Transport over the in-process router; `ground` must stay alive alongside.
SatTransport transport_over(csp::Network& net, std::shared_ptr<csp::Node> ground);

struct ClientOptions {
    uint8_t ground_address = 1;
    uint8_t satellite_address = 5;
    uint32_t chunk_size = kChunkSizeSlowLink;
    int retry_budget = 16;  // transfer rounds, and attempts for single requests
};

enum class ClientErrorKind : uint8_t {
    Timeout,  // retries exhausted without any reply
    Service,  // satellite answered with a non-Ok status
    Aborted,  // transfer gave up (budget) or failed integrity checks
    Protocol, // malformed reply
};

struct ClientFault {
    ClientErrorKind kind = ClientErrorKind::Timeout;
    WireStatus status = WireStatus::Ok;  // set for Service faults
    std::string detail;
};

const char* to_string(ClientErrorKind k);

struct TransferStats {
    uint32_t chunk_count = 0;
    uint64_t total_bytes = 0;
    uint32_t chunks_sent = 0;      // upload data packets emitted
    uint32_t chunks_received = 0;  // download data replies stored
    uint32_t retransmissions = 0;  // sends/requests beyond one per chunk
    uint32_t rounds = 0;
    bool resumed = false;
    uint32_t resumed_chunks = 0;  // chunks already on the far side at start
};

// Ground-held partial state of a download, persisted between invocations so
// an interrupted fetch resumes without refetching what it has.
struct DownloadResume {
    TransferManifest manifest;
    ChunkBitmap received;
    Bytes partial;

    std::string to_json() const;  // partial stored separately
    static DownloadResume from_json(const std::string& text);
};

// Operator-side access to one satellite node's services.
class GroundClient {
public:
    GroundClient(SatTransport transport, ClientOptions options);

    const ClientOptions& options() const { return options_; }

    Expected<TransferStats, ClientFault> upload(ByteView file, const std::string& remote_name,
                                                uint16_t session_id);

    struct DownloadResult {
        Bytes data;
        TransferStats stats;
    };
    // With `resume`, progress is read from and written back to it; the caller
    // persists it across invocations.
    Expected<DownloadResult, ClientFault> download(const std::string& remote_name,
                                                   uint16_t session_id,
                                                   DownloadResume* resume = nullptr);

    Expected<std::vector<FileInfo>, ClientFault> list(const std::string& path);
    Expected<void, ClientFault> move(const std::string& from, const std::string& to,
                                     bool overwrite);
    Expected<void, ClientFault> copy(const std::string& from, const std::string& to,
                                     bool overwrite);
    Expected<void, ClientFault> remove(const std::string& path);

    struct PingResult {
        double rtt_s = 0.0;
        size_t bytes = 0;
    };
    Expected<PingResult, ClientFault> ping(size_t payload_len = 8);

    struct InferTestResult {
        bool pass = false;
        uint32_t digest = 0;
        double latency_ms = 0.0;
        int64_t timestamp_ms = 0;
    };
    Expected<InferTestResult, ClientFault> inference_test(int batch_size);

    struct RayScanResult {
        bool degenerate = false;
        int threshold = 0;
        uint32_t cluster_count = 0;
        std::string detection_file;
    };
    Expected<RayScanResult, ClientFault> ray_scan(const std::string& image_path);

    struct WorkloadResult {
        std::string log;
        std::vector<std::string> output_files;
    };
    Expected<WorkloadResult, ClientFault> run_workload(const std::string& entry,
                                                       const std::string& args,
                                                       double time_limit_s);

    Expected<std::string, ClientFault> slot_status();  // slot table JSON
    Expected<void, ClientFault> slot_install(int slot, const std::string& bundle_id);
    Expected<std::string, ClientFault> slot_confirm();  // boot record JSON

private:
    csp::CspPacket make_request(uint8_t port, Bytes payload) const;
    // Retries the exchange up to the budget; faults on silence (Timeout) and
    // on any non-Ok status (Service). The returned bytes include the leading
    // status byte.
    Expected<Bytes, ClientFault> request_ok(uint8_t port, const Bytes& payload);

    Expected<void, ClientFault> fetch_bitmap(uint16_t session_id, ChunkBitmap& view);

    SatTransport transport_;
    ClientOptions options_;
};

}  // namespace ipu::services
