#include "ipu/services/ground.hpp"

#include <algorithm>

#include "ipu/csp/crc32.hpp"
#include "json.hpp"

namespace ipu::services {

using nlohmann::json;

const char* to_string(ClientErrorKind k) {
    switch (k) {
        case ClientErrorKind::Timeout: return "Timeout";
        case ClientErrorKind::Service: return "Service";
        case ClientErrorKind::Aborted: return "Aborted";
        case ClientErrorKind::Protocol: return "Protocol";
    }
    return "?";
}

SatTransport transport_over(csp::Network& net, std::shared_ptr<csp::Node> ground) {
    auto inbox = std::make_shared<csp::Inbox>(*ground, kGroundServicePort);
    SatTransport t;
    t.send = [&net](const csp::CspPacket& p) { net.route_and_deliver(p); };
    t.exchange = [&net, inbox](const csp::CspPacket& p) -> std::optional<Bytes> {
        net.route_and_deliver(p);
        if (auto reply = inbox->pop()) return std::move(reply->payload);
        return std::nullopt;
    };
    t.now_s = [&net] { return net.now_s(); };
    return t;
}

std::string DownloadResume::to_json() const {
    json j;
    j["manifest"] = json::parse(manifest.to_json());
    j["received_bits"] = base64_encode(received.raw());
    return j.dump(2);
}

DownloadResume DownloadResume::from_json(const std::string& text) {
    DownloadResume r;
    try {
        json j = json::parse(text);
        r.manifest = TransferManifest::from_json(j.at("manifest").dump());
        r.received.restore(r.manifest.chunk_count,
                           base64_decode(j.at("received_bits").get<std::string>()));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("resume JSON: ") + e.what());
    }
    return r;
}

GroundClient::GroundClient(SatTransport transport, ClientOptions options)
    : transport_(std::move(transport)), options_(options) {
    if (options_.chunk_size < kMinChunkSize || options_.chunk_size > kMaxWireChunkSize) {
        throw std::invalid_argument("client chunk size outside 64-1000 bytes");
    }
    if (options_.retry_budget < 1) throw std::invalid_argument("retry budget must be >= 1");
}

csp::CspPacket GroundClient::make_request(uint8_t port, Bytes payload) const {
    csp::CspPacket p;
    p.priority = 1;
    p.src_addr = options_.ground_address;
    p.dst_addr = options_.satellite_address;
    p.dst_port = port;
    p.src_port = kGroundServicePort;
    p.flags = csp::kFlagCrc;
    p.payload = std::move(payload);
    return p;
}

Expected<Bytes, ClientFault> GroundClient::request_ok(uint8_t port, const Bytes& payload) {
    for (int attempt = 0; attempt < options_.retry_budget; ++attempt) {
        auto reply = transport_.exchange(make_request(port, payload));
        if (!reply) continue;
        if (reply->empty()) {
            return ClientFault{ClientErrorKind::Protocol, WireStatus::Ok, "empty reply"};
        }
        const auto status = WireStatus((*reply)[0]);
        if (status != WireStatus::Ok) {
            return ClientFault{ClientErrorKind::Service, status, to_string(status)};
        }
        return std::move(*reply);
    }
    return ClientFault{ClientErrorKind::Timeout, WireStatus::Ok, "no reply after retries"};
}

Expected<void, ClientFault> GroundClient::fetch_bitmap(uint16_t session_id, ChunkBitmap& view) {
    for (uint32_t from = 0; from < view.count() || from == 0; from += kBitmapWindowBits) {
        auto reply = request_ok(
            kPortFtp,
            WireWriter().u8(uint8_t(FtpOp::UploadBitmap)).u16(session_id).u32(from).take());
        if (!reply.ok()) return reply.error();
        WireReader r(*reply);
        r.u8();  // status
        const uint32_t got_from = r.u32();
        const uint32_t nbits = r.u16();
        const Bytes packed = r.rest();
        if (r.failed() || got_from != from) {
            return ClientFault{ClientErrorKind::Protocol, WireStatus::Ok, "bad bitmap reply"};
        }
        view.merge_window(from, nbits, packed);
        if (view.count() == 0) break;
    }
    return {};
}

Expected<TransferStats, ClientFault> GroundClient::upload(ByteView file,
                                                          const std::string& remote_name,
                                                          uint16_t session_id) {
    SplitResult split = ftp_split(file, options_.chunk_size, remote_name);
    const TransferManifest& m = split.manifest;

    TransferStats stats;
    stats.chunk_count = m.chunk_count;
    stats.total_bytes = m.total_bytes;

    auto init = request_ok(kPortFtp, WireWriter()
                                         .u8(uint8_t(FtpOp::UploadInit))
                                         .u16(session_id)
                                         .u32(m.chunk_size_bytes)
                                         .u32(m.chunk_count)
                                         .u64(m.total_bytes)
                                         .u32(m.whole_file_crc32)
                                         .str8(m.file_name)
                                         .take());
    if (!init.ok()) return init.error();
    {
        WireReader r(*init);
        r.u8();
        stats.resumed_chunks = r.u32();
        if (r.failed()) {
            return ClientFault{ClientErrorKind::Protocol, WireStatus::Ok, "bad init reply"};
        }
        stats.resumed = stats.resumed_chunks > 0;
    }

    ChunkBitmap view(m.chunk_count);
    if (stats.resumed) {
        auto fetched = fetch_bitmap(session_id, view);
        if (!fetched.ok()) return fetched.error();
    }

    for (int round = 0; round < options_.retry_budget; ++round) {
        const auto missing = view.missing();
        if (missing.empty()) break;
        ++stats.rounds;
        for (uint32_t idx : missing) {
            transport_.send(make_request(kPortFtp, WireWriter()
                                                       .u8(uint8_t(FtpOp::UploadChunk))
                                                       .u16(session_id)
                                                       .u32(idx)
                                                       .raw(split.chunks[idx])
                                                       .take()));
            ++stats.chunks_sent;
        }
        auto fetched = fetch_bitmap(session_id, view);
        if (!fetched.ok() && fetched.error().kind != ClientErrorKind::Timeout) {
            return fetched.error();
        }
    }

    const uint32_t fresh = m.chunk_count - stats.resumed_chunks;
    stats.retransmissions = stats.chunks_sent > fresh ? stats.chunks_sent - fresh : 0;

    if (!view.all_set()) {
        return ClientFault{ClientErrorKind::Aborted, WireStatus::Incomplete,
                           "retry budget exhausted with chunks still missing"};
    }

    auto fin = request_ok(kPortFtp,
                          WireWriter().u8(uint8_t(FtpOp::UploadFinish)).u16(session_id).take());
    if (!fin.ok()) {
        if (fin.error().kind == ClientErrorKind::Service) {
            return ClientFault{ClientErrorKind::Aborted, fin.error().status,
                               "finish rejected: " + fin.error().detail};
        }
        return fin.error();
    }
    return stats;
}

Expected<GroundClient::DownloadResult, ClientFault> GroundClient::download(
    const std::string& remote_name, uint16_t session_id, DownloadResume* resume) {
    auto init = request_ok(kPortFtp, WireWriter()
                                         .u8(uint8_t(FtpOp::DownloadInit))
                                         .u16(session_id)
                                         .u32(options_.chunk_size)
                                         .str8(remote_name)
                                         .take());
    if (!init.ok()) return init.error();

    TransferManifest m;
    m.file_name = remote_name;
    m.chunk_size_bytes = options_.chunk_size;
    {
        WireReader r(*init);
        r.u8();
        m.chunk_count = r.u32();
        m.total_bytes = r.u64();
        m.whole_file_crc32 = r.u32();
        if (r.failed()) {
            return ClientFault{ClientErrorKind::Protocol, WireStatus::Ok, "bad init reply"};
        }
        m.per_chunk_crc32.assign(m.chunk_count, 0);
    }

    TransferStats stats;
    stats.chunk_count = m.chunk_count;
    stats.total_bytes = m.total_bytes;

    ChunkBitmap view(m.chunk_count);
    Bytes data(m.total_bytes, 0);
    if (resume && resume->received.count() == m.chunk_count &&
        resume->manifest.whole_file_crc32 == m.whole_file_crc32 &&
        resume->partial.size() == m.total_bytes) {
        view = resume->received;
        data = resume->partial;
        stats.resumed_chunks = view.popcount();
        stats.resumed = stats.resumed_chunks > 0;
    }

    uint32_t requests = 0;
    for (int round = 0; round < options_.retry_budget; ++round) {
        const auto missing = view.missing();
        if (missing.empty()) break;
        ++stats.rounds;
        for (uint32_t idx : missing) {
            ++requests;
            auto reply = transport_.exchange(
                make_request(kPortFtp, WireWriter()
                                           .u8(uint8_t(FtpOp::DownloadChunk))
                                           .u16(session_id)
                                           .u32(idx)
                                           .take()));
            if (!reply) continue;  // lost somewhere; next round retries
            WireReader r(*reply);
            const auto status = WireStatus(r.u8());
            if (status != WireStatus::Ok) {
                return ClientFault{ClientErrorKind::Service, status, to_string(status)};
            }
            const uint32_t got = r.u32();
            const Bytes chunk = r.rest();
            const uint64_t offset = uint64_t{idx} * m.chunk_size_bytes;
            const uint64_t expect =
                idx + 1 < m.chunk_count ? m.chunk_size_bytes : m.total_bytes - offset;
            if (r.failed() || got != idx || chunk.size() != expect) {
                return ClientFault{ClientErrorKind::Protocol, WireStatus::Ok,
                                   "bad chunk reply"};
            }
            std::copy(chunk.begin(), chunk.end(), data.begin() + offset);
            view.set(idx);
            ++stats.chunks_received;
        }
    }
    stats.retransmissions =
        requests > stats.chunks_received ? requests - stats.chunks_received : 0;

    if (resume) {
        resume->manifest = m;
        resume->received = view;
        resume->partial = data;
    }
    if (!view.all_set()) {
        return ClientFault{ClientErrorKind::Aborted, WireStatus::Incomplete,
                           "retry budget exhausted with chunks still missing"};
    }
    if (csp::crc32_of(data) != m.whole_file_crc32) {
        return ClientFault{ClientErrorKind::Aborted, WireStatus::CrcMismatch,
                           "assembled file failed the whole-file checksum"};
    }
    // Best-effort server-side cleanup; the data is already safe locally.
    request_ok(kPortFtp, WireWriter().u8(uint8_t(FtpOp::DownloadDone)).u16(session_id).take());
    return DownloadResult{std::move(data), stats};
}

Expected<std::vector<FileInfo>, ClientFault> GroundClient::list(const std::string& path) {
    auto reply =
        request_ok(kPortFtp, WireWriter().u8(uint8_t(FtpOp::List)).str8(path).take());
    if (!reply.ok()) return reply.error();
    WireReader r(*reply);
    r.u8();
    const std::string text = r.str16();
    if (r.failed()) return ClientFault{ClientErrorKind::Protocol, WireStatus::Ok, "bad list"};
    std::vector<FileInfo> out;
    try {
        for (const auto& item : json::parse(text)) {
            out.push_back(FileInfo{item.at("name").get<std::string>(),
                                   item.at("size_bytes").get<uint64_t>(),
                                   item.at("mtime_ms").get<int64_t>()});
        }
    } catch (const json::exception&) {
        return ClientFault{ClientErrorKind::Protocol, WireStatus::Ok, "bad list JSON"};
    }
    return out;
}

Expected<void, ClientFault> GroundClient::move(const std::string& from, const std::string& to,
                                               bool overwrite) {
    auto reply = request_ok(kPortFtp, WireWriter()
                                          .u8(uint8_t(FtpOp::Move))
                                          .u8(overwrite ? 1 : 0)
                                          .str8(from)
                                          .str8(to)
                                          .take());
    if (!reply.ok()) return reply.error();
    return {};
}

Expected<void, ClientFault> GroundClient::copy(const std::string& from, const std::string& to,
                                               bool overwrite) {
    auto reply = request_ok(kPortFtp, WireWriter()
                                          .u8(uint8_t(FtpOp::Copy))
                                          .u8(overwrite ? 1 : 0)
                                          .str8(from)
                                          .str8(to)
                                          .take());
    if (!reply.ok()) return reply.error();
    return {};
}

Expected<void, ClientFault> GroundClient::remove(const std::string& path) {
    auto reply =
        request_ok(kPortFtp, WireWriter().u8(uint8_t(FtpOp::Remove)).str8(path).take());
    if (!reply.ok()) return reply.error();
    return {};
}

Expected<GroundClient::PingResult, ClientFault> GroundClient::ping(size_t payload_len) {
    Bytes probe(payload_len);
    for (size_t i = 0; i < payload_len; ++i) probe[i] = uint8_t(i);
    for (int attempt = 0; attempt < options_.retry_budget; ++attempt) {
        const double start = transport_.now_s();
        auto reply = transport_.exchange(make_request(csp::kPortPing, probe));
        if (!reply) continue;
        if (*reply != probe) {
            return ClientFault{ClientErrorKind::Protocol, WireStatus::Ok, "echo mismatch"};
        }
        return PingResult{transport_.now_s() - start, payload_len};
    }
    return ClientFault{ClientErrorKind::Timeout, WireStatus::Ok, "no echo after retries"};
}

Expected<GroundClient::InferTestResult, ClientFault> GroundClient::inference_test(
    int batch_size) {
    if (batch_size < 1 || batch_size > 65535) {
        throw std::invalid_argument("batch size outside 1-65535");
    }
    auto reply = request_ok(kPortInferenceTest, WireWriter()
                                                    .u8(uint8_t(InferOp::Run))
                                                    .u16(uint16_t(batch_size))
                                                    .take());
    if (!reply.ok()) return reply.error();
    WireReader r(*reply);
    r.u8();
    InferTestResult out;
    out.pass = r.u8() != 0;
    out.digest = r.u32();
    out.latency_ms = r.f64();
    out.timestamp_ms = r.i64();
    if (r.failed()) {
        return ClientFault{ClientErrorKind::Protocol, WireStatus::Ok, "bad test reply"};
    }
    return out;
}

Expected<GroundClient::RayScanResult, ClientFault> GroundClient::ray_scan(
    const std::string& image_path) {
    auto reply = request_ok(kPortRayScan,
                            WireWriter().u8(uint8_t(RayOp::Scan)).str8(image_path).take());
    if (!reply.ok()) return reply.error();
    WireReader r(*reply);
    r.u8();
    RayScanResult out;
    out.degenerate = r.u8() != 0;
    out.threshold = r.u8();
    out.cluster_count = r.u16();
    out.detection_file = r.str8();
    if (r.failed()) {
        return ClientFault{ClientErrorKind::Protocol, WireStatus::Ok, "bad scan reply"};
    }
    return out;
}

Expected<GroundClient::WorkloadResult, ClientFault> GroundClient::run_workload(
    const std::string& entry, const std::string& args, double time_limit_s) {
    auto reply = request_ok(kPortWorkload, WireWriter()
                                               .u8(uint8_t(WorkloadOp::Run))
                                               .str8(entry)
                                               .str8(args)
                                               .f64(time_limit_s)
                                               .take());
    if (!reply.ok()) return reply.error();
    WireReader r(*reply);
    r.u8();
    WorkloadResult out;
    out.log = r.str16();
    const int n = r.u8();
    for (int i = 0; i < n; ++i) out.output_files.push_back(r.str8());
    if (r.failed()) {
        return ClientFault{ClientErrorKind::Protocol, WireStatus::Ok, "bad workload reply"};
    }
    return out;
}

Expected<std::string, ClientFault> GroundClient::slot_status() {
    auto reply = request_ok(kPortSlots, WireWriter().u8(uint8_t(SlotOp::Status)).take());
    if (!reply.ok()) return reply.error();
    WireReader r(*reply);
    r.u8();
    std::string text = r.str16();
    if (r.failed()) {
        return ClientFault{ClientErrorKind::Protocol, WireStatus::Ok, "bad slots reply"};
    }
    return text;
}

Expected<void, ClientFault> GroundClient::slot_install(int slot, const std::string& bundle_id) {
    if (slot < 0 || slot > 3) throw std::invalid_argument("slot outside 0-3");
    auto reply = request_ok(kPortSlots, WireWriter()
                                            .u8(uint8_t(SlotOp::Install))
                                            .u8(uint8_t(slot))
                                            .str8(bundle_id)
                                            .take());
    if (!reply.ok()) return reply.error();
    return {};
}

Expected<std::string, ClientFault> GroundClient::slot_confirm() {
    auto reply = request_ok(kPortSlots, WireWriter().u8(uint8_t(SlotOp::Confirm)).take());
    if (!reply.ok()) return reply.error();
    WireReader r(*reply);
    r.u8();
    std::string text = r.str16();
    if (r.failed()) {
        return ClientFault{ClientErrorKind::Protocol, WireStatus::Ok, "bad confirm reply"};
    }
    return text;
}

}  // namespace ipu::services
