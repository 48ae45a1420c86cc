#include "ipu/services/satellite.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "ipu/csp/crc32.hpp"
#include "ipu/services/analysis.hpp"
#include "ipu/services/wire.hpp"
#include "json.hpp"

namespace ipu::services {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

WireStatus status_of(FsError e) {
    switch (e) {
        case FsError::NotFound: return WireStatus::NotFound;
        case FsError::OutsideRoot: return WireStatus::OutsideRoot;
        case FsError::Exists: return WireStatus::Exists;
        case FsError::IoError: return WireStatus::IoError;
    }
    return WireStatus::Failed;
}

Bytes status_reply(WireStatus s) { return WireWriter().u8(uint8_t(s)).take(); }

int64_t ms_of(double now_s) { return std::llround(now_s * 1000.0); }

void append_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::app | std::ios::binary);
    out << text;
}

uint32_t expected_chunk_count(uint64_t total, uint32_t chunk_size) {
    return total == 0 ? 0 : uint32_t((total + chunk_size - 1) / chunk_size);
}

}  // namespace

SatelliteNode::SatelliteNode(uint8_t address, fs::path state_dir, uint64_t seed)
    : state_dir_(std::move(state_dir)),
      node_(std::make_shared<csp::Node>(address, "payload")),
      storage_(state_dir_ / "files"),
      telemetry_(seed ^ (uint64_t{address} << 32)) {
    fs::create_directories(state_dir_ / "sessions");
    load_persisted_state();
    bind_services();

    workloads_.register_workload("noop", [](WorkloadContext&) { return true; });
    workloads_.register_workload("write-file", [](WorkloadContext& ctx) {
        // args: "<relative path>[:<size bytes>]", default 1024 bytes
        std::string path = ctx.args().empty() ? "workload_out.bin" : ctx.args();
        size_t size = 1024;
        if (auto colon = path.rfind(':'); colon != std::string::npos) {
            size = std::stoul(path.substr(colon + 1));
            path.resize(colon);
        }
        Bytes data(size);
        for (size_t i = 0; i < size; ++i) data[i] = uint8_t(i * 131 + 17);
        if (!ctx.storage().write(path, data).ok()) return false;
        ctx.add_output_file(path);
        ctx.log("wrote " + std::to_string(size) + " bytes to " + path);
        return true;
    });
    workloads_.register_workload("spin", [](WorkloadContext& ctx) {
        while (ctx.checkpoint()) std::this_thread::yield();
        return true;  // reported as Timeout: the deadline expired
    });

    node_->set_reboot_hook([this](double now_s) { boot(false, ms_of(now_s)); });
    sample_telemetry(0);
}

SatelliteNode::~SatelliteNode() {
    try {
        flush();
    } catch (...) {
        // Destructor flush is best-effort; explicit flush() reports errors.
    }
}

InferenceTestService* SatelliteNode::inference_service() {
    return infer_test_ ? &*infer_test_ : nullptr;
}

void SatelliteNode::set_inference_fixture(pipeline::Frame frame, infer::GoldenTable table) {
    infer_test_.emplace(std::move(frame), std::move(table));
}

BootResult SatelliteNode::boot(bool watchdog_fired, int64_t now_ms) {
    BootResult res = slot_boot(slot_table_, watchdog_fired, /*ground_confirm=*/false, now_ms);
    safe_mode_ = res.outcome == BootOutcome::SafeMode;
    flush();
    return res;
}

void SatelliteNode::sample_telemetry(int64_t now_ms) {
    publish_telemetry(node_->params(), telemetry_.sample(now_ms), &telemetry_csv_pending_);
}

void SatelliteNode::flush() {
    std::ofstream slots_out(state_dir_ / "slots.json", std::ios::trunc);
    slots_out << slot_table_.to_json() << '\n';
    append_boot_log();
    if (!telemetry_csv_pending_.empty()) {
        append_file(state_dir_ / "telemetry.csv", telemetry_csv_pending_);
        telemetry_csv_pending_.clear();
    }
    for (const auto& [id, session] : sessions_) persist_session(session);
}

void SatelliteNode::append_boot_log() {
    std::string lines;
    for (size_t i = boot_log_written_; i < slot_table_.boot_log.size(); ++i) {
        lines += slot_table_.boot_log[i].to_json_line() + '\n';
    }
    if (!lines.empty()) {
        append_file(state_dir_ / "boot_log.jsonl", lines);
        boot_log_written_ = slot_table_.boot_log.size();
    }
}

void SatelliteNode::load_persisted_state() {
    if (std::ifstream in(state_dir_ / "slots.json"); in) {
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        slot_table_ = SlotTable::from_json(text);
    }
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(state_dir_ / "sessions", ec)) {
        if (entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path());
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        TransferSession s = TransferSession::from_json(text);
        fs::path part = entry.path();
        part.replace_extension(".part");
        if (std::ifstream data(part, std::ios::binary); data) {
            s.data.assign((std::istreambuf_iterator<char>(data)),
                          std::istreambuf_iterator<char>());
        }
        if (s.data.size() != s.manifest.total_bytes) continue;  // stale/corrupt
        sessions_.emplace(s.session_id, std::move(s));
    }
}

void SatelliteNode::persist_session(const TransferSession& s) {
    const fs::path base = state_dir_ / "sessions" / std::to_string(s.session_id);
    fs::path json_path = base;
    json_path += ".json";
    std::ofstream meta(json_path, std::ios::trunc);
    meta << s.to_json() << '\n';
    fs::path part = base;
    part += ".part";
    std::ofstream data(part, std::ios::binary | std::ios::trunc);
    data.write(reinterpret_cast<const char*>(s.data.data()),
               std::streamsize(s.data.size()));
}

void SatelliteNode::drop_session_files(uint16_t id) {
    const fs::path base = state_dir_ / "sessions" / std::to_string(id);
    std::error_code ec;
    fs::path p = base;
    p += ".json";
    fs::remove(p, ec);
    p = base;
    p += ".part";
    fs::remove(p, ec);
}

void SatelliteNode::bind_services() {
    node_->bind(kPortFtp, [this](const csp::CspPacket& p, csp::ServiceContext& ctx) {
        handle_ftp(p, ctx);
    });
    node_->bind(kPortInferenceTest, [this](const csp::CspPacket& p, csp::ServiceContext& ctx) {
        handle_inference_test(p, ctx);
    });
    node_->bind(kPortRayScan, [this](const csp::CspPacket& p, csp::ServiceContext& ctx) {
        handle_ray_scan(p, ctx);
    });
    node_->bind(kPortWorkload, [this](const csp::CspPacket& p, csp::ServiceContext& ctx) {
        handle_workload(p, ctx);
    });
    node_->bind(kPortSlots, [this](const csp::CspPacket& p, csp::ServiceContext& ctx) {
        handle_slots(p, ctx);
    });
}

void SatelliteNode::handle_ftp(const csp::CspPacket& p, csp::ServiceContext& ctx) {
    WireReader r(p.payload);
    const auto op = FtpOp(r.u8());
    switch (op) {
        case FtpOp::UploadInit: {
            const uint16_t id = r.u16();
            const uint32_t chunk_size = r.u32();
            const uint32_t count = r.u32();
            const uint64_t total = r.u64();
            const uint32_t whole_crc = r.u32();
            const std::string name = r.str8();
            if (r.failed() || r.remaining() != 0 || chunk_size < kMinChunkSize ||
                chunk_size > kMaxWireChunkSize || count != expected_chunk_count(total, chunk_size)) {
                return ctx.reply(p, status_reply(WireStatus::BadRequest));
            }
            if (!storage_.resolve(name).ok()) {
                return ctx.reply(p, status_reply(WireStatus::OutsideRoot));
            }
            auto it = sessions_.find(id);
            const bool resumable = it != sessions_.end() &&
                                   it->second.state == TransferState::Active &&
                                   it->second.direction == TransferDirection::Up &&
                                   it->second.manifest.file_name == name &&
                                   it->second.manifest.total_bytes == total &&
                                   it->second.manifest.chunk_size_bytes == chunk_size &&
                                   it->second.manifest.whole_file_crc32 == whole_crc;
            if (!resumable) {
                TransferSession s;
                s.session_id = id;
                s.direction = TransferDirection::Up;
                s.manifest.file_name = name;
                s.manifest.total_bytes = total;
                s.manifest.chunk_size_bytes = chunk_size;
                s.manifest.chunk_count = count;
                s.manifest.per_chunk_crc32.assign(count, 0);
                s.manifest.whole_file_crc32 = whole_crc;
                s.received = ChunkBitmap(count);
                s.data.assign(total, 0);
                it = sessions_.insert_or_assign(id, std::move(s)).first;
                persist_session(it->second);
            }
            return ctx.reply(p, WireWriter()
                                    .u8(uint8_t(WireStatus::Ok))
                                    .u32(it->second.received.popcount())
                                    .take());
        }
        case FtpOp::UploadChunk: {
            const uint16_t id = r.u16();
            const uint32_t index = r.u32();
            const Bytes data = r.rest();
            auto it = sessions_.find(id);
            if (r.failed() || it == sessions_.end() ||
                it->second.state != TransferState::Active ||
                it->second.direction != TransferDirection::Up) {
                return;  // chunks are unacknowledged; stale ones just drop
            }
            TransferSession& s = it->second;
            const auto& m = s.manifest;
            if (index >= m.chunk_count) return;
            const uint64_t offset = uint64_t{index} * m.chunk_size_bytes;
            const uint64_t expect =
                index + 1 < m.chunk_count ? m.chunk_size_bytes : m.total_bytes - offset;
            if (data.size() != expect) return;
            std::copy(data.begin(), data.end(), s.data.begin() + offset);
            s.manifest.per_chunk_crc32[index] = csp::crc32_of(data);
            s.received.set(index);
            return;  // no reply by design
        }
        case FtpOp::UploadBitmap: {
            const uint16_t id = r.u16();
            const uint32_t from = r.u32();
            auto it = sessions_.find(id);
            if (r.failed() || it == sessions_.end()) {
                return ctx.reply(p, status_reply(WireStatus::NoSession));
            }
            const TransferSession& s = it->second;
            if (from >= s.manifest.chunk_count && from != 0) {
                return ctx.reply(p, status_reply(WireStatus::BadRequest));
            }
            const uint32_t nbits =
                std::min(kBitmapWindowBits, s.manifest.chunk_count - from);
            persist_session(s);  // round boundary: checkpoint progress
            return ctx.reply(p, WireWriter()
                                    .u8(uint8_t(WireStatus::Ok))
                                    .u32(from)
                                    .u16(uint16_t(nbits))
                                    .raw(s.received.window(from, nbits))
                                    .take());
        }
        case FtpOp::UploadFinish: {
            const uint16_t id = r.u16();
            auto it = sessions_.find(id);
            if (r.failed() || it == sessions_.end() ||
                it->second.direction != TransferDirection::Up) {
                return ctx.reply(p, status_reply(WireStatus::NoSession));
            }
            TransferSession& s = it->second;
            if (s.state == TransferState::Complete) {  // lost-reply retry
                return ctx.reply(p, status_reply(WireStatus::Ok));
            }
            if (s.state == TransferState::Aborted) {
                return ctx.reply(p, status_reply(WireStatus::CrcMismatch));
            }
            if (!s.received.all_set()) {
                const uint32_t missing = s.manifest.chunk_count - s.received.popcount();
                return ctx.reply(p, WireWriter()
                                        .u8(uint8_t(WireStatus::Incomplete))
                                        .u32(missing)
                                        .take());
            }
            if (csp::crc32_of(s.data) != s.manifest.whole_file_crc32) {
                s.state = TransferState::Aborted;
                persist_session(s);
                return ctx.reply(p, status_reply(WireStatus::CrcMismatch));
            }
            auto written = storage_.write(s.manifest.file_name, s.data);
            if (!written.ok()) {
                return ctx.reply(p, status_reply(status_of(written.error())));
            }
            s.state = TransferState::Complete;
            persist_session(s);
            return ctx.reply(p, status_reply(WireStatus::Ok));
        }
        case FtpOp::DownloadInit: {
            const uint16_t id = r.u16();
            const uint32_t chunk_size = r.u32();
            const std::string name = r.str8();
            if (r.failed() || r.remaining() != 0 || chunk_size < kMinChunkSize ||
                chunk_size > kMaxWireChunkSize) {
                return ctx.reply(p, status_reply(WireStatus::BadRequest));
            }
            auto it = sessions_.find(id);
            const bool reusable = it != sessions_.end() &&
                                  it->second.direction == TransferDirection::Down &&
                                  it->second.manifest.file_name == name &&
                                  it->second.manifest.chunk_size_bytes == chunk_size;
            if (!reusable) {
                auto file = storage_.read(name);
                if (!file.ok()) return ctx.reply(p, status_reply(status_of(file.error())));
                SplitResult split = ftp_split(*file, chunk_size, name);
                TransferSession s;
                s.session_id = id;
                s.direction = TransferDirection::Down;
                s.manifest = std::move(split.manifest);
                s.received = ChunkBitmap(s.manifest.chunk_count);
                s.data = std::move(*file);
                it = sessions_.insert_or_assign(id, std::move(s)).first;
            }
            const auto& m = it->second.manifest;
            return ctx.reply(p, WireWriter()
                                    .u8(uint8_t(WireStatus::Ok))
                                    .u32(m.chunk_count)
                                    .u64(m.total_bytes)
                                    .u32(m.whole_file_crc32)
                                    .take());
        }
        case FtpOp::DownloadChunk: {
            const uint16_t id = r.u16();
            const uint32_t index = r.u32();
            auto it = sessions_.find(id);
            if (r.failed() || it == sessions_.end() ||
                it->second.direction != TransferDirection::Down) {
                return ctx.reply(p, status_reply(WireStatus::NoSession));
            }
            const auto& m = it->second.manifest;
            if (index >= m.chunk_count) {
                return ctx.reply(p, status_reply(WireStatus::BadRequest));
            }
            const uint64_t offset = uint64_t{index} * m.chunk_size_bytes;
            const uint64_t len =
                index + 1 < m.chunk_count ? m.chunk_size_bytes : m.total_bytes - offset;
            const uint8_t* begin = it->second.data.data() + offset;
            return ctx.reply(p, WireWriter()
                                    .u8(uint8_t(WireStatus::Ok))
                                    .u32(index)
                                    .raw(ByteView(begin, size_t(len)))
                                    .take());
        }
        case FtpOp::DownloadDone: {
            const uint16_t id = r.u16();
            if (!r.failed() && sessions_.erase(id)) drop_session_files(id);
            return ctx.reply(p, status_reply(WireStatus::Ok));
        }
        case FtpOp::List: {
            const std::string path = r.str8();
            if (r.failed()) return ctx.reply(p, status_reply(WireStatus::BadRequest));
            auto listing = storage_.list(path);
            if (!listing.ok()) return ctx.reply(p, status_reply(status_of(listing.error())));
            json arr = json::array();
            for (const auto& f : *listing) {
                arr.push_back({{"name", f.name},
                               {"size_bytes", f.size_bytes},
                               {"mtime_ms", f.mtime_ms}});
            }
            const std::string text = arr.dump();
            if (text.size() > 1000) return ctx.reply(p, status_reply(WireStatus::TooLarge));
            return ctx.reply(p, WireWriter().u8(uint8_t(WireStatus::Ok)).str16(text).take());
        }
        case FtpOp::Move:
        case FtpOp::Copy: {
            const bool overwrite = r.u8() != 0;
            const std::string from = r.str8();
            const std::string to = r.str8();
            if (r.failed()) return ctx.reply(p, status_reply(WireStatus::BadRequest));
            const auto res = op == FtpOp::Move ? storage_.move(from, to, overwrite)
                                               : storage_.copy(from, to, overwrite);
            return ctx.reply(p, status_reply(res.ok() ? WireStatus::Ok
                                                      : status_of(res.error())));
        }
        case FtpOp::Remove: {
            const std::string path = r.str8();
            if (r.failed()) return ctx.reply(p, status_reply(WireStatus::BadRequest));
            const auto res = storage_.remove(path);
            return ctx.reply(p, status_reply(res.ok() ? WireStatus::Ok
                                                      : status_of(res.error())));
        }
    }
    ctx.reply(p, status_reply(WireStatus::BadRequest));
}

void SatelliteNode::handle_inference_test(const csp::CspPacket& p, csp::ServiceContext& ctx) {
    WireReader r(p.payload);
    if (InferOp(r.u8()) != InferOp::Run) {
        return ctx.reply(p, status_reply(WireStatus::BadRequest));
    }
    const int batch = r.u16();
    if (r.failed() || batch == 0) return ctx.reply(p, status_reply(WireStatus::BadRequest));
    if (safe_mode_) return ctx.reply(p, status_reply(WireStatus::Failed));
    if (!infer_test_) return ctx.reply(p, status_reply(WireStatus::NotFound));

    InferenceTestRecord rec = infer_test_->run(ms_of(ctx.now_s), batch);
    append_file(state_dir_ / "inference_log.jsonl", rec.to_json_line() + "\n");
    ctx.reply(p, WireWriter()
                     .u8(uint8_t(WireStatus::Ok))
                     .u8(rec.pass ? 1 : 0)
                     .u32(rec.logit_digest)
                     .f64(rec.total_latency_ms)
                     .i64(rec.timestamp_ms)
                     .take());
}

void SatelliteNode::handle_ray_scan(const csp::CspPacket& p, csp::ServiceContext& ctx) {
    WireReader r(p.payload);
    if (RayOp(r.u8()) != RayOp::Scan) {
        return ctx.reply(p, status_reply(WireStatus::BadRequest));
    }
    const std::string image_rel = r.str8();
    if (r.failed()) return ctx.reply(p, status_reply(WireStatus::BadRequest));
    if (safe_mode_) return ctx.reply(p, status_reply(WireStatus::Failed));

    auto base = storage_.resolve(image_rel);
    if (!base.ok()) return ctx.reply(p, status_reply(status_of(base.error())));

    GrayImage img;
    try {
        pipeline::Frame frame = pipeline::load_frame(base->string());
        if (frame.channels != 1) return ctx.reply(p, status_reply(WireStatus::BadRequest));
        img.width = frame.width_px;
        img.height = frame.height_px;
        img.pixels = std::move(frame.data);
    } catch (const std::exception&) {
        return ctx.reply(p, status_reply(WireStatus::NotFound));
    }

    const OtsuResult otsu = otsu_threshold(histogram_of(img));
    RayDetection det = detect_clusters(img, otsu.threshold);
    det.degenerate_threshold = otsu.degenerate;
    det.source_image_id = image_rel;
    det.timestamp_ms = ms_of(ctx.now_s);

    // Stored outputs: the detection report plus one crop per cluster, all
    // fetchable over the file service.
    std::string stem = image_rel;
    if (auto slash = stem.rfind('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
    const std::string det_rel = "detections/" + stem + ".json";
    std::string det_json = det.to_json();
    if (!storage_.write(det_rel, to_bytes(det_json)).ok()) {
        return ctx.reply(p, status_reply(WireStatus::IoError));
    }
    for (size_t i = 0; i < det.clusters.size(); ++i) {
        GrayImage crop = crop_cluster(img, det.clusters[i].box);
        pipeline::Frame f;
        f.width_px = crop.width;
        f.height_px = crop.height;
        f.channels = 1;
        f.data = std::move(crop.pixels);
        auto crop_base = storage_.resolve("detections/" + stem + "_crop" + std::to_string(i));
        pipeline::save_frame(f, crop_base->string());
    }
    ctx.reply(p, WireWriter()
                     .u8(uint8_t(WireStatus::Ok))
                     .u8(det.degenerate_threshold ? 1 : 0)
                     .u8(uint8_t(det.threshold))
                     .u16(uint16_t(std::min<size_t>(det.clusters.size(), 65535)))
                     .str8(det_rel)
                     .take());
}

void SatelliteNode::handle_workload(const csp::CspPacket& p, csp::ServiceContext& ctx) {
    WireReader r(p.payload);
    if (WorkloadOp(r.u8()) != WorkloadOp::Run) {
        return ctx.reply(p, status_reply(WireStatus::BadRequest));
    }
    WorkloadDescriptor desc;
    desc.entry_id = r.str8();
    desc.args = r.str8();
    desc.time_limit_s = r.f64();
    if (r.failed() || desc.time_limit_s <= 0) {
        return ctx.reply(p, status_reply(WireStatus::BadRequest));
    }
    if (safe_mode_) return ctx.reply(p, status_reply(WireStatus::Failed));

    auto res = workloads_.run(desc, storage_);
    const int64_t now_ms = ms_of(ctx.now_s);
    node_->params().define("wl_last_id", desc.entry_id, /*writable=*/false, now_ms);
    if (!res.ok()) {
        node_->params().define("wl_last_status", std::string(to_string(res.error())),
                               /*writable=*/false, now_ms);
        switch (res.error()) {
            case WorkloadError::UnknownWorkload:
                return ctx.reply(p, status_reply(WireStatus::UnknownWorkload));
            case WorkloadError::Timeout:
                return ctx.reply(p, status_reply(WireStatus::Timeout));
            case WorkloadError::Failed:
                return ctx.reply(p, status_reply(WireStatus::Failed));
        }
        return ctx.reply(p, status_reply(WireStatus::Failed));
    }
    node_->params().define("wl_last_status", std::string("ok"), /*writable=*/false, now_ms);
    std::string log = res->log;
    if (log.size() > 512) log.resize(512);
    WireWriter w;
    w.u8(uint8_t(WireStatus::Ok)).str16(log);
    const size_t n_out = std::min<size_t>(res->output_files.size(), 8);
    w.u8(uint8_t(n_out));
    for (size_t i = 0; i < n_out; ++i) w.str8(res->output_files[i]);
    ctx.reply(p, w.take());
}

void SatelliteNode::handle_slots(const csp::CspPacket& p, csp::ServiceContext& ctx) {
    WireReader r(p.payload);
    const auto op = SlotOp(r.u8());
    switch (op) {
        case SlotOp::Status:
            return ctx.reply(
                p, WireWriter().u8(uint8_t(WireStatus::Ok)).str16(slot_table_.to_json()).take());
        case SlotOp::Install: {
            const int slot = r.u8();
            const std::string bundle = r.str8();
            if (r.failed() || bundle.empty()) {
                return ctx.reply(p, status_reply(WireStatus::BadRequest));
            }
            try {
                slot_install(slot_table_, slot, bundle);
            } catch (const std::invalid_argument&) {
                return ctx.reply(p, status_reply(WireStatus::Failed));
            }
            flush();
            return ctx.reply(p, status_reply(WireStatus::Ok));
        }
        case SlotOp::Confirm: {
            if (slot_table_.trial_slot() < 0) {
                return ctx.reply(p, status_reply(WireStatus::Failed));
            }
            BootResult res =
                slot_boot(slot_table_, /*watchdog=*/false, /*confirm=*/true, ms_of(ctx.now_s));
            safe_mode_ = res.outcome == BootOutcome::SafeMode;
            flush();
            return ctx.reply(p, WireWriter()
                                    .u8(uint8_t(WireStatus::Ok))
                                    .str16(slot_table_.boot_log.back().to_json_line())
                                    .take());
        }
    }
    ctx.reply(p, status_reply(WireStatus::BadRequest));
}

}  // namespace ipu::services
