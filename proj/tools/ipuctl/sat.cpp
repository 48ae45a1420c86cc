// The `sat` command group: operator access to one satellite node over either
// an in-process simulated link (default, fully deterministic under --seed) or
// a TCP bridge carrying KISS-framed packets to a `serve` process.

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cli_common.hpp"
#include "ipu/csp/crc32.hpp"
#include "ipu/csp/kiss.hpp"
#include "ipu/csp/param_protocol.hpp"
#include "ipu/infer/golden.hpp"
#include "ipu/pipeline/frame.hpp"
#include "ipu/services/ground.hpp"
#include "ipu/services/satellite.hpp"
#include "ipu/sim/link.hpp"
#include "json.hpp"

namespace ipuctl {
namespace {

using nlohmann::json;
namespace csp = ipu::csp;
namespace services = ipu::services;
namespace sim = ipu::sim;
namespace fs = std::filesystem;
using ipu::Bytes;
using ipu::to_bytes;

// ----------------------------------------------------------- topology -------

struct Topology {
    std::string mode = "sim";  // "sim" or "tcp"
    uint8_t ground_address = 1;
    uint8_t satellite_address = 5;
    std::string state_dir = "ipu-sat-state";
    uint64_t satellite_seed = 1;
    sim::LinkConfig uplink;
    sim::LinkConfig downlink;
    std::string connect = "127.0.0.1:7878";
};

Topology load_topology(const std::string& path) {
    Topology t;
    if (path.empty()) return t;
    json j;
    try {
        j = json::parse(slurp_file(path));
        t.mode = j.value("mode", t.mode);
        if (t.mode != "sim" && t.mode != "tcp") {
            throw std::invalid_argument("mode must be \"sim\" or \"tcp\"");
        }
        const int ga = j.value("ground_address", int(t.ground_address));
        const int sa = j.value("satellite_address", int(t.satellite_address));
        if (ga < 0 || ga > int(csp::kMaxAddress) || sa < 0 || sa > int(csp::kMaxAddress) ||
            ga == sa) {
            throw std::invalid_argument("addresses must be distinct and within 0..63");
        }
        t.ground_address = uint8_t(ga);
        t.satellite_address = uint8_t(sa);
        t.state_dir = j.value("state_dir", t.state_dir);
        t.satellite_seed = j.value("satellite_seed", t.satellite_seed);
        if (j.contains("uplink")) t.uplink = sim::LinkConfig::from_json(j.at("uplink").dump());
        if (j.contains("downlink")) {
            t.downlink = sim::LinkConfig::from_json(j.at("downlink").dump());
        }
        t.connect = j.value("connect", t.connect);
    } catch (const std::exception& e) {
        throw CliError(kExitInput, path + ": " + e.what());
    }
    return t;
}

// ----------------------------------------------------------- transport ------

// Everything one invocation talks through. Sim mode owns the whole satellite;
// tcp mode owns a socket. Destruction order flushes satellite state last.
struct SatRig {
    // sim mode
    std::unique_ptr<services::SatelliteNode> satellite;
    std::shared_ptr<csp::Node> ground;
    std::unique_ptr<sim::LinkSim> link;
    // tcp mode
    int fd = -1;
    Bytes residual;
    double timeout_s = 5.0;
    uint8_t ground_address = 1;

    services::SatTransport transport;

    ~SatRig() {
        if (fd >= 0) ::close(fd);
    }
};

bool write_all(int fd, const Bytes& data) {
    size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n <= 0) return false;
        off += size_t(n);
    }
    return true;
}

int connect_tcp(const std::string& endpoint) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string::npos) {
        throw CliError(kExitInput, "connect endpoint must be host:port, got " + endpoint);
    }
    const std::string host = endpoint.substr(0, colon);
    const std::string port = endpoint.substr(colon + 1);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
        throw CliError(kExitTimeout, "cannot resolve " + endpoint);
    }
    int fd = -1;
    for (addrinfo* it = res; it != nullptr; it = it->ai_next) {
        fd = ::socket(it->ai_family, it->ai_socktype, it->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, it->ai_addr, it->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    freeaddrinfo(res);
    if (fd < 0) throw CliError(kExitTimeout, "cannot connect to " + endpoint);
    return fd;
}

void build_tcp_transport(SatRig& rig) {
    SatRig* r = &rig;
    rig.transport.send = [r](const csp::CspPacket& p) {
        write_all(r->fd, csp::kiss_frame(csp::encode_packet(p)));
    };
    rig.transport.exchange = [r](const csp::CspPacket& p) -> std::optional<Bytes> {
        if (!write_all(r->fd, csp::kiss_frame(csp::encode_packet(p)))) return std::nullopt;
        const auto deadline =
            std::chrono::steady_clock::now() +
            std::chrono::milliseconds(int64_t(r->timeout_s * 1000.0));
        for (;;) {
            // Frames already buffered from an earlier read are served first.
            auto unframed = csp::kiss_unframe(r->residual);
            r->residual = std::move(unframed.residual);
            for (const auto& frame : unframed.frames) {
                auto decoded = csp::decode_packet(frame);
                if (!decoded.ok()) continue;
                if (decoded->dst_addr != r->ground_address) continue;
                return decoded->payload;
            }
            const auto left = deadline - std::chrono::steady_clock::now();
            const auto left_ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(left).count();
            if (left_ms <= 0) return std::nullopt;
            pollfd pfd{r->fd, POLLIN, 0};
            const int ready = ::poll(&pfd, 1, int(left_ms));
            if (ready <= 0) return std::nullopt;
            uint8_t buf[4096];
            const ssize_t n = ::recv(r->fd, buf, sizeof buf, 0);
            if (n <= 0) return std::nullopt;  // peer closed
            r->residual.insert(r->residual.end(), buf, buf + n);
        }
    };
    rig.transport.now_s = [] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
            .count();
    };
}

std::unique_ptr<SatRig> build_rig(const Topology& topo, std::optional<uint64_t> seed_override,
                                  double timeout_s) {
    auto rig = std::make_unique<SatRig>();
    rig->timeout_s = timeout_s;
    rig->ground_address = topo.ground_address;
    if (topo.mode == "tcp") {
        rig->fd = connect_tcp(topo.connect);
        build_tcp_transport(*rig);
        return rig;
    }
    sim::LinkConfig up = topo.uplink;
    sim::LinkConfig down = topo.downlink;
    uint64_t sat_seed = topo.satellite_seed;
    if (seed_override) {
        sat_seed = *seed_override;
        up.seed = *seed_override;
        down.seed = *seed_override ^ 0x9E3779B97F4A7C15ULL;  // decorrelate directions
    }
    std::error_code ec;
    fs::create_directories(topo.state_dir, ec);
    if (ec) throw CliError(kExitInput, "cannot create state dir " + topo.state_dir);
    rig->satellite =
        std::make_unique<services::SatelliteNode>(topo.satellite_address, topo.state_dir, sat_seed);
    // Deterministic self-test fixture: same seed, same reference digest.
    rig->satellite->set_inference_fixture(ipu::pipeline::Frame::random(448, 448, sat_seed),
                                          ipu::infer::GoldenTable::synthetic(2, 2, sat_seed + 1));
    rig->ground = std::make_shared<csp::Node>(topo.ground_address, "ground");
    rig->link = std::make_unique<sim::LinkSim>(up, down);
    rig->link->attach(rig->ground, rig->satellite->node());
    rig->transport = sim::transport_over(*rig->link, rig->ground);
    return rig;
}

// ----------------------------------------------------------- faults ---------

int exit_for(const services::ClientFault& f) {
    using K = services::ClientErrorKind;
    using S = services::WireStatus;
    switch (f.kind) {
        case K::Timeout: return kExitTimeout;
        case K::Protocol: return kExitProtocol;
        case K::Aborted: return kExitIntegrity;
        case K::Service: break;
    }
    switch (f.status) {
        case S::NotFound:
        case S::OutsideRoot:
        case S::Exists: return kExitFile;
        case S::CrcMismatch:
        case S::Incomplete: return kExitIntegrity;
        case S::BadRequest:
        case S::NoSession:
        case S::TooLarge: return kExitRejected;
        case S::UnknownWorkload:
        case S::Timeout:
        case S::Failed: return kExitRemoteFault;
        default: return kExitProtocol;  // IoError and anything unexpected
    }
}

int exit_for(csp::RemoteError e) {
    switch (e) {
        case csp::RemoteError::Unreachable: return kExitTimeout;
        case csp::RemoteError::Protocol: return kExitProtocol;
        case csp::RemoteError::UnknownParameter: return kExitFile;
        default: return kExitRejected;  // NotWritable, TypeMismatch, InvalidValue
    }
}

[[noreturn]] void fail(const services::ClientFault& f, bool as_json) {
    const int code = exit_for(f);
    const char* status = services::to_string(f.status);
    std::cerr << "error: " << f.detail;
    if ((f.kind == services::ClientErrorKind::Service ||
         f.kind == services::ClientErrorKind::Aborted) &&
        f.detail != status) {
        std::cerr << " [" << status << "]";
    }
    std::cerr << "\n";
    if (as_json) {
        std::cout << json{{"error",
                           {{"kind", services::to_string(f.kind)},
                            {"status", services::to_string(f.status)},
                            {"detail", f.detail},
                            {"exit", code}}}}
                         .dump(2)
                  << "\n";
    }
    throw CliError(code, "");
}

[[noreturn]] void fail(csp::RemoteError e, bool as_json) {
    const int code = exit_for(e);
    std::cerr << "error: " << csp::to_string(e) << "\n";
    if (as_json) {
        std::cout << json{{"error", {{"kind", csp::to_string(e)}, {"exit", code}}}}.dump(2)
                  << "\n";
    }
    throw CliError(code, "");
}

// ----------------------------------------------------------- helpers --------

// Options shared by every sat subcommand; bound once on the group.
struct SatOpts {
    std::string net_path;
    uint64_t seed = 0;
    bool seed_set = false;
    bool as_json = false;
    uint32_t chunk_size = services::kChunkSizeSlowLink;
    int retries = 16;
    double timeout_s = 5.0;
};

struct Session {
    Topology topo;
    std::unique_ptr<SatRig> rig;
    std::unique_ptr<services::GroundClient> client;
};

Session open_session(const SatOpts& o) {
    Session s;
    s.topo = load_topology(o.net_path);
    s.rig = build_rig(s.topo, o.seed_set ? std::optional<uint64_t>(o.seed) : std::nullopt,
                      o.timeout_s);
    services::ClientOptions copts;
    copts.ground_address = s.topo.ground_address;
    copts.satellite_address = s.topo.satellite_address;
    copts.chunk_size = o.chunk_size;
    copts.retry_budget = o.retries;
    s.client = std::make_unique<services::GroundClient>(s.rig->transport, copts);
    return s;
}

// Stable default session id so that a re-run of the same transfer resumes it.
uint16_t derive_session_id(const std::string& remote_name) {
    return uint16_t(csp::crc32_of(to_bytes(remote_name)) & 0xFFFF);
}

Bytes read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError(kExitInput, "cannot open " + path);
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

void write_binary_file(const fs::path& path, const Bytes& data) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!out.good()) throw CliError(kExitInput, "cannot write " + path.string());
}

json value_to_json(const csp::ParamValue& v) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Bytes>) {
                std::ostringstream hex;
                for (uint8_t b : x) hex << std::hex << std::setw(2) << std::setfill('0') << int(b);
                return hex.str();
            } else {
                return x;
            }
        },
        v);
}

const char* type_name(const csp::ParamValue& v) {
    switch (v.index()) {
        case 0: return "bool";
        case 1: return "int";
        case 2: return "float";
        case 3: return "string";
        default: return "blob";
    }
}

std::string value_to_text(const csp::ParamValue& v) {
    json j = value_to_json(v);
    if (j.is_string()) return j.get<std::string>();
    return j.dump();
}

// `set` accepts plain text and guesses: bool words, then integer, then float,
// falling back to string. --type pins the interpretation.
csp::ParamValue parse_value(const std::string& text, const std::string& forced_type) {
    if (forced_type == "bool") {
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        throw CliError(kExitInput, "not a bool: " + text);
    }
    try {
        size_t used = 0;
        if (forced_type == "int") {
            const int64_t v = std::stoll(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        }
        if (forced_type == "float") {
            const double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        }
    } catch (const std::exception&) {
        throw CliError(kExitInput, "not a " + forced_type + ": " + text);
    }
    if (forced_type == "string") return text;
    if (text == "true") return true;
    if (text == "false") return false;
    try {
        size_t used = 0;
        const int64_t v = std::stoll(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    try {
        size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    return text;
}

std::string basename_of(const std::string& path) {
    const auto slash = path.rfind('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

// Plain download straight to a local file (used by ray-scan fetches).
void fetch_to_file(Session& s, const std::string& remote, const fs::path& local, bool as_json) {
    auto r = s.client->download(remote, derive_session_id(remote));
    if (!r.ok()) fail(r.error(), as_json);
    write_binary_file(local, r->data);
}

void print_stats(const services::TransferStats& st) {
    std::cout << st.total_bytes << " bytes in " << st.chunk_count << " chunks";
    if (st.resumed) std::cout << " (" << st.resumed_chunks << " resumed)";
    std::cout << ", rounds=" << st.rounds << ", retransmitted=" << st.retransmissions << "\n";
}

json stats_to_json(const services::TransferStats& st) {
    return json{{"chunk_count", st.chunk_count},
                {"total_bytes", st.total_bytes},
                {"chunks_sent", st.chunks_sent},
                {"chunks_received", st.chunks_received},
                {"retransmissions", st.retransmissions},
                {"rounds", st.rounds},
                {"resumed", st.resumed},
                {"resumed_chunks", st.resumed_chunks}};
}

// ----------------------------------------------------------- commands -------

void cmd_ping(const SatOpts& o, size_t size) {
    Session s = open_session(o);
    auto r = s.client->ping(size);
    if (!r.ok()) fail(r.error(), o.as_json);
    if (o.as_json) {
        std::cout << json{{"bytes", r->bytes}, {"rtt_s", r->rtt_s}}.dump(2) << "\n";
    } else {
        std::cout << "reply from " << int(s.topo.satellite_address) << ": " << r->bytes
                  << " bytes, rtt=" << std::fixed << std::setprecision(6) << r->rtt_s << " s\n";
    }
}

void cmd_get(const SatOpts& o, const std::string& id) {
    Session s = open_session(o);
    auto r = csp::param_remote_get(s.rig->transport.exchange, s.topo.ground_address,
                                   s.topo.satellite_address, id, services::kGroundServicePort);
    if (!r.ok()) fail(r.error(), o.as_json);
    if (o.as_json) {
        std::cout << json{{"id", id},
                          {"type", type_name(r->value)},
                          {"value", value_to_json(r->value)},
                          {"timestamp_ms", r->timestamp_ms}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << id << " = " << value_to_text(r->value) << "\n";
    }
}

void cmd_set(const SatOpts& o, const std::string& id, const std::string& text,
             const std::string& type) {
    const csp::ParamValue value = parse_value(text, type);
    Session s = open_session(o);
    auto r = csp::param_remote_set(s.rig->transport.exchange, s.topo.ground_address,
                                   s.topo.satellite_address, id, value,
                                   services::kGroundServicePort);
    if (!r.ok()) fail(r.error(), o.as_json);
    if (o.as_json) {
        std::cout << json{{"id", id}, {"timestamp_ms", r->timestamp_ms}}.dump(2) << "\n";
    } else {
        std::cout << id << " = " << value_to_text(value) << "\n";
    }
}

void cmd_upload(const SatOpts& o, const std::string& local, const std::string& remote,
                std::optional<uint16_t> session) {
    const Bytes data = read_binary_file(local);
    const uint16_t sid = session.value_or(derive_session_id(remote));
    Session s = open_session(o);
    auto r = s.client->upload(data, remote, sid);
    if (!r.ok()) {
        if (r.error().kind == services::ClientErrorKind::Aborted) {
            std::cerr << "partial upload kept on the satellite under session " << sid
                      << "; re-run the same command to resume\n";
        }
        fail(r.error(), o.as_json);
    }
    if (o.as_json) {
        json out = stats_to_json(*r);
        out["remote"] = remote;
        out["session_id"] = sid;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "uploaded " << local << " -> " << remote << ": ";
        print_stats(*r);
    }
}

// Ground-side resume state lives next to the output file: <local>.resume.json
// holds the manifest + chunk bitmap keyed by session id, <local>.part holds
// the bytes fetched so far.
void cmd_download(const SatOpts& o, const std::string& remote, const std::string& local,
                  std::optional<uint16_t> session) {
    const uint16_t sid = session.value_or(derive_session_id(remote));
    const fs::path sidecar = local + ".resume.json";
    const fs::path part = local + ".part";

    services::DownloadResume resume;
    if (fs::exists(sidecar)) {
        try {
            json j = json::parse(slurp_file(sidecar.string()));
            if (j.value("session_id", -1) == int(sid)) {
                resume = services::DownloadResume::from_json(j.at("state").dump());
                resume.partial = read_binary_file(part.string());
            } else {
                std::cerr << "ignoring resume state for a different session\n";
            }
        } catch (const std::exception& e) {
            std::cerr << "ignoring unreadable resume state: " << e.what() << "\n";
            resume = services::DownloadResume{};
        }
    }

    Session s = open_session(o);
    auto r = s.client->download(remote, sid, &resume);
    if (!r.ok()) {
        const bool partial = resume.received.count() > 0 && resume.received.popcount() > 0 &&
                             !resume.received.all_set();
        if (partial) {
            json j{{"session_id", sid}, {"state", json::parse(resume.to_json())}};
            write_binary_file(sidecar, to_bytes(j.dump(2)));
            write_binary_file(part, resume.partial);
            std::cerr << "partial download saved (" << resume.received.popcount() << "/"
                      << resume.received.count() << " chunks); re-run to resume\n";
        } else {
            std::error_code ec;
            fs::remove(sidecar, ec);
            fs::remove(part, ec);
        }
        fail(r.error(), o.as_json);
    }
    write_binary_file(local, r->data);
    std::error_code ec;
    fs::remove(sidecar, ec);
    fs::remove(part, ec);
    if (o.as_json) {
        json out = stats_to_json(r->stats);
        out["remote"] = remote;
        out["local"] = local;
        out["session_id"] = sid;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "downloaded " << remote << " -> " << local << ": ";
        print_stats(r->stats);
    }
}

void cmd_ls(const SatOpts& o, const std::string& path) {
    Session s = open_session(o);
    auto r = s.client->list(path);
    if (!r.ok()) fail(r.error(), o.as_json);
    auto files = *r;
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    if (o.as_json) {
        json arr = json::array();
        // mtimes are wall-clock noise under the simulator; keep output stable.
        for (const auto& f : files) {
            arr.push_back({{"name", f.name}, {"size_bytes", f.size_bytes}});
        }
        std::cout << arr.dump(2) << "\n";
    } else {
        for (const auto& f : files) {
            std::cout << std::setw(12) << f.size_bytes << "  " << f.name << "\n";
        }
    }
}

void cmd_fs_op(const SatOpts& o, const char* verb,
               const ipu::Expected<void, services::ClientFault>& r) {
    if (!r.ok()) fail(r.error(), o.as_json);
    if (o.as_json) {
        std::cout << json{{"ok", true}, {"op", verb}}.dump(2) << "\n";
    }
}

void cmd_infer_test(const SatOpts& o, int batch) {
    Session s = open_session(o);
    auto r = s.client->inference_test(batch);
    if (!r.ok()) fail(r.error(), o.as_json);
    char digest[16];
    std::snprintf(digest, sizeof digest, "0x%08x", r->digest);
    if (o.as_json) {
        // latency_ms is wall-clock and deliberately left out of the stable
        // machine output; the human line shows it.
        std::cout << json{{"pass", r->pass},
                          {"logit_digest", digest},
                          {"timestamp_ms", r->timestamp_ms}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << "self-test " << (r->pass ? "PASS" : "FAIL") << ": digest=" << digest
                  << " latency=" << std::fixed << std::setprecision(3) << r->latency_ms
                  << " ms\n";
    }
    if (!r->pass) {
        std::cerr << "inference output digest does not match the golden table\n";
        throw CliError(kExitRemoteFault, "");
    }
}

void cmd_ray_scan(const SatOpts& o, const std::string& remote, const std::string& out_dir,
                  int max_crops) {
    Session s = open_session(o);
    auto r = s.client->ray_scan(remote);
    if (!r.ok()) fail(r.error(), o.as_json);

    const fs::path report_local = fs::path(out_dir) / basename_of(r->detection_file);
    fetch_to_file(s, r->detection_file, report_local, o.as_json);

    const std::string stem = basename_of(remote);
    std::vector<std::string> crop_files;
    const uint32_t crops = std::min<uint32_t>(r->cluster_count, uint32_t(max_crops));
    for (uint32_t i = 0; i < crops; ++i) {
        const std::string base = "detections/" + stem + "_crop" + std::to_string(i);
        for (const char* ext : {".raw", ".json"}) {
            const fs::path local = fs::path(out_dir) / (basename_of(base) + ext);
            fetch_to_file(s, base + ext, local, o.as_json);
            crop_files.push_back(local.string());
        }
    }

    if (o.as_json) {
        std::cout << json{{"threshold", r->threshold},
                          {"degenerate_threshold", r->degenerate},
                          {"cluster_count", r->cluster_count},
                          {"report", report_local.string()},
                          {"crops", crop_files}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << "scan of " << remote << ": threshold=" << r->threshold
                  << (r->degenerate ? " (degenerate)" : "") << ", clusters=" << r->cluster_count
                  << "\n";
        std::cout << "report saved to " << report_local.string() << "\n";
        for (const auto& f : crop_files) std::cout << "saved " << f << "\n";
    }
}

void cmd_slots_status(const SatOpts& o) {
    Session s = open_session(o);
    auto r = s.client->slot_status();
    if (!r.ok()) fail(r.error(), o.as_json);
    if (o.as_json) {
        std::cout << *r << "\n";
        return;
    }
    try {
        json j = json::parse(*r);
        std::cout << "boot pointer: " << j.at("boot_pointer").get<int>() << "\n";
        std::cout << "slot  status     bundle\n";
        int i = 0;
        for (const auto& slot : j.at("slots")) {
            const std::string bundle = slot.at("bundle_id").get<std::string>();
            std::cout << std::setw(4) << i++ << "  " << std::left << std::setw(9)
                      << slot.at("status").get<std::string>() << std::right << "  "
                      << (bundle.empty() ? "-" : bundle) << "\n";
        }
    } catch (const json::exception&) {
        std::cout << *r << "\n";
    }
}

void cmd_slots_install(const SatOpts& o, int slot, const std::string& bundle) {
    Session s = open_session(o);
    auto r = s.client->slot_install(slot, bundle);
    if (!r.ok()) fail(r.error(), o.as_json);
    if (o.as_json) {
        std::cout << json{{"ok", true}, {"slot", slot}, {"bundle_id", bundle}}.dump(2) << "\n";
    } else {
        std::cout << "installed " << bundle << " into slot " << slot << " (trial)\n";
    }
}

void cmd_slots_confirm(const SatOpts& o) {
    Session s = open_session(o);
    auto r = s.client->slot_confirm();
    if (!r.ok()) fail(r.error(), o.as_json);
    std::cout << *r << "\n";
}

void cmd_run(const SatOpts& o, const std::string& entry, const std::string& args, double limit) {
    Session s = open_session(o);
    auto r = s.client->run_workload(entry, args, limit);
    if (!r.ok()) fail(r.error(), o.as_json);
    if (o.as_json) {
        std::cout << json{{"entry", entry}, {"log", r->log}, {"output_files", r->output_files}}
                         .dump(2)
                  << "\n";
    } else {
        std::string log = r->log;
        while (!log.empty() && log.back() == '\n') log.pop_back();
        if (!log.empty()) std::cout << log << "\n";
        for (const auto& f : r->output_files) std::cout << "output: " << f << "\n";
    }
}

}  // namespace

void register_sat(CLI::App& app) {
    auto o = std::make_shared<SatOpts>();
    CLI::App* sat = app.add_subcommand("sat", "Talk to a satellite node");
    sat->require_subcommand(1);
    sat->add_option("--net", o->net_path, "Topology JSON (default: in-process sim)");
    sat->add_option("--seed", o->seed, "Override every RNG seed in the topology")
        ->each([o](const std::string&) { o->seed_set = true; });
    sat->add_flag("--json", o->as_json, "JSON on stdout");
    sat->add_option("--chunk-size", o->chunk_size, "Transfer chunk bytes")
        ->check(CLI::Range(int(services::kMinChunkSize), int(services::kMaxWireChunkSize)));
    sat->add_option("--retries", o->retries, "Retry budget (rounds / attempts)")
        ->check(CLI::Range(1, 1000));
    sat->add_option("--timeout", o->timeout_s, "Per-request reply timeout, seconds (tcp mode)");

    {
        auto size = std::make_shared<size_t>(8);
        CLI::App* c = sat->add_subcommand("ping", "Round-trip probe");
        c->add_option("--size", *size, "Probe payload bytes")
            ->check(CLI::Range(size_t(0), csp::kMaxPayload));
        c->callback([o, size] { cmd_ping(*o, *size); });
    }
    {
        auto id = std::make_shared<std::string>();
        CLI::App* c = sat->add_subcommand("get", "Read a parameter");
        c->add_option("id", *id, "Parameter id")->required();
        c->callback([o, id] { cmd_get(*o, *id); });
    }
    {
        auto id = std::make_shared<std::string>();
        auto value = std::make_shared<std::string>();
        auto type = std::make_shared<std::string>();
        CLI::App* c = sat->add_subcommand("set", "Write a parameter");
        c->add_option("id", *id, "Parameter id")->required();
        c->add_option("value", *value, "New value")->required();
        c->add_option("--type", *type, "Force bool|int|float|string")
            ->check(CLI::IsMember({"bool", "int", "float", "string"}));
        c->callback([o, id, value, type] { cmd_set(*o, *id, *value, *type); });
    }
    {
        auto local = std::make_shared<std::string>();
        auto remote = std::make_shared<std::string>();
        auto session = std::make_shared<int>(-1);
        CLI::App* c = sat->add_subcommand("upload", "Send a local file to the satellite");
        c->add_option("local", *local, "Local file")->required();
        c->add_option("remote", *remote, "Remote path")->required();
        c->add_option("--session", *session, "Transfer session id (default: name hash)")
            ->check(CLI::Range(0, 65535));
        c->callback([o, local, remote, session] {
            cmd_upload(*o, *local, *remote,
                       *session < 0 ? std::nullopt : std::optional<uint16_t>(uint16_t(*session)));
        });
    }
    {
        auto remote = std::make_shared<std::string>();
        auto local = std::make_shared<std::string>();
        auto session = std::make_shared<int>(-1);
        CLI::App* c = sat->add_subcommand("download", "Fetch a remote file");
        c->add_option("remote", *remote, "Remote path")->required();
        c->add_option("local", *local, "Local file")->required();
        c->add_option("--session", *session, "Transfer session id (default: name hash)")
            ->check(CLI::Range(0, 65535));
        c->callback([o, remote, local, session] {
            cmd_download(*o, *remote, *local,
                         *session < 0 ? std::nullopt : std::optional<uint16_t>(uint16_t(*session)));
        });
    }
    {
        auto path = std::make_shared<std::string>();
        CLI::App* c = sat->add_subcommand("ls", "List remote files");
        c->add_option("path", *path, "Remote directory (default: root)");
        c->callback([o, path] { cmd_ls(*o, *path); });
    }
    {
        auto from = std::make_shared<std::string>();
        auto to = std::make_shared<std::string>();
        auto overwrite = std::make_shared<bool>(false);
        CLI::App* c = sat->add_subcommand("mv", "Rename a remote file");
        c->add_option("from", *from)->required();
        c->add_option("to", *to)->required();
        c->add_flag("--overwrite", *overwrite, "Replace an existing target");
        c->callback([o, from, to, overwrite] {
            Session s = open_session(*o);
            cmd_fs_op(*o, "mv", s.client->move(*from, *to, *overwrite));
        });
    }
    {
        auto from = std::make_shared<std::string>();
        auto to = std::make_shared<std::string>();
        auto overwrite = std::make_shared<bool>(false);
        CLI::App* c = sat->add_subcommand("cp", "Copy a remote file");
        c->add_option("from", *from)->required();
        c->add_option("to", *to)->required();
        c->add_flag("--overwrite", *overwrite, "Replace an existing target");
        c->callback([o, from, to, overwrite] {
            Session s = open_session(*o);
            cmd_fs_op(*o, "cp", s.client->copy(*from, *to, *overwrite));
        });
    }
    {
        auto path = std::make_shared<std::string>();
        CLI::App* c = sat->add_subcommand("rm", "Remove a remote file");
        c->add_option("path", *path)->required();
        c->callback([o, path] {
            Session s = open_session(*o);
            cmd_fs_op(*o, "rm", s.client->remove(*path));
        });
    }
    {
        auto batch = std::make_shared<int>(16);
        CLI::App* c = sat->add_subcommand("infer-test", "Run the onboard inference self-test");
        c->add_option("--batch", *batch, "Patches per batch")->check(CLI::Range(1, 1024));
        c->callback([o, batch] { cmd_infer_test(*o, *batch); });
    }
    {
        auto remote = std::make_shared<std::string>();
        auto out_dir = std::make_shared<std::string>(".");
        auto crops = std::make_shared<int>(4);
        CLI::App* c = sat->add_subcommand("ray-scan", "Threshold + cluster scan of a stored frame");
        c->add_option("image", *remote, "Remote frame base path (as uploaded)")->required();
        c->add_option("--out", *out_dir, "Local directory for the report and crops");
        c->add_option("--crops", *crops, "Max clusters to download crops for")
            ->check(CLI::Range(0, 64));
        c->callback([o, remote, out_dir, crops] { cmd_ray_scan(*o, *remote, *out_dir, *crops); });
    }
    {
        CLI::App* slots = sat->add_subcommand("slots", "Firmware slot table");
        CLI::App* st = slots->add_subcommand("status", "Show the slot table");
        st->callback([o] { cmd_slots_status(*o); });
        auto slot = std::make_shared<int>(0);
        auto bundle = std::make_shared<std::string>();
        CLI::App* in = slots->add_subcommand("install", "Stage a bundle into a slot (trial)");
        in->add_option("slot", *slot, "Slot index")->required()->check(CLI::Range(0, 3));
        in->add_option("bundle", *bundle, "Bundle id")->required();
        in->callback([o, slot, bundle] { cmd_slots_install(*o, *slot, *bundle); });
        CLI::App* cf = slots->add_subcommand("confirm", "Commit the booted trial slot");
        cf->callback([o] { cmd_slots_confirm(*o); });
        slots->callback([o, slots] {
            if (slots->get_subcommands().empty()) cmd_slots_status(*o);
        });
    }
    {
        auto entry = std::make_shared<std::string>();
        auto args = std::make_shared<std::string>();
        auto limit = std::make_shared<double>(5.0);
        CLI::App* c = sat->add_subcommand("run", "Trigger a registered workload");
        c->add_option("entry", *entry, "Workload entry id")->required();
        c->add_option("args", *args, "Argument string passed through");
        c->add_option("--limit", *limit, "Time limit, seconds")
            ->check(CLI::Range(0.001, 3600.0));
        c->callback([o, entry, args, limit] { cmd_run(*o, *entry, *args, *limit); });
    }
}

}  // namespace ipuctl
