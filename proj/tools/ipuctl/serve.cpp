// `serve`: host a satellite node behind a TCP listener. Each connection
// carries KISS-framed packets both ways, so a second ipuctl process (topology
// mode "tcp") or any KISS-speaking ground software can operate the node.

#include <arpa/inet.h>
#include <csignal>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include "cli_common.hpp"
#include "ipu/csp/kiss.hpp"
#include "ipu/csp/node.hpp"
#include "ipu/csp/packet.hpp"
#include "ipu/infer/golden.hpp"
#include "ipu/pipeline/frame.hpp"
#include "ipu/services/satellite.hpp"

namespace ipuctl {
namespace {

namespace csp = ipu::csp;
namespace services = ipu::services;
using ipu::Bytes;

volatile std::sig_atomic_t g_stop = 0;

void handle_signal(int) { g_stop = 1; }

bool send_all(int fd, const Bytes& data) {
    size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n <= 0) return false;
        off += size_t(n);
    }
    return true;
}

struct ServeArgs {
    std::string listen = "127.0.0.1:0";
    std::string state_dir = "ipu-sat-state";
    int address = 5;
    uint64_t seed = 1;
};

int open_listener(const std::string& endpoint, std::string& bound) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string::npos) {
        throw CliError(kExitInput, "listen endpoint must be host:port, got " + endpoint);
    }
    const std::string host = endpoint.substr(0, colon);
    const int port = std::stoi(endpoint.substr(colon + 1));

    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw CliError(kExitInternal, "socket: " + std::string(std::strerror(errno)));
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(uint16_t(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw CliError(kExitInput, "listen host must be an IPv4 address, got " + host);
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(fd, 1) != 0) {
        const std::string why = std::strerror(errno);
        ::close(fd);
        throw CliError(kExitInternal, "cannot listen on " + endpoint + ": " + why);
    }
    sockaddr_in actual{};
    socklen_t len = sizeof actual;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&actual), &len);
    char ip[INET_ADDRSTRLEN] = {};
    ::inet_ntop(AF_INET, &actual.sin_addr, ip, sizeof ip);
    bound = std::string(ip) + ":" + std::to_string(ntohs(actual.sin_port));
    return fd;
}

// One connected peer: unframe, decode, dispatch into the node, frame replies
// back out. Wall clock drives service time.
void serve_connection(int fd, services::SatelliteNode& sat, uint8_t address,
                      std::chrono::steady_clock::time_point epoch) {
    Bytes residual;
    while (!g_stop) {
        pollfd pfd{fd, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, 200);
        if (ready < 0) break;
        if (ready == 0) continue;
        uint8_t buf[4096];
        const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
        if (n <= 0) break;
        residual.insert(residual.end(), buf, buf + n);
        auto unframed = csp::kiss_unframe(residual);
        residual = std::move(unframed.residual);
        for (const auto& frame : unframed.frames) {
            auto decoded = csp::decode_packet(frame);
            if (!decoded.ok()) {
                std::cerr << "dropped undecodable frame (" << frame.size() << " bytes)\n";
                continue;
            }
            if (decoded->dst_addr != address) continue;
            if (!sat.node()->has_service(decoded->dst_port)) {
                std::cerr << "no service on port " << int(decoded->dst_port) << "\n";
                continue;
            }
            const double now_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch).count();
            csp::ServiceContext ctx{*sat.node(), now_s, [fd](csp::CspPacket reply) {
                                        send_all(fd, csp::kiss_frame(csp::encode_packet(reply)));
                                    }};
            try {
                sat.node()->handle(*decoded, ctx);
            } catch (const std::exception& e) {
                std::cerr << "service fault on port " << int(decoded->dst_port) << ": "
                          << e.what() << "\n";
            }
        }
    }
}

void run_serve(const ServeArgs& a) {
    if (a.address < 0 || a.address > int(csp::kMaxAddress)) {
        throw CliError(kExitInput, "address must be within 0..63");
    }
    std::error_code ec;
    std::filesystem::create_directories(a.state_dir, ec);
    if (ec) throw CliError(kExitInput, "cannot create state dir " + a.state_dir);
    services::SatelliteNode sat(uint8_t(a.address), a.state_dir, a.seed);
    // Same deterministic self-test fixture as the in-process simulation.
    sat.set_inference_fixture(ipu::pipeline::Frame::random(448, 448, a.seed),
                              ipu::infer::GoldenTable::synthetic(2, 2, a.seed + 1));

    std::string bound;
    const int listener = open_listener(a.listen, bound);
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    std::cout << "listening on " << bound << std::endl;

    const auto epoch = std::chrono::steady_clock::now();
    while (!g_stop) {
        pollfd pfd{listener, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, 200);
        if (ready < 0) break;
        if (ready == 0) continue;
        const int conn = ::accept(listener, nullptr, nullptr);
        if (conn < 0) continue;
        std::cerr << "peer connected\n";
        serve_connection(conn, sat, uint8_t(a.address), epoch);
        ::close(conn);
        std::cerr << "peer disconnected\n";
    }
    ::close(listener);
    sat.flush();
    std::cerr << "shut down\n";
}

}  // namespace

void register_serve(CLI::App& app) {
    auto args = std::make_shared<ServeArgs>();
    CLI::App* serve = app.add_subcommand("serve", "Host a satellite node over TCP (KISS frames)");
    serve->add_option("--listen", args->listen, "IPv4 host:port (port 0 picks one)");
    serve->add_option("--state", args->state_dir, "Satellite state directory");
    serve->add_option("--addr", args->address, "Node address")->check(CLI::Range(0, 63));
    serve->add_option("--seed", args->seed, "Telemetry/workload RNG seed");
    serve->callback([args] { run_serve(*args); });
}

}  // namespace ipuctl
