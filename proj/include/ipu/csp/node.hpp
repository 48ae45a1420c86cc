#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "ipu/csp/packet.hpp"
#include "ipu/csp/param_table.hpp"

namespace ipu::csp {

// Core service ports. The paper-level services of a payload node bind above
// these (see ipu::services).
inline constexpr uint8_t kPortPing = 1;
inline constexpr uint8_t kPortReboot = 2;
inline constexpr uint8_t kPortParam = 3;
inline constexpr uint8_t kPortShutdown = 4;

class Node;

struct ServiceContext {
    Node& self;
    double now_s = 0.0;  // transport time (virtual under the link simulator)
    std::function<void(CspPacket)> send;

    // Reply helper: swaps addresses and ports of the request.
    void reply(const CspPacket& request, Bytes payload);
};

using Service = std::function<void(const CspPacket&, ServiceContext&)>;

// A CSP network endpoint: an address, one handler per port, and a parameter
// table. Core services (ping, reboot, param, shutdown) are always bound.
class Node {
public:
    explicit Node(uint8_t address, std::string name = "");

    uint8_t address() const { return address_; }
    const std::string& name() const { return name_; }

    void bind(uint8_t port, Service svc);
    bool has_service(uint8_t port) const;
    void handle(const CspPacket& p, ServiceContext& ctx);

    ParameterTable& params() { return params_; }
    const ParameterTable& params() const { return params_; }

    void set_hmac_key(Bytes key) { hmac_key_ = std::move(key); }
    const std::optional<Bytes>& hmac_key() const { return hmac_key_; }

    // Invoked by the reboot/shutdown core services after they ack.
    void set_reboot_hook(std::function<void(double now_s)> hook) { reboot_hook_ = std::move(hook); }
    void set_shutdown_hook(std::function<void(double now_s)> hook) { shutdown_hook_ = std::move(hook); }

    uint32_t boot_count() const { return boot_count_; }
    bool is_down() const { return down_; }

private:
    void bind_core_services();

    uint8_t address_;
    std::string name_;
    std::map<uint8_t, Service> services_;
    ParameterTable params_;
    std::optional<Bytes> hmac_key_;
    std::function<void(double)> reboot_hook_;
    std::function<void(double)> shutdown_hook_;
    uint32_t boot_count_ = 0;
    bool down_ = false;
};

}  // namespace ipu::csp
