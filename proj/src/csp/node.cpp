#include "ipu/csp/node.hpp"

#include <stdexcept>
#include <utility>

#include "ipu/csp/param_protocol.hpp"

namespace ipu::csp {

void ServiceContext::reply(const CspPacket& request, Bytes payload) {
    CspPacket r;
    r.priority = request.priority;
    r.src_addr = request.dst_addr;
    r.dst_addr = request.src_addr;
    r.src_port = request.dst_port;
    r.dst_port = request.src_port;
    r.flags = request.flags;
    r.payload = std::move(payload);
    send(std::move(r));
}

Node::Node(uint8_t address, std::string name) : address_(address), name_(std::move(name)) {
    if (address > kMaxAddress) {
        throw std::invalid_argument("node address out of range");
    }
    bind_core_services();
}

void Node::bind(uint8_t port, Service svc) {
    if (port > kMaxPort) {
        throw std::invalid_argument("service port out of range");
    }
    if (!svc) {
        throw std::invalid_argument("service handler is empty");
    }
    services_[port] = std::move(svc);  // rebinding replaces; still one handler per port
}

bool Node::has_service(uint8_t port) const { return services_.count(port) != 0; }

void Node::handle(const CspPacket& p, ServiceContext& ctx) {
    auto it = services_.find(p.dst_port);
    if (it == services_.end()) {
        throw std::logic_error("no service bound on port (router must check first)");
    }
    it->second(p, ctx);
}

void Node::bind_core_services() {
    // Ping: echo the request payload back to the sender.
    services_[kPortPing] = [](const CspPacket& p, ServiceContext& ctx) {
        ctx.reply(p, p.payload);
    };
    // Reboot: ack, bump the boot counter, then run the hook (e.g. slot logic).
    services_[kPortReboot] = [this](const CspPacket& p, ServiceContext& ctx) {
        ctx.reply(p, Bytes{0x00});
        ++boot_count_;
        down_ = false;
        if (reboot_hook_) reboot_hook_(ctx.now_s);
    };
    // Param: remote access to the parameter table (see param_protocol).
    services_[kPortParam] = [](const CspPacket& p, ServiceContext& ctx) {
        ctx.reply(p, handle_param_request(ctx.self.params(), p.payload,
                                          static_cast<int64_t>(ctx.now_s * 1000.0)));
    };
    // Shutdown: ack, mark down, then run the hook.
    services_[kPortShutdown] = [this](const CspPacket& p, ServiceContext& ctx) {
        ctx.reply(p, Bytes{0x00});
        down_ = true;
        if (shutdown_hook_) shutdown_hook_(ctx.now_s);
    };
}

}  // namespace ipu::csp
