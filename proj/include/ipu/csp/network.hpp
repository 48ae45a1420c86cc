#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>

#include "ipu/csp/node.hpp"
#include "ipu/csp/packet.hpp"
#include "ipu/csp/param_protocol.hpp"

namespace ipu::csp {

enum class Delivery {
    Delivered,
    NoRoute,    // destination address unknown
    NoService,  // destination node has no handler on the port
};

const char* to_string(Delivery d);

// In-process zero-latency router for unit tests and local tooling. The link
// simulator (ipu::sim) provides the delayed/lossy transport; both deliver
// through Node::handle with the same semantics.
class Network {
public:
    void add_node(std::shared_ptr<Node> node);
    Node* node_at(uint8_t address);

    // Delivers `p` and then drains all traffic it provokes (replies, and
    // replies to replies) in FIFO order. Packets enqueued while processing
    // keep their enqueue order, so traffic between any (src, dst) pair is
    // never reordered. Returns the outcome for `p` itself; provoked packets
    // that fail to route are counted but do not affect the return value.
    Delivery route_and_deliver(const CspPacket& p);

    void set_now_s(double now_s) { now_s_ = now_s; }
    double now_s() const { return now_s_; }

    uint64_t delivered_count() const { return delivered_; }
    uint64_t dropped_count() const { return dropped_; }

private:
    Delivery deliver_one(const CspPacket& p);

    std::map<uint8_t, std::shared_ptr<Node>> nodes_;
    std::deque<CspPacket> queue_;
    double now_s_ = 0.0;
    uint64_t delivered_ = 0;
    uint64_t dropped_ = 0;
    bool draining_ = false;
};

// Binds a capture handler on one port of a node and queues whatever arrives
// there; this is how a client-side port receives replies.
class Inbox {
public:
    Inbox(Node& node, uint8_t port);

    std::optional<CspPacket> pop();
    size_t size() const { return box_->size(); }
    uint8_t port() const { return port_; }

private:
    std::shared_ptr<std::deque<CspPacket>> box_;
    uint8_t port_;
};

// Synchronous request/reply over the in-process router: send, drain, pop the
// client inbox. Returns nullopt if the request was dropped or drew no reply.
ExchangeFn make_exchange(Network& net, Node& client, uint8_t client_port = 63);

}  // namespace ipu::csp
