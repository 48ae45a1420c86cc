#include "ipu/csp/network.hpp"

#include <stdexcept>
#include <utility>

namespace ipu::csp {

const char* to_string(Delivery d) {
    switch (d) {
        case Delivery::Delivered: return "delivered";
        case Delivery::NoRoute: return "no route";
        case Delivery::NoService: return "no service";
    }
    return "?";
}

void Network::add_node(std::shared_ptr<Node> node) {
    if (!node) throw std::invalid_argument("null node");
    auto [it, inserted] = nodes_.emplace(node->address(), std::move(node));
    if (!inserted) throw std::invalid_argument("duplicate node address");
}

Node* Network::node_at(uint8_t address) {
    auto it = nodes_.find(address);
    return it == nodes_.end() ? nullptr : it->second.get();
}

Delivery Network::deliver_one(const CspPacket& p) {
    auto it = nodes_.find(p.dst_addr);
    if (it == nodes_.end()) {
        ++dropped_;
        return Delivery::NoRoute;
    }
    Node& node = *it->second;
    if (!node.has_service(p.dst_port)) {
        ++dropped_;
        return Delivery::NoService;
    }
    ServiceContext ctx{node, now_s_, [this](CspPacket out) { queue_.push_back(std::move(out)); }};
    node.handle(p, ctx);
    ++delivered_;
    return Delivery::Delivered;
}

Delivery Network::route_and_deliver(const CspPacket& p) {
    Delivery first = deliver_one(p);
    if (draining_) return first;  // re-entrant call from a handler: outer loop drains
    draining_ = true;
    while (!queue_.empty()) {
        CspPacket next = std::move(queue_.front());
        queue_.pop_front();
        deliver_one(next);
    }
    draining_ = false;
    return first;
}

Inbox::Inbox(Node& node, uint8_t port)
    : box_(std::make_shared<std::deque<CspPacket>>()), port_(port) {
    auto box = box_;
    node.bind(port, [box](const CspPacket& p, ServiceContext&) { box->push_back(p); });
}

std::optional<CspPacket> Inbox::pop() {
    if (box_->empty()) return std::nullopt;
    CspPacket p = std::move(box_->front());
    box_->pop_front();
    return p;
}

ExchangeFn make_exchange(Network& net, Node& client, uint8_t client_port) {
    auto inbox = std::make_shared<Inbox>(client, client_port);
    return [&net, inbox](const CspPacket& request) -> std::optional<Bytes> {
        if (net.route_and_deliver(request) != Delivery::Delivered) return std::nullopt;
        auto reply = inbox->pop();
        if (!reply) return std::nullopt;
        return reply->payload;
    };
}

}  // namespace ipu::csp
