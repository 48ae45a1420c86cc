#include "ipu/sim/link.hpp"

#include <cmath>
#include <stdexcept>

#include "ipu/csp/network.hpp"
#include "json.hpp"

namespace ipu::sim {

using nlohmann::json;

const char* to_string(Direction d) { return d == Direction::Up ? "up" : "down"; }

const char* to_string(LinkOutcome o) {
    switch (o) {
        case LinkOutcome::Delivered: return "Delivered";
        case LinkOutcome::Dropped: return "Dropped";
        case LinkOutcome::OutOfContact: return "OutOfContact";
    }
    return "?";
}

void LinkConfig::validate() const {
    if (!(bandwidth_bps > 0.0) || !std::isfinite(bandwidth_bps)) {
        throw std::invalid_argument("link: bandwidth must be positive");
    }
    if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) {
        throw std::invalid_argument("link: loss rate outside [0,1]");
    }
    for (size_t i = 0; i < contact_windows.size(); ++i) {
        const auto& w = contact_windows[i];
        if (!(w.start_s < w.end_s)) {
            throw std::invalid_argument("link: contact window with start >= end");
        }
        if (i > 0 && contact_windows[i - 1].end_s > w.start_s) {
            throw std::invalid_argument("link: contact windows overlap or are unsorted");
        }
    }
}

bool LinkConfig::in_contact(double t_s) const {
    if (contact_windows.empty()) return true;
    for (const auto& w : contact_windows) {
        if (t_s >= w.start_s && t_s < w.end_s) return true;
    }
    return false;
}

double LinkConfig::serialization_delay_s(size_t frame_bytes) const {
    return 8.0 * (double(frame_bytes) + double(overhead_bytes)) / bandwidth_bps;
}

std::string LinkConfig::to_json() const {
    json j;
    j["bandwidth_bps"] = bandwidth_bps;
    j["loss_rate"] = loss_rate;
    j["seed"] = seed;
    j["overhead_bytes"] = overhead_bytes;
    j["contact_windows"] = json::array();
    for (const auto& w : contact_windows) {
        j["contact_windows"].push_back({w.start_s, w.end_s});
    }
    return j.dump(2);
}

LinkConfig LinkConfig::from_json(const std::string& text) {
    LinkConfig c;
    try {
        json j = json::parse(text);
        c.bandwidth_bps = j.value("bandwidth_bps", c.bandwidth_bps);
        c.loss_rate = j.value("loss_rate", c.loss_rate);
        c.seed = j.value("seed", c.seed);
        c.overhead_bytes = j.value("overhead_bytes", c.overhead_bytes);
        if (j.contains("contact_windows")) {
            for (const auto& w : j.at("contact_windows")) {
                c.contact_windows.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
            }
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("link config JSON: ") + e.what());
    }
    c.validate();
    return c;
}

std::string LinkEvent::to_json_line() const {
    json j;
    j["t_s"] = t_s;
    j["direction"] = to_string(direction);
    j["bytes"] = bytes;
    j["outcome"] = to_string(outcome);
    return j.dump();
}

namespace {

// Wire length of one frame: header, payload and the flagged trailers.
size_t frame_bytes(const csp::CspPacket& p) {
    size_t n = csp::kHeaderSize + p.payload.size();
    if (p.has_flag(csp::kFlagHmac)) n += 4;
    if (p.has_flag(csp::kFlagCrc)) n += 4;
    return n;
}

double unit_draw(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

}  // namespace

LinkSim::LinkSim(LinkConfig uplink, LinkConfig downlink) {
    uplink.validate();
    downlink.validate();
    up_.cfg = std::move(uplink);
    down_.cfg = std::move(downlink);
    up_.rng.seed(up_.cfg.seed);
    down_.rng.seed(down_.cfg.seed ^ 0x9E3779B97F4A7C15ull);  // distinct stream on a shared seed
}

LinkSim::LinkSim(const LinkConfig& both) : LinkSim(both, both) {}

void LinkSim::attach(std::shared_ptr<csp::Node> ground, std::shared_ptr<csp::Node> satellite) {
    if (!ground || !satellite) throw std::invalid_argument("link: null endpoint");
    if (ground->address() == satellite->address()) {
        throw std::invalid_argument("link: endpoints share an address");
    }
    ground_ = std::move(ground);
    satellite_ = std::move(satellite);
}

LinkOutcome LinkSim::submit(const csp::CspPacket& p) {
    if (!ground_ || !satellite_) throw std::logic_error("link: endpoints not attached");
    Direction dir;
    if (p.src_addr == ground_->address()) {
        dir = Direction::Up;
    } else if (p.src_addr == satellite_->address()) {
        dir = Direction::Down;
    } else {
        throw std::invalid_argument("link: frame from unattached address");
    }
    Channel& ch = channel(dir);
    const uint64_t on_air = frame_bytes(p) + ch.cfg.overhead_bytes;
    auto log_event = [&](LinkOutcome outcome) {
        log_.push_back(LinkEvent{now_s_, dir, on_air, outcome});
        return outcome;
    };

    if (!ch.cfg.in_contact(now_s_)) return log_event(LinkOutcome::OutOfContact);

    const double start = std::max(now_s_, ch.busy_until_s);
    const double end = start + ch.cfg.serialization_delay_s(frame_bytes(p));
    if (!ch.cfg.contact_windows.empty()) {
        // A frame must start and finish inside one pass; one cut short by the
        // window edge (or queued past it) never reaches the far side complete.
        double window_end = -1.0;
        for (const auto& w : ch.cfg.contact_windows) {
            if (start >= w.start_s && start < w.end_s) window_end = w.end_s;
        }
        if (window_end < 0.0 || end > window_end) {
            return log_event(LinkOutcome::OutOfContact);
        }
    }

    // The transmitter owns the channel either way; a lost frame still burns
    // its time on air, the receiver just never sees it.
    ch.busy_until_s = end;
    if (unit_draw(ch.rng) < ch.cfg.loss_rate) return log_event(LinkOutcome::Dropped);

    in_flight_.push(Pending{end, seq_++, p});
    return log_event(LinkOutcome::Delivered);
}

void LinkSim::advance_to(double t_s) {
    if (t_s < now_s_) throw std::invalid_argument("link: time moves forward only");
    now_s_ = t_s;
}

void LinkSim::deliver(const csp::CspPacket& p) {
    csp::Node* dst = nullptr;
    if (p.dst_addr == ground_->address()) dst = ground_.get();
    if (p.dst_addr == satellite_->address()) dst = satellite_.get();
    if (!dst || !dst->has_service(p.dst_port)) return;  // vanish, as on a real link
    csp::ServiceContext ctx{*dst, now_s_, [this](csp::CspPacket out) { submit(out); }};
    dst->handle(p, ctx);
}

bool LinkSim::run_until(const std::function<bool()>& pred) {
    while (!(pred && pred()) && !in_flight_.empty()) {
        Pending next = in_flight_.top();
        in_flight_.pop();
        if (next.t_s > max_virtual_s_) {
            throw std::runtime_error("link: exceeded max virtual time (reply loop?)");
        }
        now_s_ = std::max(now_s_, next.t_s);
        deliver(next.packet);
    }
    return pred && pred();
}

void LinkSim::run_until_idle() { run_until(nullptr); }

std::string LinkSim::event_log_jsonl() const {
    std::string out;
    for (const auto& e : log_) {
        out += e.to_json_line();
        out += '\n';
    }
    return out;
}

uint64_t LinkSim::count(LinkOutcome outcome) const {
    uint64_t n = 0;
    for (const auto& e : log_) n += e.outcome == outcome;
    return n;
}

services::SatTransport transport_over(LinkSim& sim, std::shared_ptr<csp::Node> ground) {
    auto inbox = std::make_shared<csp::Inbox>(*ground, services::kGroundServicePort);
    services::SatTransport t;
    t.send = [&sim](const csp::CspPacket& p) { sim.submit(p); };
    t.exchange = [&sim, inbox](const csp::CspPacket& p) -> std::optional<Bytes> {
        sim.submit(p);
        sim.run_until([&] { return inbox->size() > 0; });
        if (auto reply = inbox->pop()) return std::move(reply->payload);
        return std::nullopt;
    };
    t.now_s = [&sim] { return sim.now_s(); };
    return t;
}

}  // namespace ipu::sim
