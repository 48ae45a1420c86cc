#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "ipu/csp/node.hpp"
#include "ipu/csp/packet.hpp"
#include "ipu/services/ground.hpp"

namespace ipu::sim {

enum class Direction : uint8_t { Up, Down };  // up = ground to satellite

enum class LinkOutcome : uint8_t { Delivered, Dropped, OutOfContact };

const char* to_string(Direction d);
const char* to_string(LinkOutcome o);

struct ContactWindow {
    double start_s = 0.0;
    double end_s = 0.0;
};

// One direction of the radio link. The defaults model the slow command
// uplink; the imaging downlink runs at 10 Mbit/s.
struct LinkConfig {
    double bandwidth_bps = 9600.0;
    double loss_rate = 0.0;                      // per-frame drop probability
    std::vector<ContactWindow> contact_windows;  // empty: always in contact
    uint64_t seed = 1;
    uint32_t overhead_bytes = 0;  // framing the radio adds around every frame

    // Throws std::invalid_argument: non-positive bandwidth, loss outside
    // [0,1], windows unsorted or overlapping.
    void validate() const;

    bool in_contact(double t_s) const;  // true when no windows are configured
    // Time on air for one frame: 8*(frame+overhead)/bandwidth seconds.
    double serialization_delay_s(size_t frame_bytes) const;

    std::string to_json() const;
    static LinkConfig from_json(const std::string& text);
};

struct LinkEvent {
    double t_s = 0.0;  // when the link accepted the frame and decided its fate
    Direction direction = Direction::Up;
    uint64_t bytes = 0;  // frame length on air, overhead included
    LinkOutcome outcome = LinkOutcome::Delivered;

    std::string to_json_line() const;
};

// Deterministic virtual-time simulation of a ground<->satellite radio link:
// per-direction bandwidth, contact windows and seeded frame loss. Frames
// queue behind the transmitter (one per direction); delivery happens one
// serialization delay after the channel frees up. A multi-hour pass plays
// out in milliseconds of wall clock.
class LinkSim {
public:
    LinkSim(LinkConfig uplink, LinkConfig downlink);
    explicit LinkSim(const LinkConfig& both);  // same shape both ways

    // The two endpoints. Frames are classified by source address.
    void attach(std::shared_ptr<csp::Node> ground, std::shared_ptr<csp::Node> satellite);

    // Hands a frame to the link at the current virtual time. The outcome is
    // decided (and logged) immediately; delivery is scheduled for the moment
    // the frame finishes serializing. Throws std::invalid_argument for a
    // frame from an unattached source address.
    LinkOutcome submit(const csp::CspPacket& p);

    double now_s() const { return now_s_; }
    // Idle-time jump, e.g. to the start of a contact window. Throws
    // std::invalid_argument when moving backwards.
    void advance_to(double t_s);

    // Delivers pending frames in timestamp order until nothing is in flight.
    // Throws std::runtime_error once virtual time passes max_virtual_s (a
    // reply loop between the endpoints would otherwise never settle).
    void run_until_idle();
    // Same loop, stopping early once pred() holds (checked after each
    // delivery). Returns pred().
    bool run_until(const std::function<bool()>& pred);

    void set_max_virtual_s(double s) { max_virtual_s_ = s; }

    const std::vector<LinkEvent>& event_log() const { return log_; }
    std::string event_log_jsonl() const;
    uint64_t count(LinkOutcome outcome) const;

private:
    struct Channel {
        LinkConfig cfg;
        std::mt19937_64 rng;
        double busy_until_s = 0.0;
    };
    struct Pending {
        double t_s;
        uint64_t seq;  // FIFO among equal timestamps
        csp::CspPacket packet;
        bool operator>(const Pending& o) const {
            return t_s != o.t_s ? t_s > o.t_s : seq > o.seq;
        }
    };

    Channel& channel(Direction d) { return d == Direction::Up ? up_ : down_; }
    void deliver(const csp::CspPacket& p);

    Channel up_;
    Channel down_;
    std::shared_ptr<csp::Node> ground_;
    std::shared_ptr<csp::Node> satellite_;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> in_flight_;
    std::vector<LinkEvent> log_;
    double now_s_ = 0.0;
    double max_virtual_s_ = 1e6;  // ~11 virtual days; any real scenario fits
    uint64_t seq_ = 0;
};

// Ground-client transport running over the simulated link: sends enter the
// uplink at the current virtual time; an exchange advances the simulation
// until the reply lands (or the link goes idle, reported as silence).
services::SatTransport transport_over(LinkSim& sim, std::shared_ptr<csp::Node> ground);

}  // namespace ipu::sim
