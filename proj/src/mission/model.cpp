#include "ipu/mission/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ipu::mission {

void CameraModel::validate() const {
    if (gsd_m_per_px <= 0 || image_height_px <= 0 || image_width_px <= 0 || bytes_per_pixel <= 0) {
        throw std::invalid_argument("camera dimensions must be positive");
    }
    if (overlap_fraction < 0.0 || overlap_fraction >= 1.0) {
        throw std::invalid_argument("overlap_fraction must be in [0, 1)");
    }
}

void OrbitModel::validate() const {
    if (orbital_velocity_m_s <= 0) throw std::invalid_argument("orbital velocity must be positive");
    if (orbital_period_s <= 0) throw std::invalid_argument("orbital period must be positive");
    if (day_length_s <= 0) throw std::invalid_argument("day length must be positive");
    if (altitude_m < 0) throw std::invalid_argument("altitude must be non-negative");
}

void DeviceMeasurement::validate() const {
    if (full_image_latency_s < 0 || avg_power_mw < 0 || peak_power_mw < 0 || mass_g < 0) {
        throw std::invalid_argument("measurements must be non-negative");
    }
    if (peak_power_mw < avg_power_mw) {
        throw std::invalid_argument("peak power below average power");
    }
}

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::RealTime: return "real_time";
        case Scenario::Arctic: return "arctic";
        case Scenario::Greenland: return "greenland";
    }
    return "?";
}

Scenario scenario_from_string(const std::string& name) {
    if (name == "real_time") return Scenario::RealTime;
    if (name == "arctic") return Scenario::Arctic;
    if (name == "greenland") return Scenario::Greenland;
    throw std::invalid_argument("unknown scenario: " + name);
}

double inter_image_period(const CameraModel& camera, const OrbitModel& orbit) {
    camera.validate();
    if (orbit.orbital_velocity_m_s <= 0) {
        throw std::domain_error("inter_image_period: velocity must be positive");
    }
    return camera.footprint_stride_m() / orbit.orbital_velocity_m_s;
}

double orbital_velocity(double altitude_m) {
    if (altitude_m < 0) throw std::domain_error("orbital_velocity: negative altitude");
    return std::sqrt(kMuEarth / (kEarthRadiusM + altitude_m));
}

PassImages images_per_pass(double extent_m, const CameraModel& camera) {
    camera.validate();
    if (extent_m <= 0) throw std::domain_error("images_per_pass: extent must be positive");
    double stride = camera.footprint_stride_m();
    if (stride <= 0) throw std::domain_error("images_per_pass: zero footprint stride");
    PassImages out;
    out.quotient = extent_m / stride;
    out.count = static_cast<int>(std::ceil(out.quotient));
    return out;
}

ScenarioBudget scenario_budget(Scenario scenario, const CameraModel& camera,
                               const OrbitModel& orbit) {
    camera.validate();
    orbit.validate();
    ScenarioBudget b;
    b.scenario_id = scenario;
    switch (scenario) {
        case Scenario::RealTime:
            // Keep pace with capture: each image must clear before the next.
            b.per_image_latency_s = inter_image_period(camera, orbit);
            b.buffered_images = 1;
            break;
        case Scenario::Arctic: {
            // One pass of images buffered, cleared within one orbit.
            int pass = images_per_pass(kGreenlandExtentM, camera).count;
            b.per_image_latency_s = orbit.orbital_period_s / pass;
            b.buffered_images = pass;
            break;
        }
        case Scenario::Greenland: {
            // A day's worth of passes buffered, cleared within the day.
            int pass = images_per_pass(kGreenlandExtentM, camera).count;
            int daily = kGreenlandPassesPerDay * pass;
            b.per_image_latency_s = orbit.day_length_s / daily;
            b.buffered_images = daily;
            break;
        }
    }
    b.storage_required_bytes = static_cast<uint64_t>(b.buffered_images) * kNominalImageBytes;
    return b;
}

double energy_consumption(double avg_power_mw, double latency_s) {
    if (avg_power_mw < 0 || latency_s < 0) {
        throw std::domain_error("energy_consumption: negative input");
    }
    return avg_power_mw * (latency_s / 3600.0);
}

double duty_cycle(double achieved_latency_s, double required_latency_s) {
    if (required_latency_s <= 0) {
        throw std::domain_error("duty_cycle: required latency must be positive");
    }
    return achieved_latency_s / required_latency_s;
}

double nominal_power(double avg_power_mw, double duty) {
    return avg_power_mw * std::min(duty, 1.0);
}

Verdict evaluate_device(const DeviceMeasurement& m, const ScenarioBudget& b, bool strict_margin) {
    m.validate();
    const double shrink = strict_margin ? 1.0 - kDesignMargin : 1.0;
    const double grow = strict_margin ? 1.0 + kDesignMargin : 1.0;

    Verdict v;
    v.duty_cycle = duty_cycle(m.full_image_latency_s, b.per_image_latency_s);
    v.nominal_power_mw = nominal_power(m.avg_power_mw, v.duty_cycle);
    v.energy_mwh = energy_consumption(m.avg_power_mw, m.full_image_latency_s);
    v.latency_ok = m.full_image_latency_s <= b.per_image_latency_s * shrink;
    v.nominal_power_ok = v.nominal_power_mw <= b.nominal_power_limit_mw * shrink;
    v.peak_power_ok = m.peak_power_mw <= b.peak_power_limit_mw * shrink;
    v.storage_ok = m.storage_bytes >=
                   static_cast<uint64_t>(static_cast<double>(b.storage_required_bytes) * grow);
    return v;
}

}  // namespace ipu::mission
