#pragma once

#include <cstdint>
#include <string>

// Mission requirement math: inter-image capture period, images per pass,
// per-scenario latency/storage budgets, energy-per-inference, duty cycle,
// and the device-vs-budget verdict used to rank candidate processors.

namespace ipu::mission {

// Physical constants for the fallback velocity model.
inline constexpr double kMuEarth = 3.986004418e14;  // m^3/s^2
inline constexpr double kEarthRadiusM = 6.371e6;

// Budget constants. The book-keeping image size is the nominal 60 MB/image
// figure used for storage sizing; the exact raw frame produced by the camera
// is width*height*3 bytes (61,074,432 for the 4512^2 sensor) and is what the
// transfer and tiling paths move around. Keep the two apart deliberately.
inline constexpr uint64_t kNominalImageBytes = 60'000'000;
inline constexpr double kGreenlandExtentM = 2'670'000.0;
inline constexpr int kGreenlandPassesPerDay = 4;
inline constexpr double kNominalPowerLimitMw = 2000.0;  // 2.00 W nominal ceiling
inline constexpr double kPeakPowerLimitMw = 5000.0;     // 5.00 W peak ceiling
inline constexpr double kReferencePowerMw = 1480.0;     // reported, never gated on
inline constexpr double kDesignMargin = 0.05;           // optional strict mode

struct CameraModel {
    double gsd_m_per_px = 14.8495;  // ground sample distance
    int image_height_px = 4512;    // along-track pixels
    int image_width_px = 4512;
    double overlap_fraction = 0.5;  // frame-advance fraction between captures
    int bytes_per_pixel = 3;

    uint64_t frame_bytes() const {
        return static_cast<uint64_t>(image_width_px) * image_height_px * bytes_per_pixel;
    }
    // Along-track ground distance advanced per capture, meters.
    double footprint_stride_m() const {
        return gsd_m_per_px * image_height_px * overlap_fraction;
    }
    void validate() const;  // throws std::invalid_argument
};

struct OrbitModel {
    double altitude_m = 550'000.0;
    double orbital_velocity_m_s = 7585.16;  // ground-track speed
    double orbital_period_s = 5739.0;
    double day_length_s = 86'400.0;

    void validate() const;
};

enum class Scenario { RealTime, Arctic, Greenland };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);  // throws on unknown

struct ScenarioBudget {
    Scenario scenario_id = Scenario::RealTime;
    double per_image_latency_s = 0.0;
    int buffered_images = 0;
    uint64_t storage_required_bytes = 0;
    double nominal_power_limit_mw = kNominalPowerLimitMw;
    double peak_power_limit_mw = kPeakPowerLimitMw;
};

struct DeviceMeasurement {
    std::string device_name;
    double full_image_latency_s = 0.0;  // t: all patches of one frame
    double avg_power_mw = 0.0;          // P-bar while inferring
    double peak_power_mw = 0.0;
    uint64_t storage_bytes = 0;
    double mass_g = 0.0;

    void validate() const;
};

struct Verdict {
    bool latency_ok = false;
    bool nominal_power_ok = false;
    bool peak_power_ok = false;
    bool storage_ok = false;
    double duty_cycle = 0.0;       // uncapped; >1 means the device cannot keep up
    double nominal_power_mw = 0.0;
    double energy_mwh = 0.0;       // per full-image inference

    bool all_ok() const { return latency_ok && nominal_power_ok && peak_power_ok && storage_ok; }
};

// Seconds between captures at the given overlap: GSD * H * overlap / v.
// Throws std::domain_error on zero velocity.
double inter_image_period(const CameraModel& camera, const OrbitModel& orbit);

// Circular-orbit fallback when no measured ground speed is supplied:
// sqrt(mu / (R_earth + h)).
double orbital_velocity(double altitude_m);

struct PassImages {
    double quotient = 0.0;  // extent / footprint stride, before rounding
    int count = 0;          // ceiling: partial footprints still cost an image
};

// Images needed to cover `extent_m` of ground track. Throws std::domain_error
// if the footprint stride is zero.
PassImages images_per_pass(double extent_m, const CameraModel& camera);

// Latency/buffering/storage budget for one operating scenario:
//   RealTime  - keep up with the capture rate, one image in flight;
//   Arctic    - clear one pass (80 images) within one orbital period;
//   Greenland - clear a day's worth (4 passes) within one day.
ScenarioBudget scenario_budget(Scenario scenario, const CameraModel& camera,
                               const OrbitModel& orbit);

// E = P-bar * (t / 3600): milliwatt-hours for one inference of `latency_s`.
double energy_consumption(double avg_power_mw, double latency_s);

// achieved/required, uncapped. Throws std::domain_error on required <= 0.
double duty_cycle(double achieved_latency_s, double required_latency_s);

// Average draw over the image period; the duty factor saturates at 1 because
// a device cannot be more than fully active.
double nominal_power(double avg_power_mw, double duty);

// Gate a measured device against a scenario budget. With `strict_margin`,
// every allowance shrinks by the 5% design margin (latency and power budgets
// scale by 0.95, the storage requirement grows by 1.05).
Verdict evaluate_device(const DeviceMeasurement& m, const ScenarioBudget& b,
                        bool strict_margin = false);

}  // namespace ipu::mission
