// ipuctl: mission planning/evaluation reports plus an operator interface to a
// satellite payload node (simulated in-process by default, or a live TCP
// bridge). Every subcommand prints machine-readable JSON with --json;
// diagnostics go to stderr only.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cli_common.hpp"
#include "ipu/mission/model.hpp"
#include "ipu/mission/report.hpp"
#include "json.hpp"

namespace ipuctl {

using nlohmann::json;
namespace mission = ipu::mission;

std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError(kExitInput, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in.good() && !in.eof()) throw CliError(kExitInput, "cannot read " + path);
    return buf.str();
}

namespace {

json parse_json_file(const std::string& path) {
    try {
        return json::parse(slurp_file(path));
    } catch (const json::parse_error& e) {
        throw CliError(kExitInput, path + ": " + e.what());
    }
}

// Model files are strict where the library parser is lenient: a camera file
// must spell out the geometry it claims to describe.
mission::CameraModel load_camera(const std::string& path) {
    json j = parse_json_file(path);
    for (const char* key :
         {"gsd_m_per_px", "image_height_px", "image_width_px", "overlap_fraction"}) {
        if (!j.contains(key)) {
            throw CliError(kExitInput, path + ": missing required field " + key);
        }
    }
    mission::CameraModel c;
    try {
        c.gsd_m_per_px = j.at("gsd_m_per_px").get<double>();
        c.image_height_px = j.at("image_height_px").get<int>();
        c.image_width_px = j.at("image_width_px").get<int>();
        c.overlap_fraction = j.at("overlap_fraction").get<double>();
        c.bytes_per_pixel = j.value("bytes_per_pixel", c.bytes_per_pixel);
        c.validate();
    } catch (const std::exception& e) {
        throw CliError(kExitInput, path + ": " + e.what());
    }
    return c;
}

mission::OrbitModel load_orbit(const std::string& path) {
    json j = parse_json_file(path);
    if (!j.contains("orbital_velocity_m_s") && !j.contains("altitude_m")) {
        throw CliError(kExitInput,
                       path + ": needs orbital_velocity_m_s or altitude_m");
    }
    mission::OrbitModel o;
    try {
        o.altitude_m = j.value("altitude_m", o.altitude_m);
        if (j.contains("orbital_velocity_m_s")) {
            o.orbital_velocity_m_s = j.at("orbital_velocity_m_s").get<double>();
        } else {
            o.orbital_velocity_m_s = mission::orbital_velocity(o.altitude_m);
        }
        o.orbital_period_s = j.value("orbital_period_s", o.orbital_period_s);
        o.day_length_s = j.value("day_length_s", o.day_length_s);
        o.validate();
    } catch (const std::exception& e) {
        throw CliError(kExitInput, path + ": " + e.what());
    }
    return o;
}

mission::Scenario parse_scenario(const std::string& name) {
    try {
        return mission::scenario_from_string(name);
    } catch (const std::invalid_argument&) {
        throw CliError(kExitInput, "unknown scenario '" + name +
                                       "' (expected real_time, arctic or greenland)");
    }
}

// -------------------------------------------------------------- plan --------

struct PlanArgs {
    std::string camera_path;
    std::string orbit_path;
    std::string scenario;
    bool as_json = false;
};

void run_plan(const PlanArgs& a) {
    const mission::CameraModel cam =
        a.camera_path.empty() ? mission::CameraModel{} : load_camera(a.camera_path);
    const mission::OrbitModel orb =
        a.orbit_path.empty() ? mission::OrbitModel{} : load_orbit(a.orbit_path);
    std::optional<mission::Scenario> only;
    if (!a.scenario.empty()) only = parse_scenario(a.scenario);

    const double period = mission::inter_image_period(cam, orb);
    const mission::PassImages pass = mission::images_per_pass(mission::kGreenlandExtentM, cam);

    std::vector<mission::ScenarioBudget> budgets;
    for (mission::Scenario s :
         {mission::Scenario::RealTime, mission::Scenario::Arctic, mission::Scenario::Greenland}) {
        if (only && s != *only) continue;
        budgets.push_back(mission::scenario_budget(s, cam, orb));
    }

    if (a.as_json) {
        json doc = json::parse(mission::budgets_to_json(cam, orb));
        if (only) {
            json kept = json::array();
            for (auto& b : doc.at("budgets")) {
                if (b.at("scenario") == mission::to_string(*only)) kept.push_back(b);
            }
            doc["budgets"] = kept;
        }
        std::cout << doc.dump(2) << "\n";
        return;
    }

    std::cout << std::fixed;
    std::cout << "inter-image period: " << std::setprecision(2) << period << " s\n";
    std::cout << "images per " << std::setprecision(0) << mission::kGreenlandExtentM / 1000.0
              << " km pass: " << std::setprecision(2) << pass.quotient << " -> " << pass.count
              << "\n\n";
    std::cout << std::left << std::setw(11) << "scenario" << std::right << std::setw(10)
              << "latency_s" << std::setw(8) << "images" << std::setw(12) << "storage_mb"
              << std::setw(12) << "nominal_mw" << std::setw(9) << "peak_mw"
              << "\n";
    for (const auto& b : budgets) {
        std::cout << std::left << std::setw(11) << mission::to_string(b.scenario_id) << std::right
                  << std::setw(10) << std::setprecision(2) << b.per_image_latency_s << std::setw(8)
                  << b.buffered_images << std::setw(12) << std::setprecision(1)
                  << static_cast<double>(b.storage_required_bytes) / 1e6 << std::setw(12)
                  << std::setprecision(0) << b.nominal_power_limit_mw << std::setw(9)
                  << b.peak_power_limit_mw << "\n";
    }
}

// ---------------------------------------------------------- evaluate --------

struct EvaluateArgs {
    std::string devices_path;
    std::string camera_path;
    std::string orbit_path;
    std::vector<std::string> scenarios;
    bool strict_margin = false;
    bool as_json = false;
    bool as_csv = false;
};

// One measurement row: device_name,full_image_latency_s,avg_power_mw,
// peak_power_mw,storage_bytes,mass_g. Returns false (with a message) on a
// malformed row instead of throwing so the caller can keep going.
bool parse_device_row(const std::string& line, mission::DeviceMeasurement& out,
                      std::string& error) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (fields.size() != 6) {
        error = "expected 6 columns, got " + std::to_string(fields.size());
        return false;
    }
    try {
        size_t used = 0;
        mission::DeviceMeasurement m;
        m.device_name = fields[0];
        m.full_image_latency_s = std::stod(fields[1], &used);
        if (used != fields[1].size()) throw std::invalid_argument("latency");
        m.avg_power_mw = std::stod(fields[2], &used);
        if (used != fields[2].size()) throw std::invalid_argument("avg power");
        m.peak_power_mw = std::stod(fields[3], &used);
        if (used != fields[3].size()) throw std::invalid_argument("peak power");
        m.storage_bytes = std::stoull(fields[4], &used);
        if (used != fields[4].size()) throw std::invalid_argument("storage");
        m.mass_g = std::stod(fields[5], &used);
        if (used != fields[5].size()) throw std::invalid_argument("mass");
        m.validate();
        out = std::move(m);
        return true;
    } catch (const std::exception& e) {
        error = e.what();
        return false;
    }
}

void run_evaluate(const EvaluateArgs& a) {
    mission::EvaluationInput input;
    input.camera = a.camera_path.empty() ? mission::CameraModel{} : load_camera(a.camera_path);
    input.orbit = a.orbit_path.empty() ? mission::OrbitModel{} : load_orbit(a.orbit_path);
    input.strict_margin = a.strict_margin;
    for (const auto& s : a.scenarios) input.scenarios.push_back(parse_scenario(s));

    const std::string text = slurp_file(a.devices_path);
    std::istringstream lines(text);
    std::string line;
    int line_no = 0;
    int bad_rows = 0;
    bool seen_data = false;
    while (std::getline(lines, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!seen_data && line.rfind("device_name", 0) == 0) continue;  // header row
        seen_data = true;
        mission::DeviceMeasurement m;
        std::string error;
        if (parse_device_row(line, m, error)) {
            input.devices.push_back(std::move(m));
        } else {
            std::cerr << a.devices_path << ":" << line_no << ": " << error << "\n";
            ++bad_rows;
        }
    }

    const auto rows = mission::evaluate_all(input);
    if (a.as_json) {
        std::cout << mission::evaluation_to_json(input, rows) << "\n";
    } else if (a.as_csv) {
        std::cout << mission::evaluation_to_csv(rows);
    } else {
        std::cout << std::left << std::setw(22) << "device" << std::setw(11) << "scenario"
                  << std::right << std::setw(10) << "latency_s" << std::setw(10) << "budget_s"
                  << std::setw(8) << "duty" << std::setw(12) << "nominal_mw" << std::setw(12)
                  << "energy_mwh"
                  << "  verdict\n";
        for (const auto& r : rows) {
            const mission::DeviceMeasurement* dev = nullptr;
            for (const auto& d : input.devices) {
                if (d.device_name == r.device_name) dev = &d;
            }
            std::cout << std::left << std::setw(22) << r.device_name << std::setw(11)
                      << mission::to_string(r.scenario) << std::right << std::fixed
                      << std::setw(10) << std::setprecision(3)
                      << (dev ? dev->full_image_latency_s : 0.0) << std::setw(10)
                      << std::setprecision(2) << r.budget.per_image_latency_s << std::setw(8)
                      << std::setprecision(3) << r.verdict.duty_cycle << std::setw(12)
                      << std::setprecision(0) << r.verdict.nominal_power_mw << std::setw(12)
                      << std::setprecision(2) << r.verdict.energy_mwh << "  ";
            if (r.verdict.all_ok()) {
                std::cout << "pass";
            } else {
                std::cout << "FAIL(";
                const char* sep = "";
                if (!r.verdict.latency_ok) { std::cout << sep << "latency"; sep = ","; }
                if (!r.verdict.nominal_power_ok) { std::cout << sep << "nominal"; sep = ","; }
                if (!r.verdict.peak_power_ok) { std::cout << sep << "peak"; sep = ","; }
                if (!r.verdict.storage_ok) { std::cout << sep << "storage"; sep = ","; }
                std::cout << ")";
            }
            std::cout << "\n";
        }
    }
    if (bad_rows > 0) {
        std::cerr << bad_rows << " row(s) rejected\n";
        throw CliError(kExitPartial, "");
    }
}

}  // namespace

void register_plan(CLI::App& app) {
    auto args = std::make_shared<PlanArgs>();
    CLI::App* plan = app.add_subcommand("plan", "Per-scenario imaging budgets");
    plan->add_option("--camera", args->camera_path, "Camera model JSON (defaults built in)");
    plan->add_option("--orbit", args->orbit_path, "Orbit model JSON (defaults built in)");
    plan->add_option("--scenario", args->scenario, "Limit to one scenario");
    plan->add_flag("--json", args->as_json, "JSON document on stdout");
    plan->callback([args] { run_plan(*args); });
}

void register_evaluate(CLI::App& app) {
    auto args = std::make_shared<EvaluateArgs>();
    CLI::App* ev = app.add_subcommand("evaluate", "Gate measured devices against the budgets");
    ev->add_option("--devices", args->devices_path, "Device measurement CSV")->required();
    ev->add_option("--camera", args->camera_path, "Camera model JSON (defaults built in)");
    ev->add_option("--orbit", args->orbit_path, "Orbit model JSON (defaults built in)");
    ev->add_option("--scenario", args->scenarios, "Scenario filter (repeatable)");
    ev->add_flag("--strict-margin", args->strict_margin, "Apply the 5% design margin");
    ev->add_flag("--json", args->as_json, "JSON document on stdout");
    ev->add_flag("--csv", args->as_csv, "CSV table on stdout");
    ev->callback([args] { run_evaluate(*args); });
}

}  // namespace ipuctl

int main(int argc, char** argv) {
    CLI::App app{"CubeSat image-processing payload: planning reports and satellite operations"};
    app.require_subcommand(1);
    ipuctl::register_plan(app);
    ipuctl::register_evaluate(app);
    ipuctl::register_sat(app);
    ipuctl::register_serve(app);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ipuctl::kExitOk : ipuctl::kExitInput;
    } catch (const ipuctl::CliError& e) {
        if (e.what()[0] != '\0') std::cerr << "error: " << e.what() << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ipuctl::kExitInternal;
    }
    return ipuctl::kExitOk;
}
