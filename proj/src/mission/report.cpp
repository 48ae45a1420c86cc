#include "ipu/mission/report.hpp"

#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ipu::mission {

using nlohmann::json;

namespace {

CameraModel camera_from_json(const json& j) {
    CameraModel c;
    c.gsd_m_per_px = j.value("gsd_m_per_px", c.gsd_m_per_px);
    c.image_height_px = j.value("image_height_px", c.image_height_px);
    c.image_width_px = j.value("image_width_px", c.image_width_px);
    c.overlap_fraction = j.value("overlap_fraction", c.overlap_fraction);
    c.bytes_per_pixel = j.value("bytes_per_pixel", c.bytes_per_pixel);
    c.validate();
    return c;
}

OrbitModel orbit_from_json(const json& j) {
    OrbitModel o;
    o.altitude_m = j.value("altitude_m", o.altitude_m);
    if (j.contains("orbital_velocity_m_s")) {
        o.orbital_velocity_m_s = j.at("orbital_velocity_m_s").get<double>();
    } else if (j.contains("altitude_m")) {
        o.orbital_velocity_m_s = orbital_velocity(o.altitude_m);  // vis-viva fallback
    }
    o.orbital_period_s = j.value("orbital_period_s", o.orbital_period_s);
    o.day_length_s = j.value("day_length_s", o.day_length_s);
    o.validate();
    return o;
}

DeviceMeasurement device_from_json(const json& j) {
    DeviceMeasurement m;
    m.device_name = j.at("device_name").get<std::string>();
    m.full_image_latency_s = j.at("full_image_latency_s").get<double>();
    m.avg_power_mw = j.at("avg_power_mw").get<double>();
    m.peak_power_mw = j.at("peak_power_mw").get<double>();
    m.storage_bytes = j.value("storage_bytes", uint64_t{0});
    m.mass_g = j.value("mass_g", 0.0);
    m.validate();
    return m;
}

json budget_to_json(const ScenarioBudget& b) {
    return json{{"scenario", to_string(b.scenario_id)},
                {"per_image_latency_s", b.per_image_latency_s},
                {"buffered_images", b.buffered_images},
                {"storage_required_bytes", b.storage_required_bytes},
                {"storage_required_mb", static_cast<double>(b.storage_required_bytes) / 1e6},
                {"nominal_power_limit_mw", b.nominal_power_limit_mw},
                {"peak_power_limit_mw", b.peak_power_limit_mw}};
}

json verdict_to_json(const Verdict& v) {
    return json{{"latency_ok", v.latency_ok},
                {"nominal_power_ok", v.nominal_power_ok},
                {"peak_power_ok", v.peak_power_ok},
                {"storage_ok", v.storage_ok},
                {"all_ok", v.all_ok()},
                {"duty_cycle", v.duty_cycle},
                {"nominal_power_mw", v.nominal_power_mw},
                {"energy_mwh", v.energy_mwh}};
}

}  // namespace

EvaluationInput parse_evaluation_input(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("evaluation input is not valid JSON: ") + e.what());
    }
    try {
        EvaluationInput in;
        if (j.contains("camera")) in.camera = camera_from_json(j.at("camera"));
        if (j.contains("orbit")) in.orbit = orbit_from_json(j.at("orbit"));
        for (const auto& d : j.value("devices", json::array())) {
            in.devices.push_back(device_from_json(d));
        }
        if (j.contains("scenarios")) {
            for (const auto& s : j.at("scenarios")) {
                in.scenarios.push_back(scenario_from_string(s.get<std::string>()));
            }
        }
        in.strict_margin = j.value("strict_margin", false);
        return in;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("evaluation input malformed: ") + e.what());
    }
}

std::vector<EvaluationRow> evaluate_all(const EvaluationInput& input) {
    std::vector<Scenario> scenarios = input.scenarios;
    if (scenarios.empty()) {
        scenarios = {Scenario::RealTime, Scenario::Arctic, Scenario::Greenland};
    }
    std::vector<EvaluationRow> rows;
    for (const auto& device : input.devices) {
        for (Scenario s : scenarios) {
            EvaluationRow row;
            row.device_name = device.device_name;
            row.scenario = s;
            row.budget = scenario_budget(s, input.camera, input.orbit);
            row.verdict = evaluate_device(device, row.budget, input.strict_margin);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string evaluation_to_json(const EvaluationInput& input,
                               const std::vector<EvaluationRow>& rows) {
    json out;
    out["strict_margin"] = input.strict_margin;
    out["reference_power_mw"] = kReferencePowerMw;  // Table-style context, not a gate
    json budgets = json::array();
    for (Scenario s : {Scenario::RealTime, Scenario::Arctic, Scenario::Greenland}) {
        budgets.push_back(budget_to_json(scenario_budget(s, input.camera, input.orbit)));
    }
    out["budgets"] = budgets;
    json results = json::array();
    for (const auto& row : rows) {
        json r = verdict_to_json(row.verdict);
        r["device_name"] = row.device_name;
        r["scenario"] = to_string(row.scenario);
        results.push_back(std::move(r));
    }
    out["results"] = results;
    return out.dump(2);
}

std::string evaluation_to_csv(const std::vector<EvaluationRow>& rows) {
    std::ostringstream out;
    out << "device_name,scenario,per_image_latency_s,duty_cycle,nominal_power_mw,energy_mwh,"
           "latency_ok,nominal_power_ok,peak_power_ok,storage_ok,all_ok\n";
    for (const auto& row : rows) {
        const Verdict& v = row.verdict;
        out << row.device_name << ',' << to_string(row.scenario) << ','
            << row.budget.per_image_latency_s << ',' << v.duty_cycle << ','
            << v.nominal_power_mw << ',' << v.energy_mwh << ',' << (v.latency_ok ? 1 : 0) << ','
            << (v.nominal_power_ok ? 1 : 0) << ',' << (v.peak_power_ok ? 1 : 0) << ','
            << (v.storage_ok ? 1 : 0) << ',' << (v.all_ok() ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string budgets_to_json(const CameraModel& camera, const OrbitModel& orbit) {
    json out;
    out["inter_image_period_s"] = inter_image_period(camera, orbit);
    auto pass = images_per_pass(kGreenlandExtentM, camera);
    out["images_per_pass"] = {{"quotient", pass.quotient}, {"count", pass.count}};
    json budgets = json::array();
    for (Scenario s : {Scenario::RealTime, Scenario::Arctic, Scenario::Greenland}) {
        budgets.push_back(budget_to_json(scenario_budget(s, camera, orbit)));
    }
    out["budgets"] = budgets;
    return out.dump(2);
}

}  // namespace ipu::mission
