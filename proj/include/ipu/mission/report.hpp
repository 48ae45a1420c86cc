#pragma once

#include <string>
#include <vector>

#include "ipu/mission/model.hpp"

// JSON and CSV surfaces for the mission math: models and device measurements
// in, budgets and verdicts out. Schemas are documented in docs/formats.md.

namespace ipu::mission {

struct EvaluationInput {
    CameraModel camera;
    OrbitModel orbit;
    std::vector<DeviceMeasurement> devices;
    std::vector<Scenario> scenarios;  // empty -> all three
    bool strict_margin = false;
};

// Parses {"camera": {...}, "orbit": {...}, "devices": [...], "scenarios":
// [...], "strict_margin": bool}. Missing camera/orbit fields keep the
// defaults; "scenarios" and "strict_margin" are optional. Throws
// std::invalid_argument on malformed JSON or failed validation.
EvaluationInput parse_evaluation_input(const std::string& json_text);

struct EvaluationRow {
    std::string device_name;
    Scenario scenario;
    ScenarioBudget budget;
    Verdict verdict;
};

std::vector<EvaluationRow> evaluate_all(const EvaluationInput& input);

// One JSON document for the full evaluation (budgets + per-device verdicts).
std::string evaluation_to_json(const EvaluationInput& input,
                               const std::vector<EvaluationRow>& rows);

// CSV: header + one row per device x scenario.
std::string evaluation_to_csv(const std::vector<EvaluationRow>& rows);

// Budget-only JSON for the `plan` tool (per-scenario table).
std::string budgets_to_json(const CameraModel& camera, const OrbitModel& orbit);

}  // namespace ipu::mission
