#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oscgeo/npf.hpp"
#include "oscgeo/simulate.hpp"

// The synthetic-oscillator acceptance battery. Each check exercises one
// acceptance criterion end to end and reports what it measured.

namespace oscgeo::checks {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double seconds = 0.0;
    nlohmann::json measured;
};

struct BatteryOptions {
    /// Multiplies every numeric tolerance; 0 turns each check into an exact test.
    double tolerance_scale = 1.0;
    /// Criteria 8 (QMLE) and 10 (pipeline determinism) take minutes.
    bool include_slow = true;
    /// Scratch space for the pipeline determinism check.
    std::string work_dir;
    /// Restrict to these criterion ids; empty runs all.
    std::vector<int> only;
};

std::vector<CheckResult> run_battery(const BatteryOptions& options,
                                     const std::function<void(const CheckResult&)>& on_result = {});

nlohmann::json battery_report(const std::vector<CheckResult>& results);

/// Parameters of the linear-oscillator recovery dataset:
/// f = -x1 - 0.5 x2, sigma1 = 0, sigma2 = 0.05, sigma_eps = 0.001, dt = 0.01,
/// n = 5000, 10 Euler substeps, started from (1, 0).
struct OscillatorDataset {
    simulate::LatentPath path;
    npf::ObservationSeries series;
    npf::ModelParams truth;
};
OscillatorDataset oscillator_dataset(std::uint64_t seed);

}  // namespace oscgeo::checks
