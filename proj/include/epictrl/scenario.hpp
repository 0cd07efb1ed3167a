#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "epictrl/continuation.hpp"
#include "epictrl/sensitivity.hpp"

namespace epictrl {

enum class RunMode { Simulate, Optimize, KappaContinuation, HorizonContinuation, Sweep, FinalSize };

RunMode run_mode_from_string(const std::string& name);
std::string to_string(RunMode mode);
SweepParameter sweep_parameter_from_string(const std::string& name);
std::string to_string(SweepParameter p);
std::string to_string(SweepMode m);
std::string to_string(SingularPolicy p);

/// Randomized-design settings parsed from a scenario's sweep section.
struct RandomSweepSettings {
    RandomSweepDesign design;
    bool enabled = false;
};

/// A fully validated run description: model, costs, initial state, grids,
/// mode and per-mode settings.
struct Scenario {
    RunMode mode = RunMode::Simulate;
    ModelParams model;
    CostParams cost;
    EpidemicState initial;
    double horizon = 0.0;
    double dt = 0.01;
    std::uint64_t seed = 0;
    SolverConfig solver;
    std::optional<ControlSchedule> schedule;
    std::optional<SweepSpec> sweep;
    RandomSweepSettings random_sweep;
    std::vector<double> kappa_ladder{10.0, 100.0, 1000.0, 10000.0};
    std::vector<double> t_ladder{100.0, 200.0, 400.0};

    /// Cross-field checks: dt divides horizon, schedule grid compatible with
    /// dt, schedule admissible, per-mode requirements. Throws ValidationError.
    void validate() const;

    /// The control schedule to simulate or to seed the solver with: the
    /// explicit one when present, otherwise zero controls on the dt grid.
    ControlSchedule effective_schedule() const;

    PipelineCase pipeline_case() const;
};

/// Parses a scenario from flat dotted-key text (model.beta = 0.5) or JSON
/// (nested objects of the same schema; detected by a leading '{' or a .json
/// extension). Unknown and duplicate keys are errors with line/key context.
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<string>");
Scenario parse_scenario_json(const std::string& text, const std::string& origin = "<string>");

/// Exit codes shared by run_scenario and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNonConvergence = 3;
inline constexpr int kExitNumeric = 4;

struct RunOutcome {
    int exit_code = kExitOk;
    std::string summary_path;
};

/// Executes the scenario and writes machine-readable artifacts into out_dir:
/// summary.json always, trajectory.csv for trajectory-producing modes,
/// sweep.csv for sweeps, error.json on failure. Deterministic for a fixed
/// (scenario, seed).
RunOutcome run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

} // namespace epictrl
