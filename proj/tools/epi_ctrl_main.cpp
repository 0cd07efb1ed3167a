#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "epictrl/scenario.hpp"

namespace {

constexpr const char* kModes[] = {"simulate",           "optimize", "kappa-continuation",
                                  "horizon-continuation", "sweep",    "final-size"};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal epidemic control toolkit: SEIR simulation, Pontryagin "
                 "forward-backward solves, continuation ladders and sensitivity sweeps"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    double dt = 0.0;
    double horizon = 0.0;

    for (const char* mode : kModes) {
        auto* sub = app.add_subcommand(mode, std::string("run a scenario in ") + mode + " mode");
        sub->add_option("--scenario", scenario_path, "scenario file (dotted-key text or JSON)")
            ->required();
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "override the scenario seed")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--dt", dt, "override the integration step");
        sub->add_option("--horizon", horizon, "override the horizon");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string mode_name = app.get_subcommands().front()->get_name();

    try {
        epictrl::Scenario scenario = epictrl::parse_scenario(scenario_path);
        scenario.mode = epictrl::run_mode_from_string(mode_name);
        if (seed_set) scenario.seed = seed;
        if (dt > 0.0) scenario.dt = dt;
        if (horizon > 0.0) scenario.horizon = horizon;
        if (scenario.random_sweep.enabled) scenario.random_sweep.design.seed = scenario.seed;
        scenario.validate();

        const auto outcome = epictrl::run_scenario(scenario, out_dir);
        if (outcome.exit_code == epictrl::kExitOk)
            std::cout << outcome.summary_path << "\n";
        return outcome.exit_code;
    } catch (const epictrl::ValidationError& ex) {
        std::cerr << "validation error: " << ex.what() << "\n";
        return epictrl::kExitValidation;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return epictrl::kExitNumeric;
    }
}
