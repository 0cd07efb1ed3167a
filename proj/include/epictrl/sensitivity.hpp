#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "epictrl/pmp.hpp"

namespace epictrl {

enum class SweepParameter { Beta, UMax, HMax, TDelayU, TDelayH, Kappa, IMax };
enum class SweepMode { Simulate, Optimize };

/// Everything one pipeline run needs: the sweep driver perturbs copies of
/// this case, never shared state, so rows are independent.
struct PipelineCase {
    EpidemicState x0;
    ModelParams model;
    CostParams cost;
    double horizon = 0.0;
    double dt = 0.01;
    ControlSchedule schedule; ///< used by Simulate mode and as the Optimize init
    SolverConfig solver;
};

/// One swept value of a single model parameter.
struct SweepSpec {
    SweepParameter parameter = SweepParameter::Beta;
    std::vector<double> values;
    SweepMode mode = SweepMode::Simulate;
};

struct SweepRow {
    double value = 0.0;
    double cost_total = 0.0;
    double peak_i = 0.0;
    double final_size = 0.0;
    double max_violation = 0.0;
    bool converged = false;
    bool failed = false;
    std::string error;
};

/// One full pipeline run per swept value. Per-row failures are recorded in
/// the row and the sweep continues. Each swept value must keep the model
/// valid (in particular h_max < beta).
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const PipelineCase& base);

/// Randomized joint design over (beta, u_max, h_max): Latin-hypercube style
/// stratified samples, deterministic for a fixed seed. Simulate rows apply
/// the sampled maxima as constant controls.
struct RandomSweepDesign {
    std::pair<double, double> beta_range{0.3, 0.7};
    std::pair<double, double> u_max_range{0.01, 0.10};
    std::pair<double, double> h_max_range{0.05, 0.25};
    int samples = 64;
    std::uint64_t seed = 0;
    SweepMode mode = SweepMode::Simulate;
};

struct RandomSweepRow {
    double beta = 0.0, u_max = 0.0, h_max = 0.0;
    double cost_total = 0.0;
    double peak_i = 0.0;
    double final_size = 0.0;
    double max_violation = 0.0;
    bool converged = false;
    bool failed = false;
};

std::vector<RandomSweepRow> run_random_sweep(const RandomSweepDesign& design,
                                             const PipelineCase& base);

/// Sample Pearson correlation coefficient. Requires equal lengths >= 3 and
/// nonzero variance in both samples.
double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

/// Marginal value of relaxing a control bound, recovered from the bound
/// multiplier nu(t) = (-Phi)_+ on cells where the control sits at its upper
/// bound (within bind_tol relative). Returns -dV/dbound >= 0, the integral of
/// nu over the horizon. Requires a converged result.
double capacity_shadow_value(const OptimizationResult& result, ControlKind which,
                             const ModelParams& params, double bind_tol = 1e-3);

} // namespace epictrl
