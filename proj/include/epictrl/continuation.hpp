#pragma once

#include <optional>

#include "epictrl/pmp.hpp"

namespace epictrl {

/// One rung of a continuation ladder.
struct ContinuationRung {
    double parameter = 0.0;       ///< kappa or horizon value
    double cost_total = 0.0;
    double max_violation = 0.0;
    double control_distance = 0.0; ///< sup distance to the previous rung's controls
    bool converged = false;
    double cost_gap = 0.0;   ///< |J_n - J_{n-1}| (horizon ladders)
    double tail_bound = 0.0; ///< analytic tail bound C e^{-delta T}/delta (horizon ladders)
    ControlSchedule schedule;
};

struct ContinuationReport {
    std::vector<ContinuationRung> ladder;
    bool warm_started = true;
    std::optional<OptimizationResult> final_result; ///< full diagnostics of the last rung
};

/// Solves the penalized problem along a strictly increasing kappa ladder,
/// warm-starting each rung from the last converged schedule. A rung that
/// fails to converge is retried once with halved damping before its iterate
/// is recorded; the ladder always continues.
ContinuationReport kappa_continuation(const EpidemicState& x0, const ModelParams& params,
                                      const CostParams& cp_base, double horizon_T,
                                      const std::vector<double>& kappa_ladder,
                                      const SolverConfig& cfg, double dt);

/// Solves along a strictly increasing horizon ladder, warm-starting from the
/// previous schedule extended by zero controls. Reports per-rung cost gaps
/// against the analytic discount tail bound; the rung converged flag combines
/// solver convergence with the gap falling below tail bound + conv_tol.
ContinuationReport horizon_continuation(const EpidemicState& x0, const ModelParams& params,
                                        const CostParams& cp,
                                        const std::vector<double>& T_ladder,
                                        const SolverConfig& cfg, double dt);

} // namespace epictrl
