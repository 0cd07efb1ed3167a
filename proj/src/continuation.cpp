#include "epictrl/continuation.hpp"

#include <cmath>

namespace epictrl {

namespace {

void require_strictly_increasing(const std::vector<double>& values, const char* what) {
    if (values.empty()) throw ValidationError(std::string(what) + " ladder must be nonempty");
    for (std::size_t k = 1; k < values.size(); ++k)
        if (!(values[k] > values[k - 1]))
            throw ValidationError(std::string(what) + " ladder must be strictly increasing");
}

// One rung solve with a single halved-damping retry on non-convergence.
OptimizationResult solve_rung(const EpidemicState& x0, const ControlSchedule& init,
                              const ModelParams& params, const CostParams& cp, double horizon_T,
                              const SolverConfig& cfg, double dt) {
    OptimizationResult res = forward_backward_sweep(x0, init, params, cp, horizon_T, cfg, dt);
    if (!res.converged) {
        SolverConfig retry = cfg;
        retry.damping = 0.5 * cfg.damping;
        OptimizationResult res2 =
            forward_backward_sweep(x0, res.schedule, params, cp, horizon_T, retry, dt);
        if (res2.converged || res2.cost.total < res.cost.total) return res2;
    }
    return res;
}

} // namespace

ContinuationReport kappa_continuation(const EpidemicState& x0, const ModelParams& params,
                                      const CostParams& cp_base, double horizon_T,
                                      const std::vector<double>& kappa_ladder,
                                      const SolverConfig& cfg, double dt) {
    require_strictly_increasing(kappa_ladder, "kappa");

    const auto cells = static_cast<std::size_t>(std::round(horizon_T / dt));
    ControlSchedule warm = ControlSchedule::constant(0.0, 0.0, 0.0, dt, cells);

    ContinuationReport report;
    ControlSchedule prev = warm;
    bool have_prev = false;
    for (double kappa : kappa_ladder) {
        CostParams cp = cp_base;
        cp.kappa = kappa;
        OptimizationResult res = solve_rung(x0, warm, params, cp, horizon_T, cfg, dt);

        ContinuationRung rung;
        rung.parameter = kappa;
        rung.cost_total = res.cost.total;
        rung.max_violation = res.cost.max_violation;
        rung.converged = res.converged;
        rung.schedule = res.schedule;
        rung.control_distance =
            have_prev ? ControlSchedule::sup_distance(res.schedule, prev) : 0.0;
        prev = res.schedule;
        have_prev = true;
        if (res.converged) warm = res.schedule; // fall back to last converged otherwise

        report.final_result = std::move(res);
        report.ladder.push_back(std::move(rung));
    }
    return report;
}

ContinuationReport horizon_continuation(const EpidemicState& x0, const ModelParams& params,
                                        const CostParams& cp,
                                        const std::vector<double>& T_ladder,
                                        const SolverConfig& cfg, double dt) {
    require_strictly_increasing(T_ladder, "horizon");

    ContinuationReport report;
    ControlSchedule prev_sched;
    bool have_prev = false;
    double prev_cost = 0.0;

    for (double horizon : T_ladder) {
        const auto cells = static_cast<std::size_t>(std::round(horizon / dt));
        std::vector<double> u(cells, 0.0), h(cells, 0.0);
        if (have_prev) {
            // extend the previous rung's controls with zeros
            for (std::size_t k = 0; k < cells && k < prev_sched.cells(); ++k) {
                u[k] = prev_sched.u_cell(k);
                h[k] = prev_sched.h_cell(k);
            }
        }
        ControlSchedule init(0.0, dt, std::move(u), std::move(h));
        OptimizationResult res = solve_rung(x0, init, params, cp, horizon, cfg, dt);

        ContinuationRung rung;
        rung.parameter = horizon;
        rung.cost_total = res.cost.total;
        rung.max_violation = res.cost.max_violation;
        rung.schedule = res.schedule;
        rung.tail_bound = res.cost.tail_bound;
        rung.control_distance =
            have_prev ? ControlSchedule::sup_distance(res.schedule, prev_sched) : 0.0;
        if (have_prev) {
            rung.cost_gap = std::abs(res.cost.total - prev_cost);
            // gap below the previous rung's analytic tail signals horizon convergence
            const double prev_tail = report.ladder.back().tail_bound;
            rung.converged = res.converged && rung.cost_gap <= prev_tail + cfg.conv_tol;
        } else {
            rung.converged = res.converged;
        }
        prev_sched = res.schedule;
        prev_cost = res.cost.total;
        have_prev = true;

        report.final_result = std::move(res);
        report.ladder.push_back(std::move(rung));
    }
    return report;
}

} // namespace epictrl
