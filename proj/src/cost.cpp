#include "epictrl/cost.hpp"

#include <algorithm>
#include <cmath>

namespace epictrl {

void CostParams::validate() const {
    if (!(c_h >= 0.0) || !(c_nh >= 0.0) || !(c_v >= 0.0))
        throw ValidationError("cost weights must be nonnegative");
    if (!(delta > 0.0)) throw ValidationError("discount rate delta must be positive");
    if (!(kappa >= 0.0)) throw ValidationError("penalty weight kappa must be nonnegative");
}

double running_cost_l0(const EpidemicState& state, double u, double h, const CostParams& cp) {
    return cp.c_h * state.i * h + cp.c_nh * state.i + cp.c_v * u * state.s;
}

double penalty_psi(double i, double i_max) {
    const double excess = std::max(0.0, i - i_max);
    return excess * excess;
}

double penalty_psi_derivative(double i, double i_max) {
    return 2.0 * std::max(0.0, i - i_max);
}

namespace {

// Trapezoid of sampled densities on a uniform grid.
double trapz(const std::vector<double>& f, double dt) {
    double acc = 0.0;
    for (std::size_t k = 1; k < f.size(); ++k) acc += 0.5 * (f[k - 1] + f[k]);
    return acc * dt;
}

} // namespace

CostBreakdown evaluate_cost(const Trajectory& traj, const CostParams& cp,
                            const ModelParams& params, double strict_tol) {
    cp.validate();
    const std::size_t n = traj.samples();
    const double dt = traj.dt();

    std::vector<double> f_h(n), f_nh(n), f_v(n), f_pen(n), f_all(n);
    CostBreakdown out;
    for (std::size_t k = 0; k < n; ++k) {
        const double disc = std::exp(-cp.delta * traj.times[k]);
        f_h[k] = cp.c_h * traj.i[k] * traj.h[k] * disc;
        f_nh[k] = cp.c_nh * traj.i[k] * disc;
        f_v[k] = cp.c_v * traj.u[k] * traj.s[k] * disc;
        f_pen[k] = cp.kappa * penalty_psi(traj.i[k], params.i_max) * disc;
        f_all[k] = f_h[k] + f_nh[k] + f_v[k] + f_pen[k];
        out.max_violation = std::max(out.max_violation, traj.i[k] - params.i_max);
    }
    out.max_violation = std::max(0.0, out.max_violation);
    out.feasible_strict = out.max_violation <= strict_tol;
    out.suppression_part = trapz(f_h, dt);
    out.infection_part = trapz(f_nh, dt);
    out.vaccination_part = trapz(f_v, dt);
    out.penalty_part = trapz(f_pen, dt);
    out.total = trapz(f_all, dt);

    const double density_bound = cp.c_h * params.h_max + cp.c_nh + cp.c_v * params.u_max +
                                 cp.kappa * (1.0 - params.i_max) * (1.0 - params.i_max);
    out.tail_bound = density_bound * std::exp(-cp.delta * traj.horizon()) / cp.delta;
    return out;
}

FeasibilityResult check_strict_feasibility(const Trajectory& traj, double i_max, double tol) {
    double violation = 0.0;
    for (double v : traj.i) violation = std::max(violation, v - i_max);
    violation = std::max(0.0, violation);
    return {violation <= tol, violation};
}

} // namespace epictrl
