#include "epictrl/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace epictrl {

namespace {

void apply_parameter(ModelParams& m, CostParams& c, SweepParameter which, double value) {
    switch (which) {
        case SweepParameter::Beta: m.beta = value; break;
        case SweepParameter::UMax: m.u_max = value; break;
        case SweepParameter::HMax: m.h_max = value; break;
        case SweepParameter::TDelayU: m.t_delay_u = value; break;
        case SweepParameter::TDelayH: m.t_delay_h = value; break;
        case SweepParameter::Kappa: c.kappa = value; break;
        case SweepParameter::IMax: m.i_max = value; break;
    }
}

// Clip a schedule into the admissible set of the (possibly perturbed) model:
// box bounds and activation delays.
ControlSchedule admissible_clip(const ControlSchedule& sched, const ModelParams& m) {
    std::vector<double> u(sched.cells()), h(sched.cells());
    for (std::size_t k = 0; k < sched.cells(); ++k) {
        const double t_left = sched.t0() + sched.dt() * static_cast<double>(k);
        u[k] = t_left < m.t_delay_u ? 0.0 : std::clamp(sched.u_cell(k), 0.0, m.u_max);
        h[k] = t_left < m.t_delay_h ? 0.0 : std::clamp(sched.h_cell(k), 0.0, m.h_max);
    }
    return ControlSchedule(sched.t0(), sched.dt(), std::move(u), std::move(h));
}

template <typename Row>
void run_case(Row& row, const PipelineCase& pc, SweepMode mode) {
    if (mode == SweepMode::Simulate) {
        const ControlSchedule sched = admissible_clip(pc.schedule, pc.model);
        const Trajectory traj = integrate(pc.x0, sched, pc.model, pc.horizon, pc.dt);
        const CostBreakdown cb = evaluate_cost(traj, pc.cost, pc.model);
        row.cost_total = cb.total;
        row.peak_i = traj.peak_i;
        row.final_size = traj.final_size();
        row.max_violation = cb.max_violation;
        row.converged = true;
    } else {
        const ControlSchedule init = admissible_clip(pc.schedule, pc.model);
        const OptimizationResult res =
            forward_backward_sweep(pc.x0, init, pc.model, pc.cost, pc.horizon, pc.solver, pc.dt);
        row.cost_total = res.cost.total;
        row.peak_i = res.trajectory.peak_i;
        row.final_size = res.trajectory.final_size();
        row.max_violation = res.cost.max_violation;
        row.converged = res.converged;
    }
}

// Deterministic Fisher-Yates permutation (independent of library shuffle
// internals, so outputs are reproducible across toolchains).
std::vector<int> permutation(int n, std::mt19937_64& rng) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    for (int k = n - 1; k > 0; --k) {
        const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(k + 1));
        std::swap(p[k], p[j]);
    }
    return p;
}

} // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const PipelineCase& base) {
    if (spec.values.empty()) throw ValidationError("sweep needs at least one value");
    std::vector<SweepRow> rows;
    rows.reserve(spec.values.size());
    for (double value : spec.values) {
        SweepRow row;
        row.value = value;
        PipelineCase pc = base;
        apply_parameter(pc.model, pc.cost, spec.parameter, value);
        try {
            pc.model.validate();
            run_case(row, pc, spec.mode);
        } catch (const std::exception& ex) {
            row.failed = true;
            row.error = ex.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<RandomSweepRow> run_random_sweep(const RandomSweepDesign& design,
                                             const PipelineCase& base) {
    if (design.samples < 1) throw ValidationError("random sweep needs at least one sample");
    std::mt19937_64 rng(design.seed);
    const int n = design.samples;
    const auto perm_b = permutation(n, rng);
    const auto perm_u = permutation(n, rng);
    const auto perm_h = permutation(n, rng);

    auto stratum = [&](const std::pair<double, double>& range, int idx) {
        // midpoint of stratum idx out of n
        return range.first +
               (range.second - range.first) * (static_cast<double>(idx) + 0.5) /
                   static_cast<double>(n);
    };

    std::vector<RandomSweepRow> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        RandomSweepRow row;
        row.beta = stratum(design.beta_range, perm_b[k]);
        row.u_max = stratum(design.u_max_range, perm_u[k]);
        row.h_max = stratum(design.h_max_range, perm_h[k]);
        PipelineCase pc = base;
        pc.model.beta = row.beta;
        pc.model.u_max = row.u_max;
        pc.model.h_max = row.h_max;
        if (design.mode == SweepMode::Simulate) {
            // max-effort constant controls realize the sampled bounds
            pc.schedule = ControlSchedule::constant(row.u_max, row.h_max, 0.0,
                                                    pc.schedule.dt(), pc.schedule.cells());
        }
        try {
            pc.model.validate();
            run_case(row, pc, design.mode);
        } catch (const std::exception&) {
            row.failed = true;
        }
        rows.push_back(row);
    }
    return rows;
}

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw ValidationError("correlation requires equal sample lengths >= 3");
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double dx = xs[k] - mx;
        const double dy = ys[k] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        throw ValidationError("correlation undefined for zero-variance samples");
    return sxy / std::sqrt(sxx * syy);
}

double capacity_shadow_value(const OptimizationResult& result, ControlKind which,
                             const ModelParams& params, double bind_tol) {
    if (!result.converged)
        throw ValidationError("shadow value requires a converged result");
    const auto& traj = result.trajectory;
    const double bound = which == ControlKind::Vaccination ? params.u_max : params.h_max;
    if (bound <= 0.0) return 0.0;

    const std::size_t n = traj.samples();
    std::vector<double> nu(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double v = which == ControlKind::Vaccination ? traj.u[k] : traj.h[k];
        const double phi =
            which == ControlKind::Vaccination ? result.switching[k].phi_u
                                              : result.switching[k].phi_h;
        if (v >= bound * (1.0 - bind_tol)) nu[k] = std::max(0.0, -phi);
    }
    double acc = 0.0;
    for (std::size_t k = 1; k < n; ++k)
        acc += 0.5 * (nu[k - 1] + nu[k]) * (traj.times[k] - traj.times[k - 1]);
    return acc;
}

} // namespace epictrl
