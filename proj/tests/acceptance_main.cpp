// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are fixed here, not tuned at run time.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "epictrl/analysis.hpp"
#include "epictrl/continuation.hpp"
#include "epictrl/scenario.hpp"
#include "epictrl/sensitivity.hpp"

using namespace epictrl;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

struct Criterion {
    std::string name;
    std::vector<std::string> notes;
    bool ok = true;

    explicit Criterion(std::string n) : name(std::move(n)) {}

    void require(bool cond, const std::string& detail) {
        if (!cond) {
            ok = false;
            notes.push_back(detail);
        }
    }

    void finish() const {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
        for (const auto& n : notes) std::printf("       %s\n", n.c_str());
        if (!ok) ++g_failures;
    }
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.8g", v);
    return buf;
}

ModelParams baseline_params() {
    ModelParams p;
    p.beta = 0.5;
    p.sigma = 0.2;
    p.gamma = 0.1;
    p.u_max = 0.05;
    p.h_max = 0.2;
    p.i_max = 0.10;
    return p;
}

EpidemicState baseline_x0() { return {0.90, 0.05, 0.05, 0.00}; }

// cost weights of the optimized baseline scenario (scenario data, not
// published values)
CostParams baseline_cost(double kappa) {
    CostParams cp;
    cp.c_h = 16.0;
    cp.c_nh = 0.02;
    cp.c_v = 6.0;
    cp.delta = 0.05;
    cp.kappa = kappa;
    return cp;
}

SolverConfig baseline_solver() {
    SolverConfig cfg;
    cfg.max_iters = 600;
    cfg.damping = 0.2;
    cfg.conv_tol = 1e-5;
    cfg.sing_tol = 1e-2;
    return cfg;
}

struct RandomAdmissible {
    ModelParams params;
    EpidemicState x0;
    double u, h;
};

RandomAdmissible draw_admissible(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    RandomAdmissible rc;
    rc.params.beta = 0.2 + 0.6 * uni(rng);
    rc.params.sigma = 0.1 + 0.4 * uni(rng);
    rc.params.gamma = 0.05 + 0.25 * uni(rng);
    rc.params.h_max = 0.9 * rc.params.beta * uni(rng);
    rc.params.u_max = 0.1 * uni(rng);
    rc.params.i_max = 0.05 + 0.3 * uni(rng);
    const double e0 = 0.1 * uni(rng);
    const double i0 = 0.001 + 0.1 * uni(rng);
    const double r0 = 0.1 * uni(rng);
    rc.x0 = {1.0 - e0 - i0 - r0, e0, i0, r0};
    rc.u = rc.params.u_max * uni(rng);
    rc.h = rc.params.h_max * uni(rng);
    return rc;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- criteria ---------------------------------------------------------------

void criterion_1() {
    Criterion c("criterion 1: conservation & positivity on 100 random scenarios");
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20260811);
    double worst_defect = 0.0;
    double worst_negative = 0.0;
    for (int n = 0; n < 100; ++n) {
        const RandomAdmissible rc = draw_admissible(rng);
        const auto sched = ControlSchedule::constant(rc.u, rc.h, 0.0, 0.01, 20000);
        const Trajectory traj = integrate(rc.x0, sched, rc.params, 200.0, 0.01);
        worst_defect = std::max(worst_defect, traj.conservation_defect());
        for (std::size_t k = 0; k < traj.samples(); ++k) {
            worst_negative = std::min(worst_negative, traj.s[k]);
            worst_negative = std::min(worst_negative, traj.e[k]);
            worst_negative = std::min(worst_negative, traj.i[k]);
            worst_negative = std::min(worst_negative, traj.r[k]);
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.require(worst_defect <= 1e-9, "conservation defect " + num(worst_defect) + " > 1e-9");
    c.require(worst_negative >= -1e-12,
              "component " + num(worst_negative) + " below -1e-12");
    c.require(secs < 10.0, "runtime " + num(secs) + " s exceeds 10 s");
    c.notes.push_back("max defect " + num(worst_defect) + ", runtime " + num(secs) + " s");
    c.finish();
}

void criterion_2() {
    Criterion c("criterion 2: no-intervention peak 0.32 +- 0.01");
    const auto sched = ControlSchedule::constant(0.0, 0.0, 0.0, 0.01, 20000);
    const Trajectory traj = integrate(baseline_x0(), sched, baseline_params(), 200.0, 0.01);
    c.require(std::abs(traj.peak_i - 0.32) <= 0.01,
              "peak_i " + num(traj.peak_i) + " outside 0.32 +- 0.01");
    c.notes.push_back("peak_i " + num(traj.peak_i) + " at t " + num(traj.peak_time));
    c.finish();
}

void criterion_3() {
    Criterion c("criterion 3: constant controls, peak 0.1104 +- 0.005 and final size");
    const auto sched = ControlSchedule::constant(0.05, 0.2, 0.0, 0.01, 40000);
    const Trajectory traj = integrate(baseline_x0(), sched, baseline_params(), 400.0, 0.01);
    c.require(std::abs(traj.peak_i - 0.1104) <= 0.005,
              "peak_i " + num(traj.peak_i) + " outside 0.1104 +- 0.005");
    c.require(traj.final_size() >= 0.999,
              "final size " + num(traj.final_size()) + " < 0.999");
    c.notes.push_back("peak_i " + num(traj.peak_i) + ", final size " +
                      num(traj.final_size()));
    c.finish();
}

void criterion_4() {
    Criterion c("criterion 4: final-size oracle pair on 20 random parameter sets");
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(77);
    int done = 0;
    double worst_rel = 0.0, worst_residual = 0.0;
    while (done < 20) {
        const RandomAdmissible rc = draw_admissible(rng);
        const double r0 = rc.params.beta_tilde() * rc.x0.s / rc.params.gamma;
        if (r0 > 0.8 && r0 < 1.25) continue; // near-critical decay too slow for T = 4000
        ++done;
        const FinalSizeResult fsr = final_size_max_suppression(rc.x0, rc.params);
        worst_residual = std::max(worst_residual, fsr.implicit_residual);
        const auto sched =
            ControlSchedule::constant(0.0, rc.params.h_max, 0.0, 0.02, 200000);
        const Trajectory traj = integrate(rc.x0, sched, rc.params, 4000.0, 0.02);
        worst_rel =
            std::max(worst_rel, std::abs(traj.s.back() - fsr.s_inf) / std::abs(fsr.s_inf));
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.require(worst_rel <= 1e-3, "relative gap " + num(worst_rel) + " > 1e-3");
    c.require(worst_residual <= 1e-10,
              "implicit residual " + num(worst_residual) + " > 1e-10");
    c.require(secs < 30.0, "runtime " + num(secs) + " s exceeds 30 s");
    c.notes.push_back("worst rel gap " + num(worst_rel) + ", worst residual " +
                      num(worst_residual) + ", runtime " + num(secs) + " s");
    c.finish();
}

void criterion_5() {
    Criterion c("criterion 5: adjoint cell gradients match central differences");
    const ModelParams p = baseline_params();
    const CostParams cp = baseline_cost(1000.0);
    // interior probe keeps every bump inside the box; the penalty kink limits
    // two-route agreement to O(dt), hence the fine grid
    const double dt = 0.002, T = 200.0;
    const auto probe = ControlSchedule::constant(0.5 * p.u_max, 0.5 * p.h_max, 0.0, dt,
                                                 static_cast<std::size_t>(T / dt));
    std::mt19937_64 rng(505);
    std::uniform_int_distribution<std::size_t> pick(0, probe.cells() - 1);
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
        const auto kind = n % 2 == 0 ? ControlKind::Vaccination : ControlKind::Suppression;
        const auto gc =
            gradient_check(baseline_x0(), probe, p, cp, T, pick(rng), kind, 1e-5, dt);
        const double rel = std::abs(gc.adjoint_gradient - gc.fd_gradient) /
                           std::max(1.0, std::abs(gc.fd_gradient));
        worst = std::max(worst, rel);
    }
    c.require(worst <= 1e-4, "worst relative mismatch " + num(worst) + " > 1e-4");
    c.notes.push_back("worst relative mismatch " + num(worst) + " over 20 cells");
    c.finish();
}

void criterion_6() {
    Criterion c("criterion 6: kappa-continuation bridge {10,1e2,1e3,1e4}");
    const auto report =
        kappa_continuation(baseline_x0(), baseline_params(), baseline_cost(0.0), 200.0,
                           {10.0, 100.0, 1000.0, 10000.0}, baseline_solver(), 0.01);
    const auto& ladder = report.ladder;
    for (std::size_t k = 1; k < ladder.size(); ++k)
        c.require(ladder[k].max_violation <= ladder[k - 1].max_violation + 1e-9,
                  "violation increased from rung " + num(ladder[k - 1].parameter) + " (" +
                      num(ladder[k - 1].max_violation) + ") to rung " +
                      num(ladder[k].parameter) + " (" + num(ladder[k].max_violation) + ")");
    c.require(ladder.back().max_violation <= ladder.front().max_violation / 10.0,
              "final violation " + num(ladder.back().max_violation) + " > first/10 = " +
                  num(ladder.front().max_violation / 10.0));
    const double final_peak = report.final_result->trajectory.peak_i;
    c.require(final_peak <= baseline_params().i_max + 0.01,
              "final-rung peak " + num(final_peak) +
                  " > i_max + 0.01 (every admissible control peaks at >= 0.11046 from "
                  "this start; see decisions ledger)");
    std::string viols = "violations:";
    for (const auto& rung : ladder) viols += " " + num(rung.max_violation);
    c.notes.push_back(viols);
    c.finish();
}

void criterion_7() {
    Criterion c("criterion 7: horizon stability T in {100,200,400}");
    SolverConfig cfg = baseline_solver();
    cfg.conv_tol = 1e-7; // gaps must be tail-dominated, not solver-noise-dominated
    const auto report =
        horizon_continuation(baseline_x0(), baseline_params(), baseline_cost(1000.0),
                             {100.0, 200.0, 400.0}, cfg, 0.01);
    const auto& ladder = report.ladder;
    const double gap_21 = ladder[1].cost_gap;
    const double gap_32 = ladder[2].cost_gap;
    c.require(gap_32 <= gap_21, "|J(400)-J(200)| = " + num(gap_32) + " > |J(200)-J(100)| = " +
                                    num(gap_21));
    c.require(gap_32 <= ladder[1].tail_bound + 1e-6,
              "gap " + num(gap_32) + " above tail bound " + num(ladder[1].tail_bound));
    double dist = 0.0;
    const auto n50 = static_cast<std::size_t>(std::round(50.0 / 0.01));
    for (std::size_t k = 0; k < n50; ++k) {
        dist = std::max(dist, std::abs(ladder[0].schedule.u_cell(k) -
                                       ladder[2].schedule.u_cell(k)));
        dist = std::max(dist, std::abs(ladder[0].schedule.h_cell(k) -
                                       ladder[2].schedule.h_cell(k)));
    }
    c.require(dist <= 5e-2,
              "early-control sup distance " + num(dist) + " > 5e-2 on [0,50]");
    c.notes.push_back("gaps " + num(gap_21) + " -> " + num(gap_32) + ", early distance " +
                      num(dist));
    c.finish();
}

void criterion_8() {
    Criterion c("criterion 8: boundary-maintenance arc under injected feedback");
    const ModelParams p = baseline_params();
    EpidemicState x0{0.32, p.gamma * p.i_max / p.sigma, p.i_max, 0.0};
    x0.r = 1.0 - x0.s - x0.e - x0.i;
    const double T = 10.0; // s stays inside [gamma/beta, gamma/(beta-h_max)]

    OptimizationResult res;
    res.converged = true;
    res.trajectory = integrate_boundary_feedback(x0, p, T, 0.01);
    res.adjoints.assign(res.trajectory.samples(), {});
    res.switching.resize(res.trajectory.samples());
    CostParams cp;
    for (std::size_t k = 0; k < res.switching.size(); ++k) {
        const auto [pu, ph] = switching_functions(res.trajectory.state_at(k), {0.0, 0.0, 0.0},
                                                  res.trajectory.times[k], cp);
        res.switching[k] = {res.trajectory.times[k], pu, ph, Regime::AtMin, Regime::AtMin};
    }

    double worst_i = 0.0, worst_reff = 0.0;
    bool window_ok = true;
    for (std::size_t k = 0; k < res.trajectory.samples(); ++k) {
        const double s = res.trajectory.s[k];
        window_ok = window_ok && s >= p.gamma / p.beta && s <= p.gamma / p.beta_tilde();
        worst_i = std::max(worst_i, std::abs(res.trajectory.i[k] - p.i_max));
        worst_reff = std::max(
            worst_reff,
            std::abs(r_eff(res.trajectory.state_at(k), res.trajectory.h[k], p) - 1.0));
    }
    c.require(window_ok, "s left the admissible window during the run");
    c.require(worst_i <= 1e-6, "max |i - i_max| = " + num(worst_i) + " > 1e-6");
    c.require(worst_reff <= 1e-9, "max |R_eff - 1| = " + num(worst_reff) + " > 1e-9");

    const auto arcs = detect_singular_arcs(res, p, cp, 1.0, 1e-8, 1e-6);
    std::size_t boundary_arcs = 0;
    for (const auto& arc : arcs)
        if (arc.kind == ArcKind::BoundaryMaintenance) ++boundary_arcs;
    c.require(boundary_arcs == 1,
              "expected exactly one boundary arc, found " + std::to_string(boundary_arcs));
    c.notes.push_back("max |i - i_max| " + num(worst_i) + ", max |R_eff - 1| " +
                      num(worst_reff));
    c.finish();
}

void criterion_9() {
    Criterion c("criterion 9: qualitative optimized-baseline shape");
    const ModelParams p = baseline_params();
    const auto res = forward_backward_sweep(
        baseline_x0(),
        ControlSchedule::constant(0.0, 0.0, 0.0, 0.01, 20000), p, baseline_cost(1000.0),
        200.0, baseline_solver(), 0.01);
    c.require(res.converged, "baseline solve did not converge");

    // u at its bound on a nonempty initial interval
    std::size_t u_sat = 0;
    while (u_sat < res.schedule.cells() &&
           res.schedule.u_cell(u_sat) >= p.u_max * (1.0 - 1e-3))
        ++u_sat;
    const double u_days = static_cast<double>(u_sat) * 0.01;
    c.require(u_days >= 1.0, "u saturates for only " + num(u_days) + " days");

    // h starts at its bound and never increases across the peak phase
    c.require(res.schedule.h_cell(0) >= p.h_max * (1.0 - 1e-3),
              "h(0) = " + num(res.schedule.h_cell(0)) + " below h_max");
    const auto& traj = res.trajectory;
    std::size_t lo = 0, hi = 0;
    for (std::size_t k = 0; k < traj.samples(); ++k) {
        if (traj.i[k] >= 0.95 * traj.peak_i) {
            if (lo == 0 && hi == 0) lo = k;
            hi = k;
        }
    }
    double worst_increase = 0.0;
    for (std::size_t k = lo; k + 1 < hi && k + 1 < res.schedule.cells(); ++k)
        worst_increase =
            std::max(worst_increase, res.schedule.h_cell(k + 1) - res.schedule.h_cell(k));
    c.require(worst_increase <= 1e-3 * p.h_max,
              "h increases by " + num(worst_increase) + " inside the peak phase");

    // lambda_i nonnegative and decaying after its maximum (1% drift allowance:
    // the magnitudes are declared non-reproducible, the shape is the check)
    const auto& lam = res.adjoints;
    std::size_t arg_max = 0;
    for (std::size_t k = 0; k < lam.size(); ++k)
        if (lam[k].lambda_i > lam[arg_max].lambda_i) arg_max = k;
    const double scale = lam[arg_max].lambda_i;
    c.require(scale > 0.0, "lambda_i has no positive maximum");
    c.require(lam[0].lambda_i > lam[0].lambda_s && lam[0].lambda_i > lam[0].lambda_e,
              "lambda_i(0) is not the dominant costate");
    bool nonneg = true, decays = true;
    double run_min = scale;
    for (std::size_t k = arg_max; k < lam.size(); ++k) {
        nonneg = nonneg && lam[k].lambda_i >= -1e-9 * scale;
        decays = decays && lam[k].lambda_i <= run_min + 0.01 * scale;
        run_min = std::min(run_min, lam[k].lambda_i);
    }
    c.require(nonneg, "lambda_i dips negative");
    c.require(decays, "lambda_i rises by more than 1% of its maximum after the peak");
    c.notes.push_back("u at bound for " + num(u_days) + " days, lambda_i max " + num(scale) +
                      " at t " + num(res.trajectory.times[arg_max]));
    c.finish();
}

void criterion_10() {
    Criterion c("criterion 10: sensitivity directions");
    PipelineCase base;
    base.x0 = baseline_x0();
    base.model = baseline_params();
    base.cost = baseline_cost(1000.0);
    base.horizon = 200.0;
    base.dt = 0.01;
    base.solver = baseline_solver();
    base.schedule = ControlSchedule::constant(0.0, 0.0, 0.0, base.dt, 20000);

    SweepSpec spec;
    spec.parameter = SweepParameter::TDelayU;
    spec.values = {0.0, 10.0, 20.0, 40.0};
    spec.mode = SweepMode::Optimize;
    const auto rows = run_sweep(spec, base);
    for (const auto& row : rows)
        c.require(!row.failed && row.converged,
                  "delay " + num(row.value) + " run failed or did not converge");
    for (std::size_t k = 1; k < rows.size(); ++k)
        c.require(rows[k].cost_total >= rows[k - 1].cost_total - 1e-6,
                  "cost decreased from delay " + num(rows[k - 1].value) + " (" +
                      num(rows[k - 1].cost_total) + ") to " + num(rows[k].value) + " (" +
                      num(rows[k].cost_total) + ")");

    PipelineCase sim = base;
    sim.schedule =
        ControlSchedule::constant(base.model.u_max, base.model.h_max, 0.0, base.dt, 20000);
    RandomSweepDesign design;
    design.samples = 64;
    design.seed = 2026;
    const auto rrows = run_random_sweep(design, sim);
    std::vector<double> costs, peaks;
    for (const auto& row : rrows) {
        if (!row.failed) {
            costs.push_back(row.cost_total);
            peaks.push_back(row.peak_i);
        }
    }
    c.require(costs.size() == 64, "random sweep rows failed");
    const double corr = pearson_correlation(costs, peaks);
    c.require(corr >= 0.8, "corr(J_T, peak_i) = " + num(corr) + " < 0.8");
    std::string jt = "delay costs:";
    for (const auto& row : rows) jt += " " + num(row.cost_total);
    c.notes.push_back(jt + "; corr(J_T, peak) " + num(corr));
    c.finish();
}

void criterion_11() {
    Criterion c("criterion 11: envelope cross-check of the capacity shadow value");
    const ModelParams p = baseline_params();
    SolverConfig cfg = baseline_solver();
    cfg.conv_tol = 1e-7;
    const double dt = 0.01, T = 200.0;
    const auto init = ControlSchedule::constant(0.0, 0.0, 0.0, dt, 20000);

    const auto res =
        forward_backward_sweep(baseline_x0(), init, p, baseline_cost(1000.0), T, cfg, dt);
    c.require(res.converged, "baseline solve did not converge");
    const double shadow = capacity_shadow_value(res, ControlKind::Vaccination, p);

    const double bump = 1e-3;
    ModelParams relaxed = p;
    relaxed.u_max += bump;
    const auto res2 = forward_backward_sweep(baseline_x0(), res.schedule, relaxed,
                                             baseline_cost(1000.0), T, cfg, dt);
    c.require(res2.converged, "bumped solve did not converge");
    const double fd = -(res2.cost.total - res.cost.total) / bump;
    c.require(shadow >= 1e-6 && std::abs(fd) >= 1e-6,
              "degenerate magnitudes: shadow " + num(shadow) + ", fd " + num(fd));
    c.require(std::abs(shadow - fd) <= 0.10 * std::abs(fd),
              "multiplier integral " + num(shadow) + " vs fd slope " + num(fd) +
                  " differ by more than 10%");

    // a scenario where vaccination never binds has exactly zero marginal value
    CostParams expensive = baseline_cost(1000.0);
    expensive.c_v = 1e4;
    const auto res3 = forward_backward_sweep(baseline_x0(), init, p, expensive, T,
                                             baseline_solver(), dt);
    c.require(res3.converged, "non-binding solve did not converge");
    const double zero_val = capacity_shadow_value(res3, ControlKind::Vaccination, p);
    c.require(zero_val == 0.0, "non-binding shadow value " + num(zero_val) + " != 0");
    c.notes.push_back("shadow " + num(shadow) + ", fd " + num(fd) + ", non-binding " +
                      num(zero_val));
    c.finish();
}

void criterion_12() {
    Criterion c("criterion 12: byte-identical artifacts for a fixed seed");
    const char* scenario_text = R"(mode = sweep
horizon = 120
dt = 0.02
seed = 31415
model.beta = 0.5
model.sigma = 0.2
model.gamma = 0.1
model.u_max = 0.05
model.h_max = 0.2
model.i_max = 0.10
initial.s = 0.90
initial.e = 0.05
initial.i = 0.05
initial.r = 0.00
cost.c_h = 16
cost.c_nh = 0.02
cost.c_v = 6
cost.kappa = 1000
sweep.parameter = random
sweep.samples = 16
sweep.mode = simulate
)";
    const Scenario sweep_sc = parse_scenario_text(scenario_text, "acceptance");
    const fs::path base = fs::temp_directory_path() / "epictrl_acceptance";
    fs::remove_all(base);
    const fs::path a = base / "a", b = base / "b";
    run_scenario(sweep_sc, a);
    run_scenario(sweep_sc, b);
    c.require(read_file(a / "summary.json") == read_file(b / "summary.json"),
              "sweep summary.json differs between identical runs");
    c.require(!read_file(a / "sweep.csv").empty() &&
                  read_file(a / "sweep.csv") == read_file(b / "sweep.csv"),
              "sweep.csv differs between identical runs");

    Scenario opt = sweep_sc;
    opt.mode = RunMode::Optimize;
    opt.sweep.reset();
    opt.random_sweep.enabled = false;
    opt.horizon = 60.0;
    opt.solver = baseline_solver();
    const fs::path oa = base / "oa", ob = base / "ob";
    run_scenario(opt, oa);
    run_scenario(opt, ob);
    c.require(read_file(oa / "summary.json") == read_file(ob / "summary.json"),
              "optimize summary.json differs between identical runs");
    c.require(!read_file(oa / "trajectory.csv").empty() &&
                  read_file(oa / "trajectory.csv") == read_file(ob / "trajectory.csv"),
              "trajectory.csv differs between identical runs");
    c.finish();
}

} // namespace

int main() {
    setenv("EPI_CTRL_LOG", "quiet", 1);
    std::printf("acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criterion(s) failed\n", g_failures);
    }
    return g_failures == 0 ? 0 : 1;
}
