#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "epictrl/analysis.hpp"
#include "epictrl/scenario.hpp"

namespace epictrl {

namespace {

using nlohmann::json;

// Shortest round-trip decimal form; identical across runs.
std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

int log_level() {
    const char* env = std::getenv("EPI_CTRL_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "quiet") return 0;
    if (v == "debug") return 2;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[epi-ctrl] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[epi-ctrl] " << msg << "\n";
}

json state_json(const EpidemicState& x) {
    return {{"s", x.s}, {"e", x.e}, {"i", x.i}, {"r", x.r}};
}

json cost_json(const CostBreakdown& cb) {
    return {{"total", cb.total},
            {"suppression_part", cb.suppression_part},
            {"infection_part", cb.infection_part},
            {"vaccination_part", cb.vaccination_part},
            {"penalty_part", cb.penalty_part},
            {"max_violation", cb.max_violation},
            {"feasible_strict", cb.feasible_strict},
            {"tail_bound", cb.tail_bound}};
}

json trajectory_json(const Trajectory& traj, const ModelParams& params) {
    return {{"peak_i", traj.peak_i},
            {"peak_time", traj.peak_time},
            {"final_state", state_json(traj.final_state())},
            {"final_size", traj.final_size()},
            {"conservation_defect", traj.conservation_defect()},
            {"integral_identity_residual", integral_identity_residual(traj, params)}};
}

json scenario_json(const Scenario& sc) {
    json j;
    j["mode"] = to_string(sc.mode);
    j["horizon"] = sc.horizon;
    j["dt"] = sc.dt;
    j["seed"] = sc.seed;
    j["model"] = {{"beta", sc.model.beta},         {"sigma", sc.model.sigma},
                  {"gamma", sc.model.gamma},       {"u_max", sc.model.u_max},
                  {"h_max", sc.model.h_max},       {"t_delay_u", sc.model.t_delay_u},
                  {"t_delay_h", sc.model.t_delay_h}, {"i_max", sc.model.i_max}};
    j["initial"] = state_json(sc.initial);
    j["cost"] = {{"c_h", sc.cost.c_h},
                 {"c_nh", sc.cost.c_nh},
                 {"c_v", sc.cost.c_v},
                 {"delta", sc.cost.delta},
                 {"kappa", sc.cost.kappa}};
    j["solver"] = {{"max_iters", sc.solver.max_iters},
                   {"damping", sc.solver.damping},
                   {"conv_tol", sc.solver.conv_tol},
                   {"sing_tol", sc.solver.sing_tol},
                   {"singular_policy", to_string(sc.solver.singular_policy)}};
    if (sc.schedule) {
        // a constant profile collapses to one value; re-parsing broadcasts it
        auto compact = [](const std::vector<double>& v) {
            const bool constant =
                std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
            return constant ? std::vector<double>{v.front()} : v;
        };
        j["schedule"] = {{"t0", sc.schedule->t0()},
                         {"dt", sc.schedule->dt()},
                         {"u", compact(sc.schedule->u_values())},
                         {"h", compact(sc.schedule->h_values())}};
    } else {
        j["schedule"] = nullptr;
    }
    j["kappa_ladder"] = sc.kappa_ladder;
    j["t_ladder"] = sc.t_ladder;
    if (sc.sweep) {
        j["sweep"] = {{"parameter", to_string(sc.sweep->parameter)},
                      {"mode", to_string(sc.sweep->mode)},
                      {"values", sc.sweep->values}};
    } else if (sc.random_sweep.enabled) {
        const auto& d = sc.random_sweep.design;
        j["sweep"] = {{"parameter", "random"},
                      {"mode", to_string(d.mode)},
                      {"samples", d.samples},
                      {"beta_lo", d.beta_range.first},
                      {"beta_hi", d.beta_range.second},
                      {"u_max_lo", d.u_max_range.first},
                      {"u_max_hi", d.u_max_range.second},
                      {"h_max_lo", d.h_max_range.first},
                      {"h_max_hi", d.h_max_range.second}};
    } else {
        j["sweep"] = nullptr;
    }
    return j;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericError("cannot write " + path.string());
    out << content;
}

// Columns: t,s,e,i,r,u,h,lambda_s,lambda_e,lambda_i,phi_u,phi_h.
// Adjoint and switching columns stay empty without solver output.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const std::vector<AdjointState>* adjoints,
                          const std::vector<SwitchingSample>* switching) {
    std::string out = "t,s,e,i,r,u,h,lambda_s,lambda_e,lambda_i,phi_u,phi_h\n";
    for (std::size_t k = 0; k < traj.samples(); ++k) {
        out += fmt(traj.times[k]);
        out += ',';
        out += fmt(traj.s[k]);
        out += ',';
        out += fmt(traj.e[k]);
        out += ',';
        out += fmt(traj.i[k]);
        out += ',';
        out += fmt(traj.r[k]);
        out += ',';
        out += fmt(traj.u[k]);
        out += ',';
        out += fmt(traj.h[k]);
        if (adjoints) {
            out += ',';
            out += fmt((*adjoints)[k].lambda_s);
            out += ',';
            out += fmt((*adjoints)[k].lambda_e);
            out += ',';
            out += fmt((*adjoints)[k].lambda_i);
            out += ',';
            out += fmt((*switching)[k].phi_u);
            out += ',';
            out += fmt((*switching)[k].phi_h);
        } else {
            out += ",,,,,";
        }
        out += '\n';
    }
    write_file(path, out);
}

json arc_json(const Arc& arc) {
    const char* kind = arc.kind == ArcKind::SingularU
                           ? "singular-u"
                           : (arc.kind == ArcKind::SingularH ? "singular-h"
                                                             : "boundary-maintenance");
    json j{{"start", arc.start}, {"end", arc.end}, {"kind", kind}};
    if (arc.kind == ArcKind::BoundaryMaintenance)
        j["boundary_residual"] = arc.boundary_residual;
    return j;
}

json optimize_results(const OptimizationResult& res, const Scenario& sc) {
    json j;
    j["trajectory"] = trajectory_json(res.trajectory, sc.model);
    j["cost"] = cost_json(res.cost);
    j["convergence"] = {
        {"converged", res.converged},
        {"iterations", res.iterations},
        {"final_residual",
         res.control_residual_history.empty() ? 0.0 : res.control_residual_history.back()},
        {"initial_cost", res.initial_cost},
        {"cost_regressed", res.cost_regressed}};
    if (res.converged) {
        json arcs = json::array();
        for (const auto& arc : detect_singular_arcs(res, sc.model, sc.cost, 1.0,
                                                    std::max(sc.solver.sing_tol, 1e-8)))
            arcs.push_back(arc_json(arc));
        j["arcs"] = arcs;
        j["shadow_values"] = {
            {"u_max", capacity_shadow_value(res, ControlKind::Vaccination, sc.model)},
            {"h_max", capacity_shadow_value(res, ControlKind::Suppression, sc.model)}};
    }
    return j;
}

json rung_json(const ContinuationRung& rung, bool horizon_mode) {
    json j{{"parameter", rung.parameter},
           {"cost_total", rung.cost_total},
           {"max_violation", rung.max_violation},
           {"control_distance", rung.control_distance},
           {"converged", rung.converged}};
    if (horizon_mode) {
        j["cost_gap"] = rung.cost_gap;
        j["tail_bound"] = rung.tail_bound;
    }
    return j;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& parameter) {
    std::string out = parameter + ",cost_total,peak_i,final_size,max_violation,converged,failed\n";
    for (const auto& row : rows) {
        out += fmt(row.value);
        out += ',';
        out += row.failed ? "" : fmt(row.cost_total);
        out += ',';
        out += row.failed ? "" : fmt(row.peak_i);
        out += ',';
        out += row.failed ? "" : fmt(row.final_size);
        out += ',';
        out += row.failed ? "" : fmt(row.max_violation);
        out += ',';
        out += row.converged ? "1" : "0";
        out += ',';
        out += row.failed ? "1" : "0";
        out += '\n';
    }
    return out;
}

std::string random_sweep_csv(const std::vector<RandomSweepRow>& rows) {
    std::string out =
        "beta,u_max,h_max,cost_total,peak_i,final_size,max_violation,converged,failed\n";
    for (const auto& row : rows) {
        out += fmt(row.beta);
        out += ',';
        out += fmt(row.u_max);
        out += ',';
        out += fmt(row.h_max);
        out += ',';
        out += row.failed ? "" : fmt(row.cost_total);
        out += ',';
        out += row.failed ? "" : fmt(row.peak_i);
        out += ',';
        out += row.failed ? "" : fmt(row.final_size);
        out += ',';
        out += row.failed ? "" : fmt(row.max_violation);
        out += ',';
        out += row.converged ? "1" : "0";
        out += ',';
        out += row.failed ? "1" : "0";
        out += '\n';
    }
    return out;
}

} // namespace

RunOutcome run_scenario(const Scenario& sc, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    json summary;
    summary["mode"] = to_string(sc.mode);
    summary["scenario"] = scenario_json(sc);
    int exit_code = kExitOk;

    try {
        sc.validate();
        switch (sc.mode) {
            case RunMode::Simulate: {
                log_info("simulate: horizon " + fmt(sc.horizon) + ", dt " + fmt(sc.dt));
                const Trajectory traj =
                    integrate(sc.initial, sc.effective_schedule(), sc.model, sc.horizon, sc.dt);
                summary["results"] = {{"trajectory", trajectory_json(traj, sc.model)},
                                      {"cost", cost_json(evaluate_cost(traj, sc.cost, sc.model))}};
                write_trajectory_csv(out_dir / "trajectory.csv", traj, nullptr, nullptr);
                break;
            }
            case RunMode::Optimize: {
                log_info("optimize: forward-backward sweep");
                const OptimizationResult res =
                    forward_backward_sweep(sc.initial, sc.effective_schedule(), sc.model,
                                           sc.cost, sc.horizon, sc.solver, sc.dt);
                log_debug("sweep finished after " + std::to_string(res.iterations) +
                          " iterations, residual " +
                          fmt(res.control_residual_history.empty()
                                  ? 0.0
                                  : res.control_residual_history.back()) +
                          ", cost " + fmt(res.cost.total));
                summary["results"] = optimize_results(res, sc);
                write_trajectory_csv(out_dir / "trajectory.csv", res.trajectory, &res.adjoints,
                                     &res.switching);
                if (!res.converged) exit_code = kExitNonConvergence;
                break;
            }
            case RunMode::KappaContinuation: {
                log_info("kappa continuation: " + std::to_string(sc.kappa_ladder.size()) +
                         " rungs");
                const ContinuationReport report =
                    kappa_continuation(sc.initial, sc.model, sc.cost, sc.horizon,
                                       sc.kappa_ladder, sc.solver, sc.dt);
                json ladder = json::array();
                for (const auto& rung : report.ladder) {
                    log_debug("rung kappa=" + fmt(rung.parameter) + " violation " +
                              fmt(rung.max_violation) +
                              (rung.converged ? "" : " (not converged)"));
                    ladder.push_back(rung_json(rung, false));
                }
                summary["results"] = {{"ladder", ladder},
                                      {"warm_started", report.warm_started}};
                const auto& fin = *report.final_result;
                summary["results"]["final_rung"] = optimize_results(fin, sc);
                write_trajectory_csv(out_dir / "trajectory.csv", fin.trajectory, &fin.adjoints,
                                     &fin.switching);
                if (!fin.converged) exit_code = kExitNonConvergence;
                break;
            }
            case RunMode::HorizonContinuation: {
                log_info("horizon continuation: " + std::to_string(sc.t_ladder.size()) +
                         " rungs");
                const ContinuationReport report = horizon_continuation(
                    sc.initial, sc.model, sc.cost, sc.t_ladder, sc.solver, sc.dt);
                json ladder = json::array();
                for (const auto& rung : report.ladder) ladder.push_back(rung_json(rung, true));
                summary["results"] = {{"ladder", ladder},
                                      {"warm_started", report.warm_started}};
                const auto& fin = *report.final_result;
                summary["results"]["final_rung"] = optimize_results(fin, sc);
                write_trajectory_csv(out_dir / "trajectory.csv", fin.trajectory, &fin.adjoints,
                                     &fin.switching);
                if (!fin.converged) exit_code = kExitNonConvergence;
                break;
            }
            case RunMode::Sweep: {
                const PipelineCase base = sc.pipeline_case();
                json results;
                std::vector<double> costs, peaks;
                if (sc.random_sweep.enabled) {
                    log_info("random sweep: " + std::to_string(sc.random_sweep.design.samples) +
                             " samples");
                    const auto rows = run_random_sweep(sc.random_sweep.design, base);
                    write_file(out_dir / "sweep.csv", random_sweep_csv(rows));
                    for (const auto& row : rows) {
                        if (!row.failed && row.converged) {
                            costs.push_back(row.cost_total);
                            peaks.push_back(row.peak_i);
                        }
                    }
                    results["rows"] = rows.size();
                } else {
                    log_info("sweep over " + to_string(sc.sweep->parameter));
                    const auto rows = run_sweep(*sc.sweep, base);
                    write_file(out_dir / "sweep.csv",
                               sweep_csv(rows, to_string(sc.sweep->parameter)));
                    for (const auto& row : rows) {
                        if (!row.failed && row.converged) {
                            costs.push_back(row.cost_total);
                            peaks.push_back(row.peak_i);
                        }
                    }
                    results["rows"] = rows.size();
                }
                results["completed_rows"] = costs.size();
                if (costs.size() >= 3) {
                    try {
                        results["corr_cost_peak"] = pearson_correlation(costs, peaks);
                    } catch (const ValidationError&) {
                        results["corr_cost_peak"] = nullptr; // degenerate variance
                    }
                }
                summary["results"] = results;
                break;
            }
            case RunMode::FinalSize: {
                log_info("final size: Lambert W vs long-horizon simulation");
                const FinalSizeResult fs = final_size_max_suppression(sc.initial, sc.model);
                const auto cells = static_cast<std::size_t>(std::round(sc.horizon / sc.dt));
                const ControlSchedule max_supp =
                    ControlSchedule::constant(0.0, sc.model.h_max, 0.0, sc.dt, cells);
                const Trajectory traj =
                    integrate(sc.initial, max_supp, sc.model, sc.horizon, sc.dt);
                const FinalSizeBound bound = final_size_upper_bound(traj, sc.model);
                const double s_T = traj.s.back();
                summary["results"] = {
                    {"lambert",
                     {{"s_inf", fs.s_inf},
                      {"final_size", fs.final_size},
                      {"implicit_residual", fs.implicit_residual}}},
                    {"simulated",
                     {{"s_inf", s_T},
                      {"final_size", traj.final_size()},
                      {"i_terminal", traj.i.back()}}},
                    {"relative_gap", std::abs(s_T - fs.s_inf) / std::abs(fs.s_inf)},
                    {"upper_bound",
                     {{"bound", bound.bound}, {"truncation_safe", bound.truncation_safe}}},
                    {"trajectory", trajectory_json(traj, sc.model)}};
                write_trajectory_csv(out_dir / "trajectory.csv", traj, nullptr, nullptr);
                break;
            }
        }
    } catch (const ValidationError& ex) {
        const json err{{"error", {{"type", "validation"}, {"message", ex.what()}}}};
        write_file(out_dir / "error.json", err.dump(2) + "\n");
        std::cerr << "[epi-ctrl] validation error: " << ex.what() << "\n";
        return {kExitValidation, (out_dir / "error.json").string()};
    } catch (const NumericError& ex) {
        const json err{{"error", {{"type", "numeric"}, {"message", ex.what()}}}};
        write_file(out_dir / "error.json", err.dump(2) + "\n");
        std::cerr << "[epi-ctrl] numeric error: " << ex.what() << "\n";
        return {kExitNumeric, (out_dir / "error.json").string()};
    } catch (const std::exception& ex) {
        const json err{{"error", {{"type", "internal"}, {"message", ex.what()}}}};
        write_file(out_dir / "error.json", err.dump(2) + "\n");
        std::cerr << "[epi-ctrl] error: " << ex.what() << "\n";
        return {kExitNumeric, (out_dir / "error.json").string()};
    }

    const auto summary_path = out_dir / "summary.json";
    write_file(summary_path, summary.dump(2) + "\n");
    return {exit_code, summary_path.string()};
}

} // namespace epictrl
