#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "epictrl/analysis.hpp"
#include "epictrl/continuation.hpp"
#include "epictrl/scenario.hpp"
#include "epictrl/sensitivity.hpp"

namespace py = pybind11;
using namespace epictrl;

PYBIND11_MODULE(_epictrl, m) {
    m.doc() = "Optimal epidemic control: SEIR dynamics, Pontryagin forward-backward "
              "solver, continuation ladders and sensitivity analysis";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("beta", &ModelParams::beta)
        .def_readwrite("sigma", &ModelParams::sigma)
        .def_readwrite("gamma", &ModelParams::gamma)
        .def_readwrite("u_max", &ModelParams::u_max)
        .def_readwrite("h_max", &ModelParams::h_max)
        .def_readwrite("t_delay_u", &ModelParams::t_delay_u)
        .def_readwrite("t_delay_h", &ModelParams::t_delay_h)
        .def_readwrite("i_max", &ModelParams::i_max)
        .def("validate", &ModelParams::validate);

    py::class_<EpidemicState>(m, "EpidemicState")
        .def(py::init<double, double, double, double>(), py::arg("s"), py::arg("e"),
             py::arg("i"), py::arg("r"))
        .def_readwrite("s", &EpidemicState::s)
        .def_readwrite("e", &EpidemicState::e)
        .def_readwrite("i", &EpidemicState::i)
        .def_readwrite("r", &EpidemicState::r)
        .def("validate", &EpidemicState::validate, py::arg("sum_tol") = 1e-12);

    py::class_<ControlSchedule>(m, "ControlSchedule")
        .def(py::init<double, double, std::vector<double>, std::vector<double>>(),
             py::arg("t0"), py::arg("dt"), py::arg("u_values"), py::arg("h_values"))
        .def_static("constant", &ControlSchedule::constant, py::arg("u"), py::arg("h"),
                    py::arg("t0"), py::arg("dt"), py::arg("cells"))
        .def_property_readonly("t0", &ControlSchedule::t0)
        .def_property_readonly("dt", &ControlSchedule::dt)
        .def_property_readonly("cells", &ControlSchedule::cells)
        .def("u_at", &ControlSchedule::u_at)
        .def("h_at", &ControlSchedule::h_at)
        .def_property_readonly("u_values", &ControlSchedule::u_values)
        .def_property_readonly("h_values", &ControlSchedule::h_values);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("s", &Trajectory::s)
        .def_readonly("e", &Trajectory::e)
        .def_readonly("i", &Trajectory::i)
        .def_readonly("r", &Trajectory::r)
        .def_readonly("u", &Trajectory::u)
        .def_readonly("h", &Trajectory::h)
        .def_readonly("peak_i", &Trajectory::peak_i)
        .def_readonly("peak_time", &Trajectory::peak_time)
        .def("final_state", &Trajectory::final_state)
        .def("final_size", &Trajectory::final_size)
        .def("conservation_defect", &Trajectory::conservation_defect);

    py::class_<CostParams>(m, "CostParams")
        .def(py::init<>())
        .def_readwrite("c_h", &CostParams::c_h)
        .def_readwrite("c_nh", &CostParams::c_nh)
        .def_readwrite("c_v", &CostParams::c_v)
        .def_readwrite("delta", &CostParams::delta)
        .def_readwrite("kappa", &CostParams::kappa);

    py::class_<CostBreakdown>(m, "CostBreakdown")
        .def_readonly("total", &CostBreakdown::total)
        .def_readonly("suppression_part", &CostBreakdown::suppression_part)
        .def_readonly("infection_part", &CostBreakdown::infection_part)
        .def_readonly("vaccination_part", &CostBreakdown::vaccination_part)
        .def_readonly("penalty_part", &CostBreakdown::penalty_part)
        .def_readonly("max_violation", &CostBreakdown::max_violation)
        .def_readonly("feasible_strict", &CostBreakdown::feasible_strict)
        .def_readonly("tail_bound", &CostBreakdown::tail_bound);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("max_iters", &SolverConfig::max_iters)
        .def_readwrite("damping", &SolverConfig::damping)
        .def_readwrite("conv_tol", &SolverConfig::conv_tol)
        .def_readwrite("sing_tol", &SolverConfig::sing_tol)
        .def_readwrite("singular_policy", &SolverConfig::singular_policy);

    py::enum_<SingularPolicy>(m, "SingularPolicy")
        .value("MIDPOINT", SingularPolicy::Midpoint)
        .value("BOUNDARY_FEEDBACK", SingularPolicy::BoundaryFeedback);

    py::enum_<ControlKind>(m, "ControlKind")
        .value("VACCINATION", ControlKind::Vaccination)
        .value("SUPPRESSION", ControlKind::Suppression);

    py::class_<AdjointState>(m, "AdjointState")
        .def_readonly("lambda_s", &AdjointState::lambda_s)
        .def_readonly("lambda_e", &AdjointState::lambda_e)
        .def_readonly("lambda_i", &AdjointState::lambda_i);

    py::class_<OptimizationResult>(m, "OptimizationResult")
        .def_readonly("schedule", &OptimizationResult::schedule)
        .def_readonly("trajectory", &OptimizationResult::trajectory)
        .def_readonly("adjoints", &OptimizationResult::adjoints)
        .def_readonly("cost", &OptimizationResult::cost)
        .def_readonly("iterations", &OptimizationResult::iterations)
        .def_readonly("converged", &OptimizationResult::converged)
        .def_readonly("control_residual_history",
                      &OptimizationResult::control_residual_history)
        .def_readonly("initial_cost", &OptimizationResult::initial_cost);

    py::class_<FinalSizeResult>(m, "FinalSizeResult")
        .def_readonly("s_inf", &FinalSizeResult::s_inf)
        .def_readonly("final_size", &FinalSizeResult::final_size)
        .def_readonly("implicit_residual", &FinalSizeResult::implicit_residual);

    py::class_<ContinuationRung>(m, "ContinuationRung")
        .def_readonly("parameter", &ContinuationRung::parameter)
        .def_readonly("cost_total", &ContinuationRung::cost_total)
        .def_readonly("max_violation", &ContinuationRung::max_violation)
        .def_readonly("control_distance", &ContinuationRung::control_distance)
        .def_readonly("converged", &ContinuationRung::converged)
        .def_readonly("cost_gap", &ContinuationRung::cost_gap)
        .def_readonly("tail_bound", &ContinuationRung::tail_bound);

    py::class_<ContinuationReport>(m, "ContinuationReport")
        .def_readonly("ladder", &ContinuationReport::ladder)
        .def_readonly("warm_started", &ContinuationReport::warm_started);

    m.def("seir_rhs", &seir_rhs, py::arg("state"), py::arg("u"), py::arg("h"),
          py::arg("params"));
    m.def("integrate", &integrate, py::arg("x0"), py::arg("schedule"), py::arg("params"),
          py::arg("horizon"), py::arg("dt"), py::arg("conservation_tol") = 1e-9);
    m.def("integral_identity_residual", &integral_identity_residual);
    m.def("running_cost_l0", &running_cost_l0);
    m.def("penalty_psi", &penalty_psi);
    m.def("evaluate_cost", &evaluate_cost, py::arg("trajectory"), py::arg("cost"),
          py::arg("params"), py::arg("strict_tol") = 1e-6);
    m.def("lambert_w0", &lambert_w0);
    m.def("final_size_max_suppression", &final_size_max_suppression);
    m.def("r_eff", &r_eff);
    m.def("boundary_maintenance_control", [](double s, const ModelParams& p) {
        const auto bc = boundary_maintenance_control(s, p);
        return py::make_tuple(bc.h, bc.admissible);
    });
    m.def("integrate_boundary_feedback", &integrate_boundary_feedback);
    m.def("time_free_residual", &time_free_residual);
    m.def("forward_backward_sweep", &forward_backward_sweep, py::arg("x0"), py::arg("init"),
          py::arg("params"), py::arg("cost"), py::arg("horizon"), py::arg("config"),
          py::arg("dt"));
    m.def("gradient_check",
          [](const EpidemicState& x0, const ControlSchedule& sched, const ModelParams& p,
             const CostParams& cp, double horizon, std::size_t cell, ControlKind kind,
             double eps, double dt) {
              const auto gc = gradient_check(x0, sched, p, cp, horizon, cell, kind, eps, dt);
              return py::make_tuple(gc.adjoint_gradient, gc.fd_gradient, gc.frozen_by_delay);
          });
    m.def("kappa_continuation", &kappa_continuation, py::arg("x0"), py::arg("params"),
          py::arg("cost"), py::arg("horizon"), py::arg("kappa_ladder"), py::arg("config"),
          py::arg("dt"));
    m.def("horizon_continuation", &horizon_continuation, py::arg("x0"), py::arg("params"),
          py::arg("cost"), py::arg("t_ladder"), py::arg("config"), py::arg("dt"));
    m.def("pearson_correlation", [](const std::vector<double>& xs,
                                    const std::vector<double>& ys) {
        return pearson_correlation(xs, ys);
    });
    m.def("capacity_shadow_value", &capacity_shadow_value, py::arg("result"), py::arg("which"),
          py::arg("params"), py::arg("bind_tol") = 1e-3);
    m.def("run_scenario_file",
          [](const std::string& scenario_path, const std::string& out_dir) {
              const Scenario sc = parse_scenario(scenario_path);
              return run_scenario(sc, out_dir).exit_code;
          },
          py::arg("scenario_path"), py::arg("out_dir"),
          "Parse a scenario file, run it, write artifacts; returns the exit code");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
