#pragma once

#include "epictrl/model.hpp"

namespace epictrl {

/// Discounted running-cost weights and the capacity penalty weight.
struct CostParams {
    double c_h = 1.0;    ///< suppression cost weight (per unit suppression * prevalence)
    double c_nh = 1.0;   ///< societal infection cost weight (per unit prevalence-day)
    double c_v = 0.5;    ///< vaccination cost weight (per administered-rate unit)
    double delta = 0.05; ///< discount rate (1/day)
    double kappa = 0.0;  ///< capacity penalty weight

    bool all_zero() const { return c_h == 0.0 && c_nh == 0.0 && c_v == 0.0 && kappa == 0.0; }

    void validate() const;
};

/// Discounted cost components of one trajectory. `total` is an independent
/// quadrature of the combined density, so additivity is a checkable property
/// rather than an identity by construction.
struct CostBreakdown {
    double total = 0.0;
    double suppression_part = 0.0; ///< int c_h i h e^{-delta t}
    double infection_part = 0.0;   ///< int c_nh i e^{-delta t}
    double vaccination_part = 0.0; ///< int c_v u s e^{-delta t}
    double penalty_part = 0.0;     ///< int kappa psi(i) e^{-delta t}
    double max_violation = 0.0;    ///< max_t (i - i_max)_+
    bool feasible_strict = false;
    double tail_bound = 0.0;       ///< C e^{-delta T}/delta bound on the omitted tail
};

/// Undiscounted running cost density c_h*i*h + c_nh*i + c_v*u*s.
double running_cost_l0(const EpidemicState& state, double u, double h, const CostParams& cp);

/// Capacity-violation penalty (max{0, i - i_max})^2; C^1 with derivative
/// 2 (i - i_max)_+.
double penalty_psi(double i, double i_max);
double penalty_psi_derivative(double i, double i_max);

/// Trapezoidal quadrature of the discounted cost components on the sample
/// grid; discount factors are evaluated at sample points. The tail bound uses
/// C = c_h h_max + c_nh + c_v u_max + kappa (1-i_max)^2.
CostBreakdown evaluate_cost(const Trajectory& traj, const CostParams& cp,
                            const ModelParams& params, double strict_tol = 1e-6);

struct FeasibilityResult {
    bool feasible = false;
    double max_violation = 0.0;
};

/// true iff max_t i(t) <= i_max + tol.
FeasibilityResult check_strict_feasibility(const Trajectory& traj, double i_max,
                                           double tol = 1e-6);

} // namespace epictrl
