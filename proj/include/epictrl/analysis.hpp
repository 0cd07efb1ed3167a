#pragma once

#include "epictrl/model.hpp"

namespace epictrl {

/// Principal branch of the Lambert W function, solving w e^w = z for
/// z >= -1/e. Halley iteration from a piecewise initial guess; the returned
/// value satisfies |w e^w - z| <= 1e-12 max(1, |z|).
/// Throws NumericError for z < -1/e - 1e-15.
double lambert_w0(double z);

/// Limiting susceptible fraction under h == h_max, u == 0, its complement,
/// and the residual of the implicit final-size relation
/// ln(s_inf/s0) = -(beta_tilde/gamma)(X0 - s_inf).
struct FinalSizeResult {
    double s_inf = 0.0;
    double final_size = 0.0;
    double implicit_residual = 0.0;
};

/// Closed-form final size under maximal suppression via the Lambert W
/// representation. Requires beta > h_max and i0 > 0.
FinalSizeResult final_size_max_suppression(const EpidemicState& x0, const ModelParams& params);

/// Upper bound s0 exp(-int_0^T [(beta-h_max) i + u]) evaluated by trapezoid.
/// `truncation_safe` is false when i(T) >= 1e-6 (tail too fat to truncate).
struct FinalSizeBound {
    double bound = 0.0;
    double i_terminal = 0.0;
    bool truncation_safe = false;
};

FinalSizeBound final_size_upper_bound(const Trajectory& traj, const ModelParams& params);

/// Effective reproduction number (beta - h) s / gamma. Requires 0 <= h < beta.
double r_eff(const EpidemicState& state, double h, const ModelParams& params);

/// Feedback suppression h_bm = beta - gamma/s that pins di/dt at zero on the
/// capacity boundary, clamped to [0, h_max]. `admissible` reports whether the
/// unclamped value was inside the box, equivalently
/// s in [gamma/beta, gamma/(beta - h_max)].
struct BoundaryControl {
    double h = 0.0;
    bool admissible = false;
};

BoundaryControl boundary_maintenance_control(double s, const ModelParams& params);

/// Closed-loop run applying boundary-maintenance suppression at every RK4
/// stage (u == 0). Holds i at its initial level exactly while the feedback
/// stays admissible; outside the admissible window the clamped value applies.
Trajectory integrate_boundary_feedback(const EpidemicState& x0, const ModelParams& params,
                                       double horizon_T, double dt);

/// Max mismatch between the time-free susceptible-variable quadrature of the
/// drain integrand [u X + gamma i] / (X [(beta-h) i + u]) and the direct drop
/// of s+e+i, evaluated on the s-grid induced by the time grid.
/// Throws NumericError when (beta-h) i + u < 1e-14 on any cell (stationary s,
/// the change of variables is invalid).
double time_free_residual(const Trajectory& traj, const ModelParams& params);

} // namespace epictrl
