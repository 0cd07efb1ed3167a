#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "epictrl/errors.hpp"

namespace epictrl {

/// Epidemiological rates, control bounds, activation delays and the
/// healthcare capacity threshold. Rates are per day, compartment values are
/// population fractions.
struct ModelParams {
    double beta = 0.0;      ///< baseline transmission rate (1/day)
    double sigma = 0.0;     ///< incubation exit rate (1/day)
    double gamma = 0.0;     ///< recovery rate (1/day)
    double u_max = 0.0;     ///< maximum vaccination rate (1/day)
    double h_max = 0.0;     ///< maximum suppression effect on beta (1/day)
    double t_delay_u = 0.0; ///< vaccination activation time (day)
    double t_delay_h = 0.0; ///< suppression activation time (day)
    double i_max = 0.0;     ///< capacity threshold, fraction in (0,1)

    /// Effective minimum transmission rate beta - h_max (> 0 by validation).
    double beta_tilde() const { return beta - h_max; }

    /// Throws ValidationError unless beta, sigma, gamma > 0,
    /// 0 <= h_max < beta, u_max >= 0, delays >= 0 and 0 < i_max < 1.
    void validate() const;
};

/// A point of the population simplex (s, e, i, r).
struct EpidemicState {
    double s = 0.0;
    double e = 0.0;
    double i = 0.0;
    double r = 0.0;

    double sum() const { return s + e + i + r; }

    /// Throws ValidationError if any component is outside [0,1] or the
    /// components do not sum to 1 within `sum_tol`. Mismatched inputs are
    /// rejected, never rescaled.
    void validate(double sum_tol = 1e-12) const;
};

/// Piecewise-constant control values (u, h) on a uniform time grid.
/// Cell k covers [t0 + k*dt, t0 + (k+1)*dt); the control applied at any time
/// inside a cell is that cell's value.
class ControlSchedule {
public:
    ControlSchedule() = default;
    ControlSchedule(double t0, double dt, std::vector<double> u_values,
                    std::vector<double> h_values);

    /// Constant-control schedule spanning `cells` grid cells.
    static ControlSchedule constant(double u, double h, double t0, double dt,
                                    std::size_t cells);

    double t0() const { return t0_; }
    double dt() const { return dt_; }
    std::size_t cells() const { return u_.size(); }
    double end_time() const { return t0_ + dt_ * static_cast<double>(u_.size()); }

    double u_cell(std::size_t k) const { return u_[k]; }
    double h_cell(std::size_t k) const { return h_[k]; }
    void set_cell(std::size_t k, double u, double h) { u_[k] = u; h_[k] = h; }

    const std::vector<double>& u_values() const { return u_; }
    const std::vector<double>& h_values() const { return h_; }

    /// Index of the cell containing time t (last cell for t == end_time()).
    std::size_t cell_index(double t) const;
    double u_at(double t) const { return u_[cell_index(t)]; }
    double h_at(double t) const { return h_[cell_index(t)]; }

    /// Checks box bounds and the activation delays: u must vanish on every
    /// cell whose left endpoint precedes t_delay_u, likewise for h.
    /// Throws ValidationError on the first violated cell.
    void validate_admissible(const ModelParams& params) const;

    /// Largest |u_a - u_b| or |h_a - h_b| over the common cell prefix.
    static double sup_distance(const ControlSchedule& a, const ControlSchedule& b);

private:
    double t0_ = 0.0;
    double dt_ = 0.0;
    std::vector<double> u_;
    std::vector<double> h_;
};

/// Time-indexed output of one forward pass: states, applied controls and the
/// infection peak. Immutable after construction; safe to share across threads.
struct Trajectory {
    std::vector<double> times;
    std::vector<double> s, e, i, r;
    std::vector<double> u, h; ///< control applied on the cell starting at times[k]

    double peak_i = 0.0;
    double peak_time = 0.0;

    std::size_t samples() const { return times.size(); }
    double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }

    EpidemicState state_at(std::size_t k) const { return {s[k], e[k], i[k], r[k]}; }
    EpidemicState final_state() const { return state_at(times.size() - 1); }

    /// 1 - s(T), the fraction ever removed from susceptibility.
    double final_size() const { return 1.0 - s.back(); }

    /// max_t |s+e+i+r-1| over all samples.
    double conservation_defect() const;
};

/// Right-hand side of the controlled SEIR system:
///   ds = -(beta-h) s i - u s,   de = (beta-h) s i - sigma e,
///   di = sigma e - gamma i,     dr = gamma i + u s.
/// Components sum to zero exactly up to rounding.
/// Throws ValidationError if h >= beta.
std::array<double, 4> seir_rhs(const EpidemicState& state, double u, double h,
                               const ModelParams& params);

/// Fixed-step RK4 integration of the controlled system with controls held
/// constant within each schedule cell. `dt` must divide the schedule grid
/// step and the horizon. Samples are recorded every `dt`; negative round-off
/// up to 1e-12 is clamped to zero, anything worse raises NumericError, as
/// does a conservation defect beyond `conservation_tol`.
Trajectory integrate(const EpidemicState& x0, const ControlSchedule& schedule,
                     const ModelParams& params, double horizon_T, double dt,
                     double conservation_tol = 1e-9);

/// Max over sample times of |(s+e+i)(t) - (s+e+i)(0) + int_0^t (u s + gamma i)|
/// with the integral taken by trapezoid on the sample grid.
double integral_identity_residual(const Trajectory& traj, const ModelParams& params);

} // namespace epictrl
