#include "epictrl/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace epictrl {

namespace {

constexpr double kClampTol = 1e-12; // negative round-off clamped below this

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void ModelParams::validate() const {
    if (!(beta > 0.0) || !(sigma > 0.0) || !(gamma > 0.0))
        throw ValidationError("model rates beta, sigma, gamma must be positive");
    if (!(h_max >= 0.0) || !(h_max < beta))
        throw ValidationError("suppression bound must satisfy 0 <= h_max < beta (got h_max=" +
                              fmt(h_max) + ", beta=" + fmt(beta) + ")");
    if (!(u_max >= 0.0))
        throw ValidationError("u_max must be nonnegative");
    if (!(t_delay_u >= 0.0) || !(t_delay_h >= 0.0))
        throw ValidationError("activation delays must be nonnegative");
    if (!(i_max > 0.0) || !(i_max < 1.0))
        throw ValidationError("i_max must lie in (0,1)");
}

void EpidemicState::validate(double sum_tol) const {
    for (double v : {s, e, i, r}) {
        if (!(v >= 0.0) || !(v <= 1.0))
            throw ValidationError("state component outside [0,1]: (" + fmt(s) + ", " + fmt(e) +
                                  ", " + fmt(i) + ", " + fmt(r) + ")");
    }
    if (std::abs(sum() - 1.0) > sum_tol)
        throw ValidationError("state components must sum to 1 (got " + fmt(sum()) + ")");
}

ControlSchedule::ControlSchedule(double t0, double dt, std::vector<double> u_values,
                                 std::vector<double> h_values)
    : t0_(t0), dt_(dt), u_(std::move(u_values)), h_(std::move(h_values)) {
    if (!(dt_ > 0.0)) throw ValidationError("schedule grid step must be positive");
    if (u_.empty() || u_.size() != h_.size())
        throw ValidationError("schedule needs equal, nonempty u and h value sequences");
}

ControlSchedule ControlSchedule::constant(double u, double h, double t0, double dt,
                                          std::size_t cells) {
    return ControlSchedule(t0, dt, std::vector<double>(cells, u),
                           std::vector<double>(cells, h));
}

std::size_t ControlSchedule::cell_index(double t) const {
    const double pos = (t - t0_) / dt_;
    if (pos < 0.0)
        throw ValidationError("time " + fmt(t) + " precedes schedule start " + fmt(t0_));
    auto k = static_cast<std::size_t>(pos + 1e-9);
    return std::min(k, u_.size() - 1);
}

void ControlSchedule::validate_admissible(const ModelParams& params) const {
    for (std::size_t k = 0; k < u_.size(); ++k) {
        const double t_left = t0_ + dt_ * static_cast<double>(k);
        if (!(u_[k] >= 0.0) || u_[k] > params.u_max + 1e-15)
            throw ValidationError("u value " + fmt(u_[k]) + " at cell " + std::to_string(k) +
                                  " outside [0, u_max]");
        if (!(h_[k] >= 0.0) || h_[k] > params.h_max + 1e-15)
            throw ValidationError("h value " + fmt(h_[k]) + " at cell " + std::to_string(k) +
                                  " outside [0, h_max]");
        if (t_left < params.t_delay_u && u_[k] != 0.0)
            throw ValidationError("u must be 0 before t_delay_u=" + fmt(params.t_delay_u) +
                                  " (cell " + std::to_string(k) + ")");
        if (t_left < params.t_delay_h && h_[k] != 0.0)
            throw ValidationError("h must be 0 before t_delay_h=" + fmt(params.t_delay_h) +
                                  " (cell " + std::to_string(k) + ")");
    }
}

double ControlSchedule::sup_distance(const ControlSchedule& a, const ControlSchedule& b) {
    const std::size_t n = std::min(a.cells(), b.cells());
    double d = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        d = std::max(d, std::abs(a.u_[k] - b.u_[k]));
        d = std::max(d, std::abs(a.h_[k] - b.h_[k]));
    }
    return d;
}

double Trajectory::conservation_defect() const {
    double worst = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k)
        worst = std::max(worst, std::abs(s[k] + e[k] + i[k] + r[k] - 1.0));
    return worst;
}

std::array<double, 4> seir_rhs(const EpidemicState& state, double u, double h,
                               const ModelParams& params) {
    if (h >= params.beta)
        throw ValidationError("suppression h=" + fmt(h) + " must stay below beta=" +
                              fmt(params.beta));
    const double infection = (params.beta - h) * state.s * state.i;
    const double vaccination = u * state.s;
    return {-infection - vaccination,
            infection - params.sigma * state.e,
            params.sigma * state.e - params.gamma * state.i,
            params.gamma * state.i + vaccination};
}

namespace {

inline std::array<double, 4> rhs_raw(const std::array<double, 4>& x, double u, double h,
                                     const ModelParams& p) {
    const double infection = (p.beta - h) * x[0] * x[2];
    const double vaccination = u * x[0];
    return {-infection - vaccination,
            infection - p.sigma * x[1],
            p.sigma * x[1] - p.gamma * x[2],
            p.gamma * x[2] + vaccination};
}

inline std::array<double, 4> rk4_step(const std::array<double, 4>& x, double u, double h,
                                      double dt, const ModelParams& p) {
    const auto k1 = rhs_raw(x, u, h, p);
    std::array<double, 4> tmp;
    for (int j = 0; j < 4; ++j) tmp[j] = x[j] + 0.5 * dt * k1[j];
    const auto k2 = rhs_raw(tmp, u, h, p);
    for (int j = 0; j < 4; ++j) tmp[j] = x[j] + 0.5 * dt * k2[j];
    const auto k3 = rhs_raw(tmp, u, h, p);
    for (int j = 0; j < 4; ++j) tmp[j] = x[j] + dt * k3[j];
    const auto k4 = rhs_raw(tmp, u, h, p);
    std::array<double, 4> out;
    for (int j = 0; j < 4; ++j)
        out[j] = x[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    return out;
}

} // namespace

Trajectory integrate(const EpidemicState& x0, const ControlSchedule& schedule,
                     const ModelParams& params, double horizon_T, double dt,
                     double conservation_tol) {
    params.validate();
    x0.validate();
    schedule.validate_admissible(params);
    if (!(horizon_T > 0.0)) throw ValidationError("horizon must be positive");
    if (!(dt > 0.0)) throw ValidationError("integration step must be positive");

    const double cells_per_step = schedule.dt() / dt;
    if (std::abs(cells_per_step - std::round(cells_per_step)) > 1e-9)
        throw ValidationError("integration dt must divide the schedule grid step");
    const auto steps = static_cast<std::size_t>(std::round(horizon_T / dt));
    if (std::abs(static_cast<double>(steps) * dt - horizon_T) > 1e-9 * std::max(1.0, horizon_T))
        throw ValidationError("integration dt must divide the horizon");
    if (schedule.end_time() < horizon_T - 1e-9)
        throw ValidationError("schedule ends before the horizon");

    Trajectory traj;
    traj.times.resize(steps + 1);
    traj.s.resize(steps + 1);
    traj.e.resize(steps + 1);
    traj.i.resize(steps + 1);
    traj.r.resize(steps + 1);
    traj.u.resize(steps + 1);
    traj.h.resize(steps + 1);

    std::array<double, 4> x{x0.s, x0.e, x0.i, x0.r};
    traj.peak_i = x0.i;
    traj.peak_time = 0.0;

    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        traj.times[k] = t;
        traj.s[k] = x[0];
        traj.e[k] = x[1];
        traj.i[k] = x[2];
        traj.r[k] = x[3];
        const double t_ctrl = std::min(t, schedule.end_time() - 0.5 * dt);
        const double uk = schedule.u_at(t_ctrl);
        const double hk = schedule.h_at(t_ctrl);
        traj.u[k] = uk;
        traj.h[k] = hk;
        if (x[2] > traj.peak_i) {
            traj.peak_i = x[2];
            traj.peak_time = t;
        }
        if (k == steps) break;

        x = rk4_step(x, uk, hk, dt, params);

        for (int j = 0; j < 4; ++j) {
            if (std::isnan(x[j]))
                throw NumericError("non-finite state at t=" + fmt(t + dt));
            if (x[j] < 0.0) {
                if (x[j] >= -kClampTol) {
                    x[j] = 0.0;
                } else {
                    throw NumericError("state component " + std::to_string(j) + " = " +
                                       fmt(x[j]) + " below -1e-12 at t=" + fmt(t + dt) +
                                       "; reduce dt");
                }
            }
        }
        const double defect = std::abs(x[0] + x[1] + x[2] + x[3] - 1.0);
        if (defect > conservation_tol)
            throw NumericError("conservation defect " + fmt(defect) + " exceeds tolerance " +
                               fmt(conservation_tol) + " at t=" + fmt(t + dt) +
                               "; reduce dt");
    }
    return traj;
}

double integral_identity_residual(const Trajectory& traj, const ModelParams& params) {
    const std::size_t n = traj.samples();
    const double x_start = traj.s[0] + traj.e[0] + traj.i[0];
    double integral = 0.0;
    double worst = 0.0;
    double prev = traj.u[0] * traj.s[0] + params.gamma * traj.i[0];
    for (std::size_t k = 1; k < n; ++k) {
        const double cur = traj.u[k] * traj.s[k] + params.gamma * traj.i[k];
        integral += 0.5 * (prev + cur) * (traj.times[k] - traj.times[k - 1]);
        prev = cur;
        const double x_now = traj.s[k] + traj.e[k] + traj.i[k];
        worst = std::max(worst, std::abs(x_now - x_start + integral));
    }
    return worst;
}

} // namespace epictrl
