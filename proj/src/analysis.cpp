#include "epictrl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace epictrl {

namespace {
const double kInvE = std::exp(-1.0);
}

double lambert_w0(double z) {
    if (z < -kInvE - 1e-15)
        throw NumericError("lambert_w0 domain error: z = " + std::to_string(z) + " < -1/e");
    if (z <= -kInvE) return -1.0;
    if (z == 0.0) return 0.0;

    double w;
    if (z < -0.25 * kInvE) {
        // series around the branch point in p = sqrt(2(e z + 1))
        const double p = std::sqrt(2.0 * (std::exp(1.0) * z + 1.0));
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    } else if (z > std::exp(1.0)) {
        const double l = std::log(z);
        w = l - std::log(l);
    } else {
        w = z / (1.0 + z);
    }

    for (int iter = 0; iter < 50; ++iter) {
        const double ew = std::exp(w);
        const double f = w * ew - z;
        if (std::abs(f) <= 1e-14 * std::max(1.0, std::abs(z))) break;
        // Halley update
        const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        const double step = f / denom;
        w -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(w))) break;
    }
    return w;
}

FinalSizeResult final_size_max_suppression(const EpidemicState& x0, const ModelParams& params) {
    params.validate();
    x0.validate();
    if (!(x0.i > 0.0)) throw ValidationError("final size requires i0 > 0");

    const double bt = params.beta_tilde();
    const double a = bt / params.gamma;
    const double x_total = x0.s + x0.e + x0.i;
    const double z = -a * x0.s * std::exp(-a * x_total);
    // z >= -1/e holds for every simplex state with i0 > 0: a s0 e^{-a X0}
    // <= a X0 e^{-a X0} <= 1/e with strict inequality since X0 > s0.
    const double w = lambert_w0(z);

    FinalSizeResult out;
    out.s_inf = -w / a;
    out.final_size = 1.0 - out.s_inf;
    out.implicit_residual = std::abs(std::log(out.s_inf / x0.s) + a * (x_total - out.s_inf));
    return out;
}

FinalSizeBound final_size_upper_bound(const Trajectory& traj, const ModelParams& params) {
    const std::size_t n = traj.samples();
    double integral = 0.0;
    double prev = params.beta_tilde() * traj.i[0] + traj.u[0];
    for (std::size_t k = 1; k < n; ++k) {
        const double cur = params.beta_tilde() * traj.i[k] + traj.u[k];
        integral += 0.5 * (prev + cur) * (traj.times[k] - traj.times[k - 1]);
        prev = cur;
    }
    FinalSizeBound out;
    out.i_terminal = traj.i.back();
    out.truncation_safe = out.i_terminal < 1e-6;
    out.bound = traj.s[0] * std::exp(-integral);
    return out;
}

double r_eff(const EpidemicState& state, double h, const ModelParams& params) {
    if (!(h >= 0.0) || !(h < params.beta))
        throw ValidationError("r_eff requires 0 <= h < beta");
    return (params.beta - h) * state.s / params.gamma;
}

BoundaryControl boundary_maintenance_control(double s, const ModelParams& params) {
    if (!(s > 0.0)) throw ValidationError("boundary maintenance requires s > 0");
    const double unclamped = params.beta - params.gamma / s;
    BoundaryControl out;
    out.admissible = unclamped >= 0.0 && unclamped <= params.h_max;
    out.h = std::clamp(unclamped, 0.0, params.h_max);
    return out;
}

Trajectory integrate_boundary_feedback(const EpidemicState& x0, const ModelParams& params,
                                       double horizon_T, double dt) {
    params.validate();
    x0.validate();
    if (!(horizon_T > 0.0) || !(dt > 0.0))
        throw ValidationError("horizon and dt must be positive");
    const auto steps = static_cast<std::size_t>(std::round(horizon_T / dt));

    Trajectory traj;
    traj.times.resize(steps + 1);
    traj.s.resize(steps + 1);
    traj.e.resize(steps + 1);
    traj.i.resize(steps + 1);
    traj.r.resize(steps + 1);
    traj.u.assign(steps + 1, 0.0);
    traj.h.resize(steps + 1);
    traj.peak_i = x0.i;
    traj.peak_time = 0.0;

    auto h_of = [&](double s) { return boundary_maintenance_control(s, params).h; };
    auto f = [&](const std::array<double, 4>& x) {
        const double h = h_of(x[0]);
        const double infection = (params.beta - h) * x[0] * x[2];
        return std::array<double, 4>{-infection, infection - params.sigma * x[1],
                                     params.sigma * x[1] - params.gamma * x[2],
                                     params.gamma * x[2]};
    };

    std::array<double, 4> x{x0.s, x0.e, x0.i, x0.r};
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        traj.times[k] = t;
        traj.s[k] = x[0];
        traj.e[k] = x[1];
        traj.i[k] = x[2];
        traj.r[k] = x[3];
        traj.h[k] = h_of(x[0]);
        if (x[2] > traj.peak_i) {
            traj.peak_i = x[2];
            traj.peak_time = t;
        }
        if (k == steps) break;
        const auto k1 = f(x);
        std::array<double, 4> tmp;
        for (int j = 0; j < 4; ++j) tmp[j] = x[j] + 0.5 * dt * k1[j];
        const auto k2 = f(tmp);
        for (int j = 0; j < 4; ++j) tmp[j] = x[j] + 0.5 * dt * k2[j];
        const auto k3 = f(tmp);
        for (int j = 0; j < 4; ++j) tmp[j] = x[j] + dt * k3[j];
        const auto k4 = f(tmp);
        for (int j = 0; j < 4; ++j)
            x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return traj;
}

double time_free_residual(const Trajectory& traj, const ModelParams& params) {
    const std::size_t n = traj.samples();
    const double x_start = traj.s[0] + traj.e[0] + traj.i[0];

    auto integrand = [&](std::size_t k) {
        const double drain = (params.beta - traj.h[k]) * traj.i[k] + traj.u[k];
        if (drain < 1e-14)
            throw NumericError("time-free representation degenerate: (beta-h) i + u < 1e-14 "
                               "at t = " + std::to_string(traj.times[k]));
        return (traj.u[k] * traj.s[k] + params.gamma * traj.i[k]) / (traj.s[k] * drain);
    };

    double integral = 0.0;
    double worst = 0.0;
    double prev = integrand(0);
    for (std::size_t k = 1; k < n; ++k) {
        const double cur = integrand(k);
        integral += 0.5 * (prev + cur) * (traj.s[k - 1] - traj.s[k]);
        prev = cur;
        const double drop = x_start - (traj.s[k] + traj.e[k] + traj.i[k]);
        worst = std::max(worst, std::abs(drop - integral));
    }
    return worst;
}

} // namespace epictrl
