#include <doctest.h>

#include <cmath>
#include <random>

#include "epictrl/analysis.hpp"
#include "test_helpers.hpp"

using namespace epictrl;
using namespace epictrl::testing;

namespace {

// Independent oracle for the final-size relation: bisection on
// g(s) = ln(s/s0) + a (X0 - s), which is strictly increasing in s and
// brackets a sign change on (0, s0).
double final_size_bisection(const EpidemicState& x0, const ModelParams& p) {
    const double a = p.beta_tilde() / p.gamma;
    const double x_total = x0.s + x0.e + x0.i;
    auto g = [&](double s) { return std::log(s / x0.s) + a * (x_total - s); };
    double lo = 1e-300, hi = x0.s;
    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("lambert_w0 basics") {
    CHECK(lambert_w0(0.0) == 0.0);
    CHECK(lambert_w0(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lambert_w0(-std::exp(-1.0)) == -1.0);
    CHECK_THROWS_AS(lambert_w0(-std::exp(-1.0) - 1e-12), NumericError);

    SUBCASE("inverse property over the domain") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int n = 0; n < 1000; ++n) {
            const double z = -std::exp(-1.0) + (10.0 + std::exp(-1.0)) * uni(rng);
            const double w = lambert_w0(z);
            CHECK(w >= -1.0);
            CHECK(std::abs(w * std::exp(w) - z) <= 1e-12 * std::max(1.0, std::abs(z)));
        }
    }
}

TEST_CASE("final size under maximal suppression") {
    const ModelParams p = baseline_params();

    SUBCASE("baseline value and both oracles") {
        const FinalSizeResult fs = final_size_max_suppression(baseline_x0(), p);
        CHECK(std::abs(fs.s_inf - 0.0524) <= 5e-4);
        CHECK(fs.implicit_residual <= 1e-10);
        CHECK(std::abs(fs.s_inf - final_size_bisection(baseline_x0(), p)) <= 1e-9);

        const auto sched = ControlSchedule::constant(0.0, p.h_max, 0.0, 0.01, 400000);
        const Trajectory traj = integrate(baseline_x0(), sched, p, 4000.0, 0.01);
        CHECK(std::abs(traj.s.back() - fs.s_inf) <= 1e-3 * fs.s_inf);
    }

    SUBCASE("vanishing epidemic keeps s near s0 when subcritical") {
        ModelParams sub = p; // beta_tilde/gamma = 3, subcritical needs small s0
        EpidemicState x0{0.25, 0.0, 1e-9, 0.0};
        x0.r = 1.0 - x0.s - x0.e - x0.i;
        const FinalSizeResult fs = final_size_max_suppression(x0, sub);
        CHECK(fs.s_inf <= x0.s);
        CHECK(fs.s_inf >= 0.9 * x0.s); // beta_tilde s0 / gamma = 0.75 < 1
        const auto sched = ControlSchedule::constant(0.0, p.h_max, 0.0, 0.01, 400000);
        const Trajectory traj = integrate(x0, sched, sub, 4000.0, 0.01);
        CHECK(std::abs(traj.s.back() - fs.s_inf) <= 1e-3 * fs.s_inf);
    }

    SUBCASE("random parameter consistency against the long-horizon simulation") {
        std::mt19937_64 rng(42);
        int done = 0;
        while (done < 20) {
            RandomCase rc = random_case(rng);
            // keep the decay spectrum resolvable at T = 4000 by avoiding the
            // near-critical slow manifold
            const double r_eff0 = rc.params.beta_tilde() * rc.x0.s / rc.params.gamma;
            if (r_eff0 > 0.8 && r_eff0 < 1.25) continue;
            ++done;
            const FinalSizeResult fs = final_size_max_suppression(rc.x0, rc.params);
            CHECK(fs.implicit_residual <= 1e-10);
            const auto sched =
                ControlSchedule::constant(0.0, rc.params.h_max, 0.0, 0.02, 200000);
            const Trajectory traj = integrate(rc.x0, sched, rc.params, 4000.0, 0.02);
            CHECK(std::abs(traj.s.back() - fs.s_inf) <= 1e-3 * fs.s_inf);
        }
    }

    SUBCASE("rejects i0 = 0") {
        CHECK_THROWS_AS(final_size_max_suppression({1.0, 0.0, 0.0, 0.0}, p), ValidationError);
    }
}

TEST_CASE("final size upper bound") {
    const ModelParams p = baseline_params();

    SUBCASE("tight at maximal suppression") {
        const auto sched = ControlSchedule::constant(0.0, p.h_max, 0.0, 0.01, 400000);
        const Trajectory traj = integrate(baseline_x0(), sched, p, 4000.0, 0.01);
        const FinalSizeBound fb = final_size_upper_bound(traj, p);
        CHECK(fb.truncation_safe);
        CHECK(traj.s.back() <= fb.bound + 1e-6);
        CHECK(std::abs(fb.bound - traj.s.back()) <= 1e-4);
    }
    SUBCASE("no infection leaves the bound at s0") {
        const auto sched = ControlSchedule::constant(0.0, 0.0, 0.0, 0.01, 1000);
        const Trajectory traj = integrate({1.0, 0.0, 0.0, 0.0}, sched, p, 10.0, 0.01);
        const FinalSizeBound fb = final_size_upper_bound(traj, p);
        CHECK(fb.bound == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(traj.s.back() == 1.0);
    }
    SUBCASE("bound direction on a generic run") {
        const auto sched = ControlSchedule::constant(0.02, 0.1, 0.0, 0.01, 200000);
        const Trajectory traj = integrate(baseline_x0(), sched, p, 2000.0, 0.01);
        const FinalSizeBound fb = final_size_upper_bound(traj, p);
        CHECK(traj.s.back() <= fb.bound + 1e-6);
    }
}

TEST_CASE("effective reproduction number") {
    const ModelParams p = baseline_params();
    CHECK(r_eff({0.9, 0.0, 0.0, 0.1}, 0.0, p) == doctest::Approx(4.5).epsilon(1e-12));
    const double s_threshold = p.gamma / (p.beta - 0.1);
    CHECK(r_eff({s_threshold, 0.0, 0.0, 1.0 - s_threshold}, 0.1, p) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r_eff({0.0, 0.0, 0.0, 1.0}, 0.1, p) == 0.0);
    CHECK_THROWS_AS(r_eff({0.5, 0.0, 0.0, 0.5}, 0.5, p), ValidationError);
}

TEST_CASE("boundary maintenance feedback") {
    const ModelParams p = baseline_params();

    SUBCASE("window edges") {
        const auto lower = boundary_maintenance_control(0.2, p); // s = gamma/beta
        CHECK(lower.h == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(lower.admissible);
        const auto upper = boundary_maintenance_control(1.0 / 3.0, p);
        CHECK(upper.h == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(upper.admissible);
        const auto outside = boundary_maintenance_control(0.5, p);
        CHECK(outside.h == 0.2); // clamped from 0.3
        CHECK(!outside.admissible);
        CHECK_THROWS_AS(boundary_maintenance_control(0.0, p), ValidationError);
    }

    SUBCASE("quasi-steady regime pins the rhs") {
        // e = gamma i_max / sigma and h = h_bm make di/dt and de/dt vanish
        const double s = 0.25;
        const EpidemicState x{s, p.gamma * p.i_max / p.sigma, p.i_max,
                              1.0 - s - p.gamma * p.i_max / p.sigma - p.i_max};
        const auto bm = boundary_maintenance_control(s, p);
        CHECK(bm.admissible);
        const auto d = seir_rhs(x, 0.0, bm.h, p);
        CHECK(std::abs(d[1]) <= 1e-15);
        CHECK(std::abs(d[2]) <= 1e-15);
        CHECK(r_eff(x, bm.h, p) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("closed-loop run holds the capacity level") {
        EpidemicState x0{0.32, p.gamma * p.i_max / p.sigma, p.i_max, 0.0};
        x0.r = 1.0 - x0.s - x0.e - x0.i;
        const Trajectory traj = integrate_boundary_feedback(x0, p, 10.0, 0.01);
        for (std::size_t k = 0; k < traj.samples(); ++k) {
            CHECK(std::abs(traj.i[k] - p.i_max) <= 1e-9);
            CHECK(std::abs(r_eff(traj.state_at(k), traj.h[k], p) - 1.0) <= 1e-9);
        }
        // s declines linearly at rate gamma i_max while on the boundary
        CHECK(traj.s.back() ==
              doctest::Approx(x0.s - p.gamma * p.i_max * 10.0).epsilon(1e-9));
    }
}

TEST_CASE("time-free representation residual") {
    const ModelParams p = baseline_params();

    SUBCASE("no-control run") {
        const auto sched = ControlSchedule::constant(0.0, 0.0, 0.0, 0.01, 20000);
        const Trajectory traj = integrate(baseline_x0(), sched, p, 200.0, 0.01);
        CHECK(time_free_residual(traj, p) <= 1e-4);
    }
    SUBCASE("mixed-control run") {
        const auto sched = ControlSchedule::constant(0.03, 0.15, 0.0, 0.01, 20000);
        const Trajectory traj = integrate(baseline_x0(), sched, p, 200.0, 0.01);
        CHECK(time_free_residual(traj, p) <= 1e-4);
    }
    SUBCASE("single cell with nearly constant i matches the closed form") {
        // e = gamma i / sigma freezes i to second order over one short cell
        EpidemicState x0{0.9, p.gamma * 0.05 / p.sigma, 0.05, 0.0};
        x0.r = 1.0 - x0.s - x0.e - x0.i;
        const double u = 0.02, h = 0.1, dt = 0.01;
        const auto sched = ControlSchedule::constant(u, h, 0.0, dt, 1);
        const Trajectory traj = integrate(x0, sched, p, dt, dt);
        const double s0 = traj.s.front(), s1 = traj.s.back();
        const double i_bar = 0.5 * (traj.i.front() + traj.i.back());
        const double cell_closed =
            (u * (s0 - s1) + p.gamma * i_bar * std::log(s0 / s1)) /
            ((p.beta - h) * i_bar + u);
        const double drop = (x0.s + x0.e + x0.i) - (traj.s.back() + traj.e.back() + traj.i.back());
        CHECK(std::abs(drop - cell_closed) <= 1e-8);
        CHECK(time_free_residual(traj, p) <= 1e-8);
    }
    SUBCASE("degenerate drain is rejected") {
        Trajectory traj;
        traj.times = {0.0, 1.0};
        traj.s = {0.9, 0.9};
        traj.e = {0.0, 0.0};
        traj.i = {0.0, 0.0};
        traj.r = {0.1, 0.1};
        traj.u = {0.0, 0.0};
        traj.h = {0.0, 0.0};
        CHECK_THROWS_AS(time_free_residual(traj, p), NumericError);
    }
}
