#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qcav/control_synthesis.hpp"
#include "qcav/errors.hpp"

using namespace qcav;

namespace {

struct Input {
    SampledSignal xi, dxi;
};

Input gaussian_input(const ScheduleSpec& sch, double dt = 0.005) {
    const TimeGrid g{0.0, dt, static_cast<std::size_t>(std::llround(2.0 * sch.t_in / dt)) + 1};
    const GaussianSpec s{1.0, sch.t_in};
    return {gaussian(s, g), gaussian_derivative(s, g)};
}

TimeGrid emission_grid(const ScheduleSpec& sch, double dt = 0.005) {
    return TimeGrid{sch.emit_start(), dt, static_cast<std::size_t>(std::llround(2.0 * sch.tau_o / dt)) + 1};
}

SystemConfig with(NonlinearityKind kind, double gamma, double gamma_l) {
    SystemConfig s;
    s.nonlinearity = kind;
    s.gamma = gamma;
    s.gamma_l = gamma_l;
    s.chi2 = 0.089;
    return s;
}

}  // namespace

TEST_CASE("absorption f is independent of the nonlinearity") {
    const ScheduleSpec sch;
    const Input in = gaussian_input(sch);
    const Synthesis a3 = absorb_chi3(in.xi, with(NonlinearityKind::Chi3, 30, 0), sch, &in.dxi);
    const Synthesis a2 = absorb_chi2(in.xi, with(NonlinearityKind::Chi2Shg, 30, 0), sch, &in.dxi);
    for (std::size_t k = 0; k < in.xi.size(); ++k) CHECK(std::abs(a3.aux.f[k] - a2.aux.f[k]) < 1e-14);
}

TEST_CASE("chi2 absorption is feasible earlier than chi3") {
    const ScheduleSpec sch;
    const Input in = gaussian_input(sch);
    const Synthesis a3 = absorb_chi3(in.xi, with(NonlinearityKind::Chi3, 10, 0), sch, &in.dxi);
    const Synthesis a2 = absorb_chi2(in.xi, with(NonlinearityKind::Chi2Shg, 10, 0), sch, &in.dxi);
    CHECK(a2.aux.first_feasible < a3.aux.first_feasible);
}

TEST_CASE("real input gives a zero chi2 absorption phase") {
    const ScheduleSpec sch;
    const Input in = gaussian_input(sch);
    const Synthesis a = absorb_chi2(in.xi, with(NonlinearityKind::Chi2Shg, 6, 1.5e-4), sch, &in.dxi);
    for (std::size_t k = 0; k < in.xi.size(); ++k)
        if (std::abs(a.control.combined[k]) > 0.0) CHECK(std::abs(a.control.phase[k].real()) < 1e-12);
}

TEST_CASE("critically coupled rising exponential needs no control") {
    const SystemConfig sys = with(NonlinearityKind::Chi3, 2, 0);
    const double rate = 0.5 * sys.rates().gamma;
    const TimeGrid g{0.0, 0.001, 1001};
    SampledSignal xi(g), dxi(g);
    for (std::size_t k = 0; k < g.n_points; ++k) {
        xi[k] = 0.1 * std::exp(rate * g.time(k));
        dxi[k] = rate * xi[k];
    }
    const Synthesis a = absorb_chi3(xi, sys, ScheduleSpec{}, &dxi);
    for (std::size_t k = 0; k < g.n_points; ++k) {
        CHECK(std::abs(a.aux.f[k]) < 1e-12);
        CHECK(std::abs(a.control.combined[k]) < 1e-12);
    }
}

TEST_CASE("Gronwall bound") {
    const ScheduleSpec sch;
    const Input in = gaussian_input(sch);
    const double g = SystemConfig{}.rates().gamma;
    CHECK_FALSE(gronwall_bound_holds(in.xi, g));

    const FeasibilityReport rep = feasibility_profile(in.xi, with(NonlinearityKind::Chi3, 30, 0), &in.dxi);
    std::size_t first = rep.profile.size();
    for (std::size_t k = 0; k < rep.profile.size(); ++k)
        if (rep.profile[k].real() > 0.0) {
            first = k;
            break;
        }
    REQUIRE(first < rep.profile.size());
    CHECK(rep.profile.time(first) < 0.3 * sch.t_in);
    for (std::size_t k = first; k < rep.profile.size(); ++k) CHECK(rep.profile[k].real() > 0.0);

    SampledSignal step(in.xi.grid, std::vector<cd>(in.xi.size(), 1.0));
    CHECK_FALSE(gronwall_bound_holds(step, g));
}

TEST_CASE("lossless full storage emits 1 - eps") {
    const ScheduleSpec sch;
    const GaussianSpec target{1.0, sch.t_out()};
    const double eta = emission_efficiency(target, emission_grid(sch), with(NonlinearityKind::Chi2Shg, 30, 0), sch, 1.0);
    CHECK(eta == doctest::Approx(1.0 - sch.eps_eta).epsilon(1e-12));
}

TEST_CASE("efficiency decreases with loss and chi2 allows more than chi3") {
    const ScheduleSpec sch;
    const GaussianSpec target{1.0, sch.t_out()};
    const TimeGrid g = emission_grid(sch);
    double prev = 2.0;
    for (double gl : {1e-4, 1e-3, 1e-2, 1e-1}) {
        const double eta = emission_efficiency(target, g, with(NonlinearityKind::Chi2Shg, 6, gl), sch, 1.0);
        CHECK(eta < prev);
        prev = eta;
    }
    for (double gl : {0.0, 1e-2}) {
        const double e2 = emission_efficiency(target, g, with(NonlinearityKind::Chi2Shg, 10, gl), sch, 0.9);
        const double e3 = emission_efficiency(target, g, with(NonlinearityKind::Chi3, 10, gl), sch, 0.9);
        CHECK(e2 >= e3);
    }
}

TEST_CASE("emission needs a stored photon") {
    const ScheduleSpec sch;
    const GaussianSpec target{1.0, sch.t_out()};
    CHECK_THROWS_AS(synthesize_emission(target, emission_grid(sch), with(NonlinearityKind::Chi3, 30, 0), sch, cd{}),
                    InfeasibleError);
}

TEST_CASE("stored phase shifts the emission phase uniformly") {
    const ScheduleSpec sch;
    const GaussianSpec target{1.0, sch.t_out()};
    const SystemConfig sys = with(NonlinearityKind::Chi3, 30, 5e-3);
    const cd psi0{0.95, 0.0};
    const double beta = 0.7;
    const Synthesis a = synthesize_emission(target, emission_grid(sch), sys, sch, psi0);
    const Synthesis b = synthesize_emission(target, emission_grid(sch), sys, sch, psi0 * std::polar(1.0, beta));
    for (std::size_t k = 0; k < a.control.combined.size(); ++k) {
        const cd la = a.control.combined[k], lb = b.control.combined[k];
        CHECK(std::abs(std::abs(la) - std::abs(lb)) < 1e-10 * std::max(1.0, std::abs(la)));
        if (std::abs(la) > 1e-6) CHECK(std::abs(std::arg(lb / la) - beta) < 1e-9);
    }
}

// A real positive output from a stored amplitude psi0 needs
// -i exp(-i phi) psi0 < 0 at the start, so Lambda exp(-i(arg psi0 + pi/2))
// is real and follows the sign of f_o.
TEST_CASE("real chi2 target gives a real rotated emission control") {
    const ScheduleSpec sch;
    const GaussianSpec target{1.0, sch.t_out()};
    for (double beta : {0.0, 1.1}) {
        const Synthesis e = synthesize_emission(target, emission_grid(sch), with(NonlinearityKind::Chi2Shg, 6, 1.5e-4),
                                                sch, std::polar(0.99, beta));
        const cd rot = std::polar(1.0, -(beta + M_PI / 2));
        for (std::size_t k = 0; k < e.control.combined.size(); ++k) {
            const cd v = e.control.combined[k] * rot;
            CHECK(std::abs(v.imag()) <= 1e-12 * std::max(1.0, std::abs(v)));
            CHECK(v.real() * e.aux.f[k].real() >= 0.0);
        }
    }
}

TEST_CASE("lossless emission mirrors absorption") {
    ScheduleSpec sch;
    const SystemConfig sys = with(NonlinearityKind::Chi2Shg, 30, 0);
    const Input in = gaussian_input(sch);
    const Synthesis a = absorb(in.xi, sys, sch, &in.dxi);
    const Synthesis e = synthesize_emission({1.0, sch.t_out()}, emission_grid(sch), sys, sch, cd{1.0, 0.0});
    const double dt = in.xi.grid.dt;
    double worst = 0.0, peak = 0.0;
    for (std::size_t k = 0; k < e.control.combined.size(); ++k) {
        const double s = e.control.combined.time(k) - sch.t_out();
        const auto j = static_cast<long>(std::llround((sch.t_in - s) / dt));
        if (j < 0 || j >= static_cast<long>(in.xi.size())) continue;
        const double la = std::abs(a.control.combined[static_cast<std::size_t>(j)]);
        const double le = std::abs(e.control.combined[k]);
        if (a.aux.window[static_cast<std::size_t>(j)].real() < 1.0 || e.aux.window[k].real() < 1.0) continue;
        if (la > 10.0 || le > 10.0) continue;
        worst = std::max(worst, std::abs(la - le));
        peak = std::max(peak, la);
    }
    CHECK(peak > 1.0);
    CHECK(worst < 1e-2 * peak);
}

TEST_CASE("pump back-out steady states") {
    const TimeGrid g{0.0, 0.01, 501};
    ControlSolution c;
    c.combined = SampledSignal(g, std::vector<cd>(g.n_points, std::polar(0.8, 0.4)));
    const double chi3 = 0.5;

    const PumpDrive lossless = pump_backout(c, chi3, 1.0, 0.0);
    for (std::size_t k = 0; k < g.n_points; ++k) CHECK(std::abs(lossless.q[k]) < 1e-10);

    const double gp = 1.5, big = 2.0;
    const PumpDrive lossy = pump_backout(c, chi3, gp, big);
    for (std::size_t k = 0; k < g.n_points; ++k) {
        CHECK(lossy.q[k].real() == doctest::Approx(0.5 * big * lossy.r_alpha[k].real() / std::sqrt(gp)));
        CHECK(std::remainder(lossy.psi1[k].real() - lossy.psi2[k].real() - 0.4, 2 * M_PI) ==
              doctest::Approx(0.0).epsilon(1e-10));
    }
}

TEST_CASE("pump back-out round trip through the forward equations") {
    CHECK(oracle::pump_round_trip_error(oracle::smooth_control(0.005), 0.3, 2.0, 2.2) < 1e-6);
    CHECK(oracle::pump_round_trip_error(oracle::smooth_control(0.01), 1.0, 0.5, 0.5) < 1e-6);
}
