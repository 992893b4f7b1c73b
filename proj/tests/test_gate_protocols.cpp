#include <doctest.h>

#include <cmath>

#include <gsl/gsl_fit.h>

#include "qcav/gate_protocols.hpp"

using namespace qcav;

namespace {

RunConfig chi3_gate(double chi3) {
    RunConfig c;
    c.system.gamma_l = 1e-5;
    c.system.chi3 = chi3;
    c.dt = two_photon_dt(c.system);
    return c;
}

RunConfig chi2_gate() {
    RunConfig c;
    c.system.nonlinearity = NonlinearityKind::Chi2Shg;
    c.system.gamma = 6.0;
    c.system.gamma_l = 0.0;
    c.system.chi2 = 0.089;
    c.dt = two_photon_dt(c.system);
    return c;
}

}  // namespace

TEST_CASE("wrap_phase maps into (-pi, pi]") {
    CHECK(wrap_phase(0.0) == 0.0);
    CHECK(wrap_phase(M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_phase(-M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_phase(3 * M_PI / 2) == doctest::Approx(-M_PI / 2));
    CHECK(wrap_phase(-7.0) == doctest::Approx(-7.0 + 2 * M_PI));
}

TEST_CASE("two-photon step rule") {
    SystemConfig s;
    s.gamma = 6.0;
    CHECK(two_photon_dt(s) == doctest::Approx(0.01));
    s.gamma = 30.0;
    CHECK(two_photon_dt(s) * s.rates().big_gamma <= 0.5);
}

TEST_CASE("no Kerr shift, no gate phase") {
    RunConfig c = chi3_gate(0.0);
    const double coarse = std::abs(run_gate(c).report.delta_theta);
    c.dt *= 0.5;
    const GateReport fine = run_gate(c).report;
    CHECK(std::abs(fine.delta_theta) < coarse / 8.0);
    CHECK(std::abs(fine.delta_theta) < 1e-5);
    CHECK(fine.f2 == doctest::Approx(fine.f1 * fine.f1).epsilon(1e-6));
    CHECK_THROWS_AS(find_store_time(chi3_gate(0.0)), StoreTimeNotFound);
}

TEST_CASE("gate phase grows linearly with storage time") {
    RunConfig c = chi3_gate(0.05);
    std::vector<double> t, phase;
    double prev = 0.0;
    for (double ts : {20.0, 35.0, 50.0, 65.0, 80.0}) {
        c.schedule.t_store = ts;
        const double d = run_gate(c).report.delta_theta;
        const double unwrapped = phase.empty() ? d : prev + wrap_phase(d - prev);
        t.push_back(ts);
        phase.push_back(unwrapped);
        prev = unwrapped;
    }
    double c0, c1, cov00, cov01, cov11, sumsq;
    gsl_fit_linear(t.data(), 1, phase.data(), 1, t.size(), &c0, &c1, &cov00, &cov01, &cov11, &sumsq);
    CHECK(std::abs(c1) == doctest::Approx(0.5 * c.system.rates().chi3).epsilon(1e-4));
    CHECK(sumsq < 1e-10);
}

TEST_CASE("store time halves its excess when chi3 doubles") {
    const double t05 = find_store_time(chi3_gate(0.05)).t_store;
    const StoreTimeResult r10 = find_store_time(chi3_gate(0.1));
    const double t20 = find_store_time(chi3_gate(0.2)).t_store;
    CHECK(std::abs(wrap_phase(r10.report.delta_theta - M_PI)) < 2e-3);
    CHECK(t20 < r10.t_store);
    CHECK(r10.t_store < t05);
    const double overhead = 2.0 * r10.t_store - t05;
    CHECK(t20 - overhead == doctest::Approx(0.5 * (r10.t_store - overhead)).epsilon(1e-2));
}

TEST_CASE("chi2 flip time") {
    SystemConfig s;
    s.chi2 = 0.089;
    CHECK(chi2_flip_store_time(s) == doctest::Approx(M_PI / (std::sqrt(2.0) * s.rates().chi2)));
    s.chi2 = 0.0;
    CHECK_THROWS(chi2_flip_store_time(s));
}

TEST_CASE("one SHG flip gives a pi phase, two give none") {
    RunConfig c = chi2_gate();
    c.schedule.t_store = chi2_flip_store_time(c.system);
    CHECK(std::abs(wrap_phase(run_gate(c).report.delta_theta - M_PI)) < 1e-3);
    c.schedule.t_store = 2.0 * chi2_flip_store_time(c.system);
    CHECK(std::abs(run_gate(c).report.delta_theta) < 1e-3);
}

TEST_CASE("chi2 gate reproduces the quoted fidelity") {
    RunConfig c = chi2_gate();
    c.system.gamma_l = 1.5e-4;
    c.schedule.t_store = chi2_flip_store_time(c.system);
    const GateReport r = run_gate_chi2(c);
    CHECK(r.eta == doctest::Approx(0.9963).epsilon(1e-3));
    CHECK(r.f2 == doctest::Approx(0.991).epsilon(5e-3));
    CHECK_THROWS(run_gate_chi3(c));
}

TEST_CASE("Pi parametrization") {
    PiParametrization p;
    p.t_pi_end = 10.0;
    p.edge = 1.0;
    p.coefficients.assign(PiParametrization::kBumps, cd{1.0, 0.0});
    CHECK(std::abs(p.value(0.0)) < 1e-15);
    CHECK(std::abs(p.value(5.0)) < 1e-15);
    CHECK(std::abs(p.value(10.0)) < 1e-15);
    CHECK(std::abs(p.value(0.2)) == doctest::Approx(1.0));
    CHECK(std::abs(p.value(9.8)) == doctest::Approx(1.0));
}

TEST_CASE("emitter objective limits") {
    SystemConfig s;
    s.nonlinearity = NonlinearityKind::TwoLevelEmitter;
    s.gamma_l = 0.0;

    PiParametrization zero = seed_pi_control(s);
    std::fill(zero.coefficients.begin(), zero.coefficients.end(), cd{});
    const TleObjective idle = evaluate_pi_control(zero, s);
    CHECK(idle.p1 == doctest::Approx(1.0));
    CHECK(idle.p2 == doctest::Approx(1.0));
    CHECK(idle.j == doctest::Approx(1.0).epsilon(1e-9));

    PiWeights no_phase;
    no_phase.w3 = 0.0;
    const PiOptimization stay = optimize_pi_control(s, zero, no_phase, 200);
    CHECK(stay.objective.j < 1e-12);
    for (const auto& c : stay.best.coefficients) CHECK(std::abs(c) < 1e-12);

    SystemConfig off = s;
    off.g_tle = 0.0;
    const PiOptimization none = optimize_pi_control(off, seed_pi_control(s), {}, 200);
    CHECK_FALSE(none.converged);

    SystemConfig chi3 = s;
    chi3.nonlinearity = NonlinearityKind::Chi3;
    CHECK_THROWS(optimize_pi_control(chi3, seed_pi_control(s)));
}
