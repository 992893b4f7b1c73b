#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qcav/discrete_oracle.hpp"
#include "qcav/errors.hpp"

using namespace qcav;

namespace {

std::vector<cd> bins(const TimeFunction& f, std::size_t n, double dt) {
    std::vector<cd> v(n + 1);
    for (std::size_t k = 0; k <= n; ++k) v[k] = f(static_cast<double>(k) * dt);
    return v;
}

}  // namespace

TEST_CASE("decoupled bins pass through") {
    SystemConfig s;
    s.gamma = 0.0;
    const std::size_t n = 200;
    const double dt = 0.05;
    const auto xi = bins([](double t) { return cd{GaussianSpec{1.0, 5.0}.value(t), 0.0}; }, n, dt);
    const BinState1 out = run_single_oracle(xi, std::vector<cd>(n + 1), dt, s.rates());
    for (std::size_t k = 1; k <= n; ++k) CHECK(out.bin_amps[k] == xi[k] * std::sqrt(dt));
    CHECK(out.sys_amps.squaredNorm() == 0.0);

    const auto lam = bins([](double) { return cd{0.3, 0.1}; }, n, dt);
    const BinState2 pair = run_pair_oracle(xi, lam, dt, s.rates(), chi3_terms(0.5));
    for (std::size_t k = 2; k <= n; k += 7)
        for (std::size_t j = 1; j < k; j += 5) CHECK(std::abs(pair_output(pair, j, k) - xi[j] * xi[k]) < 1e-15);
}

TEST_CASE("single-photon map converges at first order") {
    OracleProblem p = reference_oracle_problem();
    p.system.gamma = 5.0;
    p.system.chi3 = 0.0;
    const ConvergenceReport rep = convergence_report(p.system, p.control, p.xi_in, p.t_end, {100, 200, 400, 800});
    CHECK(rep.order == doctest::Approx(1.0).epsilon(0.2));
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const double ratio = rep.rows[i - 1].output_error / rep.rows[i].output_error;
        CHECK(ratio > 1.6);
        CHECK(ratio < 2.4);
        const double state = rep.rows[i - 1].state_error / rep.rows[i].state_error;
        CHECK(state > 1.6);
        CHECK(state < 2.4);
    }
}

TEST_CASE("shifted indexing converges too, a flipped coupling does not") {
    const OracleProblem p = reference_oracle_problem();
    OracleOptions shifted;
    shifted.literal_indexing = false;
    CHECK(convergence_report(p.system, p.control, p.xi_in, p.t_end, {100, 200, 400}, shifted).order ==
          doctest::Approx(1.0).epsilon(0.2));
    OracleOptions broken;
    broken.corrupt_coupling_sign = true;
    CHECK(convergence_report(p.system, p.control, p.xi_in, p.t_end, {100, 200, 400}, broken).order < 0.5);
}

TEST_CASE("zero input gives zero error") {
    const OracleProblem p = reference_oracle_problem();
    const ConvergenceReport rep =
        convergence_report(p.system, p.control, [](double) { return cd{}; }, p.t_end, {50, 100});
    for (const auto& row : rep.rows) {
        CHECK(row.output_error == 0.0);
        CHECK(row.state_error == 0.0);
    }
    CHECK_THROWS_AS(convergence_report(p.system, p.control, p.xi_in, p.t_end, {200, 100}), ConfigError);
}

TEST_CASE("lossless norm drift per step is second order") {
    const OracleProblem p = reference_oracle_problem();
    const Rates r = p.system.rates();
    auto worst_step = [&](std::size_t n) {
        const double dt = p.t_end / static_cast<double>(n);
        const auto xi = bins(p.xi_in, n, dt);
        const auto lam = bins(p.control, n, dt);
        BinState1 s = make_bin_state1(xi, dt);
        double worst = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            const double before = s.norm();
            s = step_single(s, k, r, xi, lam);
            worst = std::max(worst, std::abs(s.norm() - before));
        }
        return worst;
    };
    const double a = worst_step(200), b = worst_step(400);
    CHECK(a / b == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("pair input norm") {
    const std::size_t n = 64;
    const double dt = 0.1;
    const auto xi = bins([](double t) { return cd{GaussianSpec{1.0, 3.2}.value(t), 0.0}; }, n, dt);
    CHECK(make_bin_state2(xi, dt).norm() == doctest::Approx(oracle::pair_input_norm(xi, dt)).epsilon(1e-13));

    for (std::size_t m : {32, 64, 128}) {
        const double h = 6.0 / static_cast<double>(m);
        auto v = bins([](double t) { return cd{GaussianSpec{3.0, 3.0}.value(t), 0.0}; }, m, h);
        double s = 0.0;
        for (std::size_t k = 1; k <= m; ++k) s += std::norm(v[k]) * h;
        for (auto& x : v) x /= std::sqrt(s);
        CHECK(std::abs(make_bin_state2(v, h).norm() - 1.0) <= 2.0 / static_cast<double>(m));
    }
}

TEST_CASE("pair oracle agrees with the two-photon engine") {
    const OracleProblem p = reference_oracle_problem();
    const PairComparison c64 = compare_pair(p.system, p.control, p.xi_in, p.t_end, 64);
    const PairComparison c128 = compare_pair(p.system, p.control, p.xi_in, p.t_end, 128);
    CHECK(c128.max_error < 0.6 * c64.max_error);
    CHECK(c128.max_error / c128.dt == doctest::Approx(c64.max_error / c64.dt).epsilon(0.3));
}

TEST_CASE("pair memory guard") {
    CHECK_THROWS_AS(make_bin_state2(std::vector<cd>(258, cd{0.01}), 0.01), ConfigError);
    CHECK_NOTHROW(make_bin_state2(std::vector<cd>(257, cd{0.01}), 0.01));
}
