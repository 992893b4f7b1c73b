#pragma once

// Reference computations that share no code path with the library engines.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qcav/control_synthesis.hpp"
#include "qcav/gate_protocols.hpp"

namespace oracle {

using cd = std::complex<double>;
inline const cd kI{0.0, 1.0};

// Cavity amplitude driven by a Gaussian photon A exp(-a (t-c)^2) and decaying
// at rate k = Gamma/2, for a pulse that starts far in the past.
inline double cavity_response(double t, double gamma, double big_gamma, double amp, double a, double c) {
    const double k = 0.5 * big_gamma;
    const double u = t - c;
    const double z = std::sqrt(a) * (k / (2.0 * a) - u);
    return std::sqrt(gamma) * amp * 0.5 * std::sqrt(M_PI / a) * std::exp(-k * u + k * k / (4.0 * a)) * std::erfc(z);
}

// |1_j 1_k| sector norm of the symmetrized product state on a bin grid.
inline double pair_input_norm(const std::vector<cd>& xi, double dt) {
    double s = 0.0, q = 0.0;
    for (std::size_t k = 1; k < xi.size(); ++k) {
        s += std::norm(xi[k]) * dt;
        q += std::pow(std::norm(xi[k]), 2) * dt * dt;
    }
    return s * s - q;
}

// Residual of the storage-mode equation when psi10 is prescribed analytically.
// psi01 follows algebraically from the loading-mode equation and is
// differentiated with a five-point stencil on points where the window is flat.
struct ResidualInput {
    std::function<cd(double)> psi10;
    std::function<cd(double)> psi10_dot;
    std::function<cd(double)> drive;
    const qcav::SampledSignal* lambda = nullptr;
    const qcav::SampledSignal* window = nullptr;
};

struct ResidualResult {
    double max_residual = 0.0;
    std::size_t points = 0;
};

inline ResidualResult storage_residual(const ResidualInput& in, const qcav::Rates& r) {
    const auto& lam = *in.lambda;
    const std::size_t n = lam.size();
    const double dt = lam.grid.dt;
    std::vector<cd> p01(n);
    std::vector<bool> ok(n, false);
    auto xpm = [&](std::size_t k) { return r.xpm ? 2.0 * std::abs(lam[k]) : 0.0; };
    for (std::size_t k = 0; k < n; ++k) {
        if ((*in.window)[k].real() < 1.0 - 1e-15 || std::abs(lam[k]) == 0.0) continue;
        const double t = lam.grid.time(k);
        const cd lhs = in.psi10_dot(t) + (kI * (r.delta_a + xpm(k)) + 0.5 * r.big_gamma) * in.psi10(t) -
                       std::sqrt(r.gamma) * in.drive(t);
        p01[k] = lhs / (-kI * std::conj(lam[k]));
        ok[k] = true;
    }
    ResidualResult res;
    for (std::size_t k = 2; k + 2 < n; ++k) {
        if (!(ok[k - 2] && ok[k - 1] && ok[k] && ok[k + 1] && ok[k + 2])) continue;
        const cd d = (-p01[k + 2] + 8.0 * p01[k + 1] - 8.0 * p01[k - 1] + p01[k - 2]) / (12.0 * dt);
        const cd e = d + (kI * (r.delta_b + xpm(k)) + 0.5 * r.gamma_l) * p01[k] + kI * lam[k] * in.psi10(lam.grid.time(k));
        res.max_residual = std::max(res.max_residual, std::abs(e));
        ++res.points;
    }
    return res;
}

struct ResidualPair {
    ResidualResult absorb;
    ResidualResult emit;
};

inline ResidualPair control_residuals(const qcav::RunConfig& cfg) {
    const qcav::SinglePhotonRun run = qcav::run_single(cfg);
    const qcav::Rates r = cfg.system.rates();
    const double sg = std::sqrt(r.gamma);
    const qcav::GaussianSpec gi{cfg.system.tau_g, cfg.schedule.t_in};
    const qcav::GaussianSpec go{cfg.system.tau_g, cfg.schedule.t_out()};
    const double a = std::sqrt(run.emission.control.eta);

    ResidualPair out;
    out.absorb = storage_residual({[&](double t) { return cd{gi.value(t) / sg}; },
                                   [&](double t) { return cd{gi.derivative(t) / sg}; },
                                   [&](double t) { return cd{gi.value(t)}; }, &run.absorption.control.combined,
                                   &run.absorption.aux.window},
                                  r);
    out.emit = storage_residual({[&](double t) { return cd{-a * go.value(t) / sg}; },
                                 [&](double t) { return cd{-a * go.derivative(t) / sg}; },
                                 [](double) { return cd{}; }, &run.emission.control.combined,
                                 &run.emission.aux.window},
                                r);
    return out;
}

// Forward RK4 of the two pump amplitudes driven by the backed-out inputs;
// returns max |chi3 conj(alpha2) alpha1 - Lambda| / max |Lambda|.
inline double pump_round_trip_error(const qcav::ControlSolution& lam, double chi3, double gamma_p, double big_gamma_p) {
    const qcav::PumpDrive p = qcav::pump_backout(lam, chi3, gamma_p, big_gamma_p);
    const auto& g = lam.combined.grid;
    const std::size_t n = g.n_points;
    std::vector<cd> u1(n), u2(n);
    for (std::size_t k = 0; k < n; ++k) {
        u1[k] = std::sqrt(gamma_p) * p.q[k].real() * std::exp(kI * p.psi1[k].real());
        u2[k] = std::sqrt(gamma_p) * p.q[k].real() * std::exp(kI * p.psi2[k].real());
    }
    // Midpoint drive from a cubic through four neighbours.
    auto mid = [](const std::vector<cd>& v, std::size_t k) {
        const std::size_t n = v.size();
        if (k == 0 || k + 2 >= n) return 0.5 * (v[k] + v[k + 1]);
        return (-v[k - 1] + 9.0 * v[k] + 9.0 * v[k + 1] - v[k + 2]) / 16.0;
    };
    using V = Eigen::Matrix<cd, 2, 1>;
    auto f = [&](const V& a, cd d1, cd d2) {
        const cd nl = -0.5 * big_gamma_p - kI * chi3 * (std::norm(a(0)) + std::norm(a(1)));
        V o;
        o << nl * a(0) + d1, nl * a(1) + d2;
        return o;
    };
    V a;
    a << p.r_alpha[0].real() * std::exp(kI * p.phi1[0].real()), p.r_alpha[0].real() * std::exp(kI * p.phi2[0].real());
    const double h = g.dt;
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        err = std::max(err, std::abs(chi3 * std::conj(a(1)) * a(0) - lam.combined[k]));
        scale = std::max(scale, std::abs(lam.combined[k]));
        if (k + 1 == n) break;
        const cd m1 = mid(u1, k), m2 = mid(u2, k);
        const V k1 = f(a, u1[k], u2[k]);
        const V k2 = f(a + 0.5 * h * k1, m1, m2);
        const V k3 = f(a + 0.5 * h * k2, m1, m2);
        const V k4 = f(a + h * k3, u1[k + 1], u2[k + 1]);
        a += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return err / scale;
}

// Smooth complex test control on [0, 10].
inline qcav::ControlSolution smooth_control(double dt) {
    const qcav::TimeGrid g{0.0, dt, static_cast<std::size_t>(std::lround(10.0 / dt)) + 1};
    qcav::ControlSolution c;
    c.combined = qcav::SampledSignal(g);
    for (std::size_t k = 0; k < g.n_points; ++k) {
        const double t = g.time(k);
        c.combined[k] = (0.5 + 0.3 * std::exp(-(t - 5.0) * (t - 5.0))) * std::exp(kI * (0.4 * std::sin(t) + 0.1 * t));
    }
    return c;
}

// Largest deviation of a sampled population from its closed form.
inline double max_deviation(const std::vector<double>& sampled, const std::function<double(double)>& exact,
                            double dt) {
    double m = 0.0;
    for (std::size_t k = 0; k < sampled.size(); ++k)
        m = std::max(m, std::abs(sampled[k] - exact(static_cast<double>(k) * dt)));
    return m;
}

// Vacuum Rabi oscillation between mode c and the emitter, Pi = 0.
inline std::vector<double> tle_vacuum_rabi(const qcav::Rates& r, double t_end, double dt) {
    qcav::TleVector y = qcav::TleVector::Zero();
    y(1) = 1.0;
    std::vector<double> pe{0.0};
    const auto steps = static_cast<std::size_t>(std::lround(t_end / dt));
    for (std::size_t n = 0; n < steps; ++n) {
        y = qcav::propagate_tle(y, [](double) { return cd{}; }, dt, dt, r);
        pe.push_back(std::norm(y(2)));
    }
    return pe;
}

// |psi02|^2 for two photons in mode b exchanging with one in mode c.
inline std::vector<double> shg_flip(const qcav::SystemConfig& sys, double t_end, double dt) {
    const auto n = static_cast<std::size_t>(std::lround(t_end / dt)) + 1;
    const qcav::Drive d = qcav::make_drive(qcav::plain_timeline(n, dt), std::vector<cd>(n), std::vector<cd>(n));
    const auto a = qcav::propagate_shg(d, sys, {cd{}, cd{}, cd{1.0}, cd{}});
    return a.psi020.abs2();
}

}  // namespace oracle
