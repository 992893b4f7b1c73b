#include "qcav/nonlinear_models.hpp"

#include <cmath>

#include "qcav/errors.hpp"
#include "qcav/timeline.hpp"
#include "qcav/two_photon_engine.hpp"

namespace qcav {

namespace {
const cd kI{0.0, 1.0};
}

NonlinearTerms linear_terms() { return {}; }

NonlinearTerms chi3_terms(double chi3) {
    if (chi3 < 0.0) throw ConfigError("chi3 must be non-negative");
    NonlinearTerms t;
    t.shift20 = -kI * (0.5 * chi3);
    t.shift11 = -kI * chi3;
    t.shift02 = -kI * (0.5 * chi3);
    return t;
}

NonlinearTerms shg_terms(double chi2, double delta_c, double gamma_l) {
    if (chi2 < 0.0) throw ConfigError("chi2 must be non-negative");
    NonlinearTerms t;
    t.has_c_mode = true;
    t.c_diagonal = -(kI * delta_c + 0.5 * gamma_l);
    const cd k = -kI * std::sqrt(2.0) * chi2;
    t.couplings.push_back({2, 3, k});
    t.couplings.push_back({3, 2, k});
    return t;
}

NonlinearTerms terms_for(const SystemConfig& cfg) {
    const Rates r = cfg.rates();
    switch (cfg.nonlinearity) {
        case NonlinearityKind::Chi3: return chi3_terms(r.chi3);
        case NonlinearityKind::Chi2Shg: return shg_terms(r.chi2, r.delta_c, r.gamma_l);
        case NonlinearityKind::TwoLevelEmitter: return chi3_terms(r.chi3);
        case NonlinearityKind::LinearOnly: break;
    }
    return linear_terms();
}

ShgAmplitudes propagate_shg(const Drive& d, const SystemConfig& cfg, const std::array<cd, 4>& init) {
    if (cfg.nonlinearity != NonlinearityKind::Chi2Shg) throw ConfigError("SHG propagation needs nonlinearity = chi2");
    PairInitial p;
    p.two << init[0], init[1], init[2], init[3];
    const auto a = propagate_pair_driven(d, cfg.rates(), terms_for(cfg), p);
    const TimeGrid grid = d.timeline.index_grid();
    return {SampledSignal(grid, a.psi20), SampledSignal(grid, a.psi11), SampledSignal(grid, a.psi02),
            SampledSignal(grid, a.psi001)};
}

TleVector tle_initial_state() {
    TleVector y = TleVector::Zero();
    y(0) = 1.0;
    y(3) = 1.0;
    return y;
}

TleVector tle_rhs(const TleVector& y, cd pi, const Rates& r) {
    const double a = std::abs(pi);
    const cd pc = std::conj(pi);
    const cd g = r.g_tle;
    const cd gc = std::conj(g);
    const double s2 = std::sqrt(2.0);
    const double x2 = r.xpm ? 2.0 * a : 0.0;
    const double x4 = r.xpm ? 4.0 * a : 0.0;
    const double gl = r.gamma_l;
    const double ge = r.gamma_e;
    TleVector d;
    d(0) = -(kI * (r.delta_b + x2) + 0.5 * gl) * y(0) - kI * pc * y(1);
    d(1) = -(kI * (r.delta_c + x2) + 0.5 * gl) * y(1) - kI * pi * y(0) - kI * g * y(2);
    d(2) = -(kI * r.delta_e + 0.5 * ge) * y(2) - kI * gc * y(1);
    d(3) = -(kI * (2.0 * r.delta_b + r.chi3 + x4) + gl) * y(3) - kI * s2 * pc * y(4);
    d(4) = -(kI * (r.delta_b + r.delta_c + r.chi3 + x4) + gl) * y(4) - kI * s2 * pi * y(3) - kI * s2 * pc * y(5) -
           kI * g * y(6);
    d(5) = -(kI * (2.0 * r.delta_c + r.chi3 + x4) + gl) * y(5) - kI * s2 * pi * y(4) - kI * s2 * g * y(7);
    d(6) = -(kI * (r.delta_b + r.delta_e + x2) + 0.5 * (ge + gl)) * y(6) - kI * pc * y(7) - kI * gc * y(4);
    d(7) = -(kI * (r.delta_c + r.delta_e + x2) + 0.5 * (ge + gl)) * y(7) - kI * pi * y(6) - kI * s2 * gc * y(5);
    return d;
}

TleVector propagate_tle(const TleVector& y0, const std::function<cd(double)>& pi, double t_end, double dt,
                        const Rates& r) {
    if (!(dt > 0.0) || !(t_end >= 0.0)) throw ConfigError("invalid TLE stage duration or step");
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    const double h = steps ? t_end / static_cast<double>(steps) : 0.0;
    auto rhs = [&](const TleVector& y, cd p, cd) { return tle_rhs(y, p, r); };
    TleVector y = y0;
    cd p0 = pi(0.0);
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * h;
        const cd ph = pi(t + 0.5 * h);
        const cd p1 = pi(static_cast<double>(n + 1) * h);
        y = rk4_step(y, h, rhs, p0, cd{}, ph, cd{}, p1, cd{});
        p0 = p1;
    }
    return y;
}

TleStageState propagate_tle_stage(const TleVector& y0, const SampledSignal& pi, const SystemConfig& cfg) {
    if (cfg.nonlinearity != NonlinearityKind::TwoLevelEmitter)
        throw ConfigError("TLE stage propagation needs nonlinearity = tle");
    const Rates r = cfg.rates();
    const auto half = half_step_values(pi.values);
    auto rhs = [&](const TleVector& y, cd p, cd) { return tle_rhs(y, p, r); };
    const std::size_t n = pi.size();
    TleStageState s;
    for (auto* v : {&s.phi10g, &s.phi01g, &s.phi00e, &s.phi20g, &s.phi11g, &s.phi02g, &s.phi10e, &s.phi01e})
        *v = SampledSignal(pi.grid);
    TleVector y = y0;
    auto store = [&](std::size_t k) {
        s.phi10g[k] = y(0);
        s.phi01g[k] = y(1);
        s.phi00e[k] = y(2);
        s.phi20g[k] = y(3);
        s.phi11g[k] = y(4);
        s.phi02g[k] = y(5);
        s.phi10e[k] = y(6);
        s.phi01e[k] = y(7);
    };
    store(0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        y = rk4_step(y, pi.grid.dt, rhs, pi[k], cd{}, half[k], cd{}, pi[k + 1], cd{});
        store(k + 1);
    }
    return s;
}

}  // namespace qcav
