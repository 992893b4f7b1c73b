#include "qcav/control_synthesis.hpp"

#include <algorithm>
#include <cmath>

#include "qcav/errors.hpp"

namespace qcav {

namespace {

constexpr double kDenFloor = 1e-12;

struct Window {
    std::vector<bool> feasible;
    std::vector<double> weight;
    double c1 = 0.0;
    double c2 = 0.0;
    bool interior = false;
};

Window feasibility_window(const std::vector<double>& den, double dt, double tau_e) {
    Window w;
    const std::size_t n = den.size();
    w.feasible.resize(n);
    w.weight.assign(n, 0.0);
    std::size_t first = n, last = n;
    for (std::size_t k = 0; k < n; ++k) {
        w.feasible[k] = den[k] > kDenFloor;
        if (w.feasible[k]) {
            if (first == n) first = k;
            last = k;
        }
    }
    if (first == n) throw InfeasibleError("no real control solution exists anywhere in the window", den);
    for (std::size_t k = first; k <= last; ++k)
        if (!w.feasible[k]) w.interior = true;
    w.c1 = static_cast<double>(first) * dt;
    w.c2 = static_cast<double>(last) * dt;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        w.weight[k] = smoothing_up(t - w.c1 - 0.5 * tau_e, tau_e) * smoothing_down(t - w.c2 + 0.5 * tau_e, tau_e);
    }
    return w;
}

SampledSignal real_signal(const TimeGrid& grid, const std::vector<double>& v) {
    SampledSignal s(grid);
    for (std::size_t k = 0; k < v.size(); ++k) s[k] = v[k];
    return s;
}


// Fourth-order finite differences: five-point centred stencil, one-sided at the ends.
template <class T>
std::vector<T> derivative4(const std::vector<T>& v, double dt) {
    const std::size_t n = v.size();
    std::vector<T> d(n, T{});
    if (n < 5) {
        for (std::size_t k = 0; k + 1 < n; ++k) d[k] = (v[k + 1] - v[k]) / dt;
        if (n > 1) d[n - 1] = d[n - 2];
        return d;
    }
    const double h = 12.0 * dt;
    for (std::size_t k = 2; k + 2 < n; ++k) d[k] = (v[k - 2] - 8.0 * v[k - 1] + 8.0 * v[k + 1] - v[k + 2]) / h;
    auto fwd = [&](std::size_t k, int s) {
        auto at = [&](int j) { return v[static_cast<std::size_t>(static_cast<long>(k) + s * j)]; };
        return static_cast<double>(s) * (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) / h;
    };
    d[0] = fwd(0, 1);
    d[1] = fwd(1, 1);
    d[n - 2] = fwd(n - 2, -1);
    d[n - 1] = fwd(n - 1, -1);
    return d;
}

std::vector<double> cumtrapz(const std::vector<double>& v, double dt) {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t k = 1; k < v.size(); ++k) out[k] = out[k - 1] + 0.5 * dt * (v[k - 1] + v[k]);
    return out;
}

void require_zero_delta_a(const SystemConfig& cfg) {
    if (cfg.delta_a != 0.0) throw ConfigError("closed-form control synthesis requires delta_a = 0");
}

ControlSolution assemble(const TimeGrid& grid, const std::vector<double>& mag, const std::vector<double>& phase) {
    ControlSolution c;
    c.magnitude = real_signal(grid, mag);
    c.phase = real_signal(grid, phase);
    c.combined = SampledSignal(grid);
    for (std::size_t k = 0; k < mag.size(); ++k) c.combined[k] = std::polar(mag[k], phase[k]);
    return c;
}

Synthesis absorb_impl(const SampledSignal& xi, const SystemConfig& cfg, const ScheduleSpec& sched,
                      const SampledSignal* xi_dot, bool kerr) {
    require_zero_delta_a(cfg);
    const Rates r = cfg.rates();
    const SampledSignal dxi = xi_dot ? *xi_dot : derivative(xi);
    const std::size_t n = xi.size();
    const double dt = xi.grid.dt;

    std::vector<double> f(n), a2(n), el(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        el[k] = std::exp(r.gamma_l * t);
        a2[k] = std::norm(xi[k]);
        f[k] = std::real((0.5 * (r.gamma - r.gamma_l) * xi[k] - dxi[k]) * std::conj(xi[k])) * el[k];
    }
    const auto big_f = cumtrapz(f, dt);
    std::vector<double> den(n);
    for (std::size_t k = 0; k < n; ++k) den[k] = 2.0 * big_f[k] - (kerr ? 4.0 * a2[k] * el[k] : 0.0);

    // A critically coupled input (f = 0 throughout) is absorbed passively.
    double f_max = 0.0, flux_max = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        f_max = std::max(f_max, std::abs(f[k]));
        flux_max = std::max(flux_max, r.gamma * a2[k] * el[k]);
    }
    const bool passive = f_max <= 1e-12 * flux_max;
    Window w;
    if (passive) {
        w.feasible.assign(n, false);
        w.weight.assign(n, 0.0);
    } else {
        w = feasibility_window(den, dt, sched.tau_e);
    }
    std::vector<double> mag(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (!w.feasible[k] || a2[k] == 0.0) continue;
        mag[k] = std::abs(f[k]) * std::exp(-0.5 * r.gamma_l * k * dt) / (std::sqrt(a2[k]) * std::sqrt(den[k])) *
                 w.weight[k];
    }

    std::vector<double> g(n, 0.0), theta(n, 0.0), p(n, 0.0);
    if (kerr) {
        std::vector<double> rate(n);
        for (std::size_t k = 0; k < n; ++k) {
            g[k] = -2.0 * mag[k] * a2[k] * el[k];
            rate[k] = -0.5 * g[k] / std::max(big_f[k], kDenFloor);
        }
        theta = cumtrapz(rate, dt);
        p = cumtrapz(mag, dt);
        for (auto& v : p) v *= 2.0;
    }

    std::vector<double> phase(n), x(n), y(n), rr(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double c = std::cos(theta[k]), s = std::sin(theta[k]);
        x[k] = f[k] * c + g[k] * s;
        y[k] = f[k] * s - g[k] * c;
        phase[k] = -r.delta_b * t - p[k] - std::arg(xi[k]) + std::atan2(y[k], x[k]);
        rr[k] = std::sqrt(std::max(2.0 * big_f[k], 0.0));
    }

    Synthesis out;
    out.control = assemble(xi.grid, mag, phase);
    auto& aux = out.aux;
    aux.f = real_signal(xi.grid, f);
    aux.g = real_signal(xi.grid, g);
    aux.theta = real_signal(xi.grid, theta);
    aux.big_f = real_signal(xi.grid, big_f);
    aux.x = real_signal(xi.grid, x);
    aux.y = real_signal(xi.grid, y);
    aux.r = real_signal(xi.grid, rr);
    aux.denominator = real_signal(xi.grid, den);
    aux.window = real_signal(xi.grid, w.weight);
    aux.xpm_phase = real_signal(xi.grid, p);
    aux.first_feasible = w.c1;
    aux.last_feasible = w.c2;
    if (w.interior) aux.diagnostics.emplace_back("feasibility region has interior crossings; windows anchored at the outermost ones");
    if (passive) aux.diagnostics.emplace_back("input is absorbed without control");
    return out;
}

Synthesis emit_impl(const SampledSignal& xi, const SystemConfig& cfg, const ScheduleSpec& sched, cd psi0,
                    const SampledSignal* xi_dot, bool kerr) {
    require_zero_delta_a(cfg);
    if (std::abs(psi0) == 0.0) throw InfeasibleError("nothing stored: psi01 is zero at the start of emission");
    const Rates r = cfg.rates();
    const SampledSignal dxi = xi_dot ? *xi_dot : derivative(xi);
    const std::size_t n = xi.size();
    const double dt = xi.grid.dt;
    const double c2 = r.gamma * std::norm(psi0);

    std::vector<double> f(n), a2(n), el(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = static_cast<double>(k) * dt;
        el[k] = std::exp(r.gamma_l * s);
        a2[k] = std::norm(xi[k]);
        f[k] = std::real((0.5 * r.big_gamma * xi[k] + dxi[k]) * std::conj(xi[k])) * el[k];
    }
    const auto big_f = cumtrapz(f, dt);
    std::vector<double> base(n), den(n);
    for (std::size_t k = 0; k < n; ++k) {
        base[k] = c2 - 2.0 * big_f[k];
        den[k] = base[k] - (kerr ? 4.0 * a2[k] * el[k] : 0.0);
    }
    for (std::size_t k = 0; k < n; ++k)
        if (!(den[k] > kDenFloor))
            throw InfeasibleError("emission denominator not positive at t = " + std::to_string(k * dt) +
                                      " (efficiency too large)",
                                  den);

    const Window w = feasibility_window(den, dt, sched.tau_e);
    std::vector<double> mag(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (a2[k] == 0.0) continue;
        mag[k] = std::abs(f[k]) * std::exp(-0.5 * r.gamma_l * k * dt) / (std::sqrt(a2[k]) * std::sqrt(den[k])) *
                 w.weight[k];
    }

    std::vector<double> g(n, 0.0), theta(n, 0.0), p(n, 0.0);
    if (kerr) {
        std::vector<double> rate(n);
        for (std::size_t k = 0; k < n; ++k) {
            g[k] = -2.0 * mag[k] * a2[k] * el[k];
            rate[k] = -g[k] / std::max(base[k], kDenFloor);
        }
        theta = cumtrapz(rate, dt);
        p = cumtrapz(mag, dt);
        for (auto& v : p) v *= 2.0;
    }

    const double theta0 = std::arg(psi0);
    std::vector<double> phase(n), x(n), y(n), rr(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = static_cast<double>(k) * dt;
        const double c = std::cos(theta[k]), sn = std::sin(theta[k]);
        x[k] = -f[k] * c + g[k] * sn;
        y[k] = -f[k] * sn - g[k] * c;
        phase[k] = -r.delta_b * s - p[k] - std::arg(xi[k]) + theta0 + std::atan2(-x[k], y[k]);
        rr[k] = std::sqrt(std::max(base[k], 0.0));
    }

    Synthesis out;
    out.control = assemble(xi.grid, mag, phase);
    auto& aux = out.aux;
    aux.f = real_signal(xi.grid, f);
    aux.g = real_signal(xi.grid, g);
    aux.theta = real_signal(xi.grid, theta);
    aux.big_f = real_signal(xi.grid, big_f);
    aux.x = real_signal(xi.grid, x);
    aux.y = real_signal(xi.grid, y);
    aux.r = real_signal(xi.grid, rr);
    aux.denominator = real_signal(xi.grid, den);
    aux.window = real_signal(xi.grid, w.weight);
    aux.xpm_phase = real_signal(xi.grid, p);
    aux.c_const = std::sqrt(c2);
    aux.first_feasible = w.c1;
    aux.last_feasible = w.c2;
    return out;
}

bool is_kerr(const SystemConfig& cfg) {
    switch (cfg.nonlinearity) {
        case NonlinearityKind::Chi3: return true;
        case NonlinearityKind::Chi2Shg: return false;
        case NonlinearityKind::TwoLevelEmitter: return true;
        case NonlinearityKind::LinearOnly: break;
    }
    throw ConfigError("no synthesizer for LinearOnly");
}

// Unit-target emission denominator for a trial efficiency.
struct UnitEmission {
    std::vector<double> two_f;
    std::vector<double> edge;
};

UnitEmission unit_emission(const GaussianSpec& target, const TimeGrid& grid, const SystemConfig& cfg, bool kerr) {
    const Rates r = cfg.rates();
    const std::size_t n = grid.n_points;
    std::vector<double> f(n);
    UnitEmission u;
    u.edge.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = static_cast<double>(k) * grid.dt;
        const double t = grid.time(k);
        const double v = target.value(t);
        const double el = std::exp(r.gamma_l * s);
        f[k] = (0.5 * r.big_gamma * v + target.derivative(t)) * v * el;
        if (kerr) u.edge[k] = 4.0 * v * v * el;
    }
    u.two_f = cumtrapz(f, grid.dt);
    for (auto& v : u.two_f) v *= 2.0;
    return u;
}

// The denominator may not dip below half the margin it keeps at the window end.
bool emission_feasible(const UnitEmission& u, double c2, double eps, double eta) {
    const double floor = std::max(kDenFloor, 0.5 * eps * c2);
    for (std::size_t k = 0; k < u.two_f.size(); ++k)
        if (!(c2 - eta * (u.two_f[k] + u.edge[k]) > floor)) return false;
    return true;
}

}  // namespace

bool gronwall_bound_holds(const SampledSignal& xi, double gamma_rate) {
    double u = 0.0;
    const double dt = xi.grid.dt;
    for (std::size_t k = 1; k < xi.size(); ++k) {
        u += 0.5 * dt * (std::norm(xi[k - 1]) + std::norm(xi[k]));
        if (!(std::norm(xi[k]) < gamma_rate / 5.0 * u)) return false;
    }
    return true;
}

FeasibilityReport feasibility_profile(const SampledSignal& xi, const SystemConfig& cfg, const SampledSignal* xi_dot) {
    const Rates r = cfg.rates();
    const SampledSignal dxi = xi_dot ? *xi_dot : derivative(xi);
    const std::size_t n = xi.size();
    const double dt = xi.grid.dt;
    std::vector<double> f(n), el(n);
    for (std::size_t k = 0; k < n; ++k) {
        el[k] = std::exp(r.gamma_l * k * dt);
        f[k] = std::real((0.5 * (r.gamma - r.gamma_l) * xi[k] - dxi[k]) * std::conj(xi[k])) * el[k];
    }
    const auto big_f = cumtrapz(f, dt);
    FeasibilityReport rep;
    rep.profile = SampledSignal(xi.grid);
    for (std::size_t k = 0; k < n; ++k) rep.profile[k] = 2.0 * big_f[k] - 4.0 * std::norm(xi[k]) * el[k];
    rep.gronwall_ok = gronwall_bound_holds(xi, r.gamma);
    return rep;
}

Synthesis absorb_chi3(const SampledSignal& xi, const SystemConfig& cfg, const ScheduleSpec& sched,
                      const SampledSignal* xi_dot) {
    return absorb_impl(xi, cfg, sched, xi_dot, true);
}

Synthesis absorb_chi2(const SampledSignal& xi, const SystemConfig& cfg, const ScheduleSpec& sched,
                      const SampledSignal* xi_dot) {
    return absorb_impl(xi, cfg, sched, xi_dot, false);
}

Synthesis absorb(const SampledSignal& xi, const SystemConfig& cfg, const ScheduleSpec& sched,
                 const SampledSignal* xi_dot) {
    return absorb_impl(xi, cfg, sched, xi_dot, is_kerr(cfg));
}

double emission_integral_limit(const GaussianSpec& target, const TimeGrid& grid, const SystemConfig& cfg) {
    const Rates r = cfg.rates();
    const double centre = target.t_center - grid.t_start;
    return r.gamma * std::exp(r.gamma_l * (centre + r.gamma_l * target.tau_g * target.tau_g / (16.0 * kLn2)));
}

EtaChoice choose_eta(const GaussianSpec& target, const TimeGrid& grid, const SystemConfig& cfg,
                     const ScheduleSpec& sched, double psi01_mag) {
    if (!(psi01_mag > 0.0)) throw InfeasibleError("nothing stored: psi01 is zero at the start of emission");
    const Rates r = cfg.rates();
    const bool kerr = is_kerr(cfg);
    const double c2 = r.gamma * psi01_mag * psi01_mag;
    const double eta_max = c2 / emission_integral_limit(target, grid, cfg);
    const UnitEmission u = unit_emission(target, grid, cfg, kerr);
    auto ok = [&](double eps) { return emission_feasible(u, c2, eps, eta_max * (1.0 - eps)); };

    double eps = sched.eps_eta;
    if (ok(eps)) return {eta_max * (1.0 - eps), eps};
    double lo = eps;
    double hi = eps;
    while (!ok(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi >= 1.0) throw InfeasibleError("no emission efficiency keeps the denominator positive");
    }
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return {eta_max * (1.0 - hi), hi};
}

double emission_efficiency(const GaussianSpec& target, const TimeGrid& grid, const SystemConfig& cfg,
                           const ScheduleSpec& sched, double psi01_mag) {
    return choose_eta(target, grid, cfg, sched, psi01_mag).eta;
}

Synthesis emit_chi3(const SampledSignal& xi, const SystemConfig& cfg, const ScheduleSpec& sched, cd psi0,
                    const SampledSignal* xi_dot) {
    return emit_impl(xi, cfg, sched, psi0, xi_dot, true);
}

Synthesis emit_chi2(const SampledSignal& xi, const SystemConfig& cfg, const ScheduleSpec& sched, cd psi0,
                    const SampledSignal* xi_dot) {
    return emit_impl(xi, cfg, sched, psi0, xi_dot, false);
}

Synthesis synthesize_emission(const GaussianSpec& target, const TimeGrid& grid, const SystemConfig& cfg,
                              const ScheduleSpec& sched, cd psi0) {
    const EtaChoice e = choose_eta(target, grid, cfg, sched, std::abs(psi0));
    const double amp = std::sqrt(e.eta);
    SampledSignal xi(grid), dxi(grid);
    for (std::size_t k = 0; k < grid.n_points; ++k) {
        xi[k] = amp * target.value(grid.time(k));
        dxi[k] = amp * target.derivative(grid.time(k));
    }
    Synthesis s = emit_impl(xi, cfg, sched, psi0, &dxi, is_kerr(cfg));
    s.control.eta = e.eta;
    s.aux.eps_eta = e.eps;
    return s;
}

PumpDrive pump_backout(const ControlSolution& lambda, double chi3, double gamma_p, double big_gamma_p) {
    if (!(chi3 > 0.0)) throw ConfigError("pump back-out needs chi3 > 0");
    if (!(gamma_p > 0.0)) throw ConfigError("pump coupling rate must be positive");
    const TimeGrid& grid = lambda.combined.grid;
    const std::size_t n = grid.n_points;
    const double dt = grid.dt;
    const auto dl = derivative4(lambda.combined.values, dt);

    PumpDrive p;
    p.gamma_p = gamma_p;
    p.big_gamma_p = big_gamma_p;
    p.r_alpha = SampledSignal(grid);
    std::vector<double> r(n), mag(n);
    for (std::size_t k = 0; k < n; ++k) {
        mag[k] = std::abs(lambda.combined[k]);
        r[k] = std::sqrt(mag[k] / chi3);
        p.r_alpha[k] = r[k];
    }
    const auto dr = derivative4(r, dt);
    const auto dmag = derivative4(mag, dt);

    // continuous phase of Lambda
    std::vector<double> phi(n, 0.0), phidot(n, 0.0), area(n, 0.0);
    double prev = 0.0;
    bool started = false;
    for (std::size_t k = 0; k < n; ++k) {
        const cd l = lambda.combined[k];
        if (std::abs(l) > 0.0) {
            double a = std::arg(l);
            if (started) a = prev + std::remainder(a - prev, 2.0 * kPi);
            prev = a;
            started = true;
            phidot[k] = std::imag(std::conj(l) * dl[k]) / std::norm(l);
        }
        phi[k] = prev;
    }
    // 2 * integral of |Lambda| with the end-point correction of the trapezoid rule
    for (std::size_t k = 1; k < n; ++k)
        area[k] = area[k - 1] + dt * (mag[k - 1] + mag[k]) - dt * dt * (dmag[k] - dmag[k - 1]) / 6.0;

    p.q = SampledSignal(grid);
    p.psi1 = SampledSignal(grid);
    p.psi2 = SampledSignal(grid);
    p.phi1 = SampledSignal(grid);
    p.phi2 = SampledSignal(grid);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = dr[k] + 0.5 * big_gamma_p * r[k];
        const double b = 0.5 * r[k] * phidot[k];
        p.q[k] = std::sqrt(a * a + b * b) / std::sqrt(gamma_p);
        const double tilt = (a == 0.0 && b == 0.0) ? 0.0 : std::atan2(b, a);
        p.phi1[k] = -area[k] + 0.5 * phi[k];
        p.phi2[k] = -area[k] - 0.5 * phi[k];
        p.psi1[k] = p.phi1[k].real() + tilt;
        p.psi2[k] = p.phi2[k].real() - tilt;
    }
    return p;
}

}  // namespace qcav
