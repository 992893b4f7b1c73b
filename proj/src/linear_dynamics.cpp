#include "qcav/linear_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qcav/errors.hpp"

namespace qcav {

Mat2 one_photon_matrix(const Rates& r, cd lambda) {
    const double xpm = r.xpm ? 2.0 * std::abs(lambda) : 0.0;
    const cd i{0.0, 1.0};
    Mat2 a;
    a(0, 0) = -(i * (r.delta_a + xpm) + 0.5 * r.big_gamma);
    a(0, 1) = -i * std::conj(lambda);
    a(1, 0) = -i * lambda;
    a(1, 1) = -(i * (r.delta_b + xpm) + 0.5 * r.gamma_l);
    return a;
}

Mat2 idle_propagator_one(const Rates& r, double duration) {
    const cd i{0.0, 1.0};
    Mat2 m = Mat2::Zero();
    m(0, 0) = std::exp(-(i * r.delta_a + 0.5 * r.big_gamma) * duration);
    m(1, 1) = std::exp(-(i * r.delta_b + 0.5 * r.gamma_l) * duration);
    return m;
}

SingleModeTrace propagate_one_mode(const SampledSignal& xi_in, const SystemConfig& cfg) {
    const Rates r = cfg.rates();
    const double dt = xi_in.grid.dt;
    check_step_stability(r.big_gamma, dt);
    const cd decay = -(cd{0.0, r.delta_a} + 0.5 * r.big_gamma);
    const double sg = std::sqrt(r.gamma);
    const auto half = half_step_values(xi_in.values);
    auto rhs = [&](const cd& y, cd, cd x) { return decay * y + sg * x; };

    SingleModeTrace tr{SampledSignal(xi_in.grid), SampledSignal(xi_in.grid)};
    cd y{};
    tr.xi_out[0] = xi_in[0];
    for (std::size_t n = 0; n + 1 < xi_in.size(); ++n) {
        y = rk4_step(y, dt, rhs, cd{}, xi_in[n], cd{}, half[n], cd{}, xi_in[n + 1]);
        tr.psi1[n + 1] = y;
        tr.xi_out[n + 1] = xi_in[n + 1] - sg * y;
    }
    return tr;
}

Vec2 advance_two_mode(Vec2 y, const Drive& d, const Rates& r, std::size_t from, std::size_t to,
                      std::vector<Vec2>* record) {
    const double sg = std::sqrt(r.gamma);
    auto rhs = [&](const Vec2& v, cd lam, cd x) {
        Vec2 out = one_photon_matrix(r, lam) * v;
        out(0) += sg * x;
        return out;
    };
    const Mat2 idle = d.timeline.gap_after ? idle_propagator_one(r, d.timeline.gap) : Mat2::Identity();
    if (record) (*record)[from] = y;
    for (std::size_t n = from; n < to; ++n) {
        y = rk4_step(y, d, n, rhs);
        if (d.timeline.is_gap_step(n)) y = idle * y;
        if (record) (*record)[n + 1] = y;
    }
    return y;
}

TwoModeTrace propagate_two_mode(const Drive& d, const Rates& r, Vec2 initial) {
    check_step_stability(r.big_gamma, d.timeline.dt);
    const std::size_t n = d.size();
    std::vector<Vec2> rec(n);
    advance_two_mode(initial, d, r, 0, n - 1, &rec);
    const TimeGrid grid = d.timeline.index_grid();
    TwoModeTrace tr{SampledSignal(grid), SampledSignal(grid), SampledSignal(grid)};
    const double sg = std::sqrt(r.gamma);
    for (std::size_t k = 0; k < n; ++k) {
        tr.psi10[k] = rec[k](0);
        tr.psi01[k] = rec[k](1);
        tr.xi_out[k] = d.xi[k] - sg * rec[k](0);
    }
    return tr;
}

TwoModeTrace propagate_two_mode(const SampledSignal& xi_in, const SampledSignal& control, const SystemConfig& cfg,
                                Vec2 initial) {
    if (!xi_in.grid.same_as(control.grid)) throw std::invalid_argument("input and control on different grids");
    const Drive d = make_drive(plain_timeline(xi_in.size(), xi_in.grid.dt), xi_in.values, control.values);
    TwoModeTrace tr = propagate_two_mode(d, cfg.rates(), initial);
    tr.psi10.grid = tr.psi01.grid = tr.xi_out.grid = xi_in.grid;
    return tr;
}

double trapezoid(const std::vector<double>& v, double dt, std::size_t a, std::size_t b) {
    if (b <= a) return 0.0;
    double s = 0.5 * (v[a] + v[b]);
    for (std::size_t k = a + 1; k < b; ++k) s += v[k];
    return s * dt;
}

double pass_probability(const TwoModeTrace& trace, std::size_t pass_end) {
    const auto p = trace.xi_out.abs2();
    return trapezoid(p, trace.xi_out.grid.dt, 0, std::min(pass_end, p.size() - 1));
}

HeraldedMetrics heralded_metrics(const SampledSignal& xi_out, const SampledSignal& target, std::size_t pass_end,
                                 std::size_t emit_start) {
    if (xi_out.size() != target.size()) throw std::invalid_argument("output and target lengths differ");
    const double dt = xi_out.grid.dt;
    const std::size_t last = xi_out.size() - 1;
    const auto p = xi_out.abs2();
    HeraldedMetrics m;
    m.p_pass = trapezoid(p, dt, 0, std::min(pass_end, last));
    m.eta_measured = trapezoid(p, dt, std::min(emit_start, last), last);
    m.p_l = 1.0 - trapezoid(p, dt, 0, last);
    const auto w = trapezoid_weights(xi_out.size(), dt);
    cd ov{};
    for (std::size_t k = 0; k <= last; ++k) ov += w[k] * xi_out[k] * std::conj(target[k]);
    m.f1 = std::norm(ov);
    m.theta1 = std::arg(ov);
    m.f1_cond = m.f1 / (1.0 - m.p_l);
    return m;
}

}  // namespace qcav
