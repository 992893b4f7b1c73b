#include "qcav/two_photon_engine.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "qcav/errors.hpp"

namespace qcav {

namespace {

using Vec6 = Eigen::Matrix<cd, 6, 1>;

const cd kI{0.0, 1.0};
const double kSqrt2 = std::sqrt(2.0);

}  // namespace

Mat4 two_photon_matrix(const Rates& r, const NonlinearTerms& t, cd lambda) {
    const double xpm = r.xpm ? 4.0 * std::abs(lambda) : 0.0;
    Mat4 a = Mat4::Zero();
    a(0, 0) = -(kI * (2.0 * r.delta_a + xpm) + r.big_gamma) + t.shift20;
    a(0, 1) = -kI * kSqrt2 * std::conj(lambda);
    a(1, 0) = -kI * kSqrt2 * lambda;
    a(1, 1) = -(kI * (r.delta_a + r.delta_b + xpm) + 0.5 * (r.big_gamma + r.gamma_l)) + t.shift11;
    a(1, 2) = -kI * kSqrt2 * std::conj(lambda);
    a(2, 1) = -kI * kSqrt2 * lambda;
    a(2, 2) = -(kI * (2.0 * r.delta_b + xpm) + r.gamma_l) + t.shift02;
    if (t.has_c_mode) a(3, 3) = t.c_diagonal;
    for (const auto& c : t.couplings) a(c.to, c.from) += c.coefficient;
    return a;
}

Mat4 idle_propagator_two(const Rates& r, const NonlinearTerms& t, double duration) {
    const Mat4 a = two_photon_matrix(r, t, cd{}) * duration;
    return a.exp();
}

TwoPhotonAmplitudes propagate_pair_driven(const Drive& d, const Rates& r, const NonlinearTerms& terms,
                                          const PairInitial& init) {
    check_step_stability(r.big_gamma, d.timeline.dt);
    const double sg = std::sqrt(r.gamma);
    const double s2g = std::sqrt(2.0 * r.gamma);
    auto rhs = [&](const Vec6& y, cd lam, cd x) {
        Vec6 out;
        const Vec2 ii = y.head<2>();
        out.head<2>() = one_photon_matrix(r, lam) * ii;
        out(0) += s2g * x;
        out.tail<4>() = two_photon_matrix(r, terms, lam) * y.tail<4>();
        out(2) += s2g * ii(0) * x;
        out(3) += sg * ii(1) * x;
        return out;
    };
    Eigen::Matrix<cd, 6, 6> idle = Eigen::Matrix<cd, 6, 6>::Identity();
    if (d.timeline.gap_after) {
        idle.setZero();
        idle.topLeftCorner<2, 2>() = idle_propagator_one(r, d.timeline.gap);
        idle.bottomRightCorner<4, 4>() = idle_propagator_two(r, terms, d.timeline.gap);
    }

    const std::size_t n = d.size();
    TwoPhotonAmplitudes a;
    for (auto* v : {&a.psi10_ii, &a.psi01_ii, &a.psi20, &a.psi11, &a.psi02, &a.psi001}) v->resize(n);
    Vec6 y;
    y << init.ii, init.two;
    auto store = [&](std::size_t k) {
        a.psi10_ii[k] = y(0);
        a.psi01_ii[k] = y(1);
        a.psi20[k] = y(2);
        a.psi11[k] = y(3);
        a.psi02[k] = y(4);
        a.psi001[k] = y(5);
    };
    store(0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        y = rk4_step(y, d, k, rhs);
        if (d.timeline.is_gap_step(k)) y = idle * y;
        store(k + 1);
    }
    return a;
}

TwoTimeRow propagate_two_time(std::size_t tau, const Drive& d, const Rates& r) {
    const std::size_t n = d.size();
    if (tau >= n) throw std::out_of_range("tau index outside the timeline");
    const double sg = std::sqrt(r.gamma);
    auto homogeneous = [&](const Vec2& v, cd lam, cd) { return Vec2(one_photon_matrix(r, lam) * v); };
    auto driven = [&](const Vec2& v, cd lam, cd x) {
        Vec2 out = one_photon_matrix(r, lam) * v;
        out(0) += sg * x;
        return out;
    };
    const Mat2 idle = d.timeline.gap_after ? idle_propagator_one(r, d.timeline.gap) : Mat2::Identity();

    TwoTimeRow row;
    row.tau_index = tau;
    const std::size_t m = n - tau;
    for (auto* v : {&row.l10, &row.l01, &row.m10, &row.m01, &row.psi10_i, &row.psi01_i}) v->resize(m);
    Vec2 l(1.0, 0.0), mm(0.0, 1.0), p = Vec2::Zero();
    for (std::size_t j = 0;; ++j) {
        row.l10[j] = l(0);
        row.l01[j] = l(1);
        row.m10[j] = mm(0);
        row.m01[j] = mm(1);
        row.psi10_i[j] = p(0);
        row.psi01_i[j] = p(1);
        if (j + 1 == m) break;
        const std::size_t k = tau + j;
        l = rk4_step(l, d, k, homogeneous);
        mm = rk4_step(mm, d, k, homogeneous);
        p = rk4_step(p, d, k, driven);
        if (d.timeline.is_gap_step(k)) {
            l = idle * l;
            mm = idle * mm;
            p = idle * p;
        }
    }
    return row;
}

cd xi_out_paths(std::size_t tau, std::size_t t, const TwoPhotonAmplitudes& a, const TwoTimeRow& row, const Drive& d,
                const Rates& r) {
    if (row.tau_index != tau || t < tau) throw std::invalid_argument("row does not cover (tau, t)");
    const std::size_t j = t - tau;
    const double g = r.gamma;
    const double sg = std::sqrt(g);
    const cd xt = d.xi[tau];
    const cd xs = d.xi[t];
    const cd bracket = kSqrt2 * g * a.psi20[tau] * row.l10[j] + g * a.psi11[tau] * row.m10[j] -
                       sg * a.psi10_ii[tau] * xt * row.l10[j] - sg * a.psi01_ii[tau] * xt * row.m10[j] +
                       g * a.psi10_ii[tau] * row.psi10_i[j] - sg * a.psi10_ii[tau] * xs -
                       std::sqrt(2.0 * g) * xt * row.psi10_i[j];
    return xt * xs + bracket / kSqrt2;
}

TwoPhotonField assemble_output(const TwoPhotonAmplitudes& a, const Drive& d, const Rates& r,
                               const AssembleOptions& opt) {
    const std::size_t n = d.size();
    const double dt = d.timeline.dt;
    const double sg = std::sqrt(r.gamma);
    const double s2g = std::sqrt(2.0 * r.gamma);
    if (a.psi20.size() != n) throw std::invalid_argument("amplitudes do not match the drive");
    if (opt.target && opt.target->size() != n) throw std::invalid_argument("target does not match the drive");

    std::vector<cd> c(n);
    std::vector<Vec2> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        c[k] = kSqrt2 * d.xi[k] - sg * a.psi10_ii[k];
        v[k] << -s2g * a.psi20[k] + a.psi10_ii[k] * d.xi[k], -sg * a.psi11[k] + a.psi01_ii[k] * d.xi[k];
    }

    // tail[k] = trapezoid of |xi|^2 over [k, n-1]
    std::vector<double> xi2(n), tail(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) xi2[k] = std::norm(d.xi[k]);
    for (std::size_t k = n - 1; k-- > 0;) tail[k] = tail[k + 1] + 0.5 * dt * (xi2[k] + xi2[k + 1]);

    TwoPhotonField field;
    auto& occ = field.occupation;
    for (auto* p : {&occ.p00, &occ.p10, &occ.p01, &occ.p20, &occ.p11, &occ.p02, &occ.p001}) p->assign(n, 0.0);
    field.diagonal.resize(n);
    if (opt.slice_index) field.slice.assign(n, cd{});
    if (opt.keep_matrix) field.xi_out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

    const auto wfull = trapezoid_weights(n, dt);
    const Mat2 idle = d.timeline.gap_after ? idle_propagator_one(r, d.timeline.gap) : Mat2::Identity();

    std::vector<Vec2> rows(n, Vec2::Zero());
    std::vector<cd> col(n);
    double head_c = 0.0;  // sum of u_j |c_j|^2 for j <= k
    double q2d = 0.0;     // sum of u_i u_j |X_ij|^2 over the square [0,k]^2
    cd ov{};
    double nrm = 0.0;

    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            // one RK4 step is affine in (row, c): row' = S row + c s
            const std::size_t s = k - 1;
            auto hom = [&](const Vec2& y, cd lam, cd) { return Vec2(one_photon_matrix(r, lam) * y); };
            auto inh = [&](const Vec2& y, cd lam, cd x) {
                Vec2 out = one_photon_matrix(r, lam) * y;
                out(0) += sg * x;
                return out;
            };
            Mat2 step;
            step.col(0) = rk4_step(Vec2(1.0, 0.0), d, s, hom);
            step.col(1) = rk4_step(Vec2(0.0, 1.0), d, s, hom);
            Vec2 force = rk4_step(Vec2::Zero().eval(), d, s, inh);
            if (d.timeline.is_gap_step(s)) {
                step = idle * step;
                force = idle * force;
            }
            for (std::size_t j = 0; j < k; ++j) rows[j] = step * rows[j] + c[j] * force;
        }
        rows[k] = v[k];

        const double uk = (k == 0) ? 0.5 * dt : dt;
        double cross = 0.0;  // sum over i < k of u_i |X_ik|^2
        double row_a = 0.0, row_b = 0.0;
        for (std::size_t i = 0; i <= k; ++i) {
            col[i] = (c[i] * d.xi[k] - sg * rows[i](0)) / kSqrt2;
            const double ui = (i == 0) ? 0.5 * dt : dt;
            const double y2 = std::norm(col[i]);
            if (i < k) cross += ui * y2;
            const double wi = (i == 0 || i == k) ? 0.5 * dt : dt;
            row_a += wi * std::norm(rows[i](0));
            row_b += wi * std::norm(rows[i](1));
        }
        if (k == 0) row_a = row_b = 0.0;
        const double ykk = std::norm(col[k]);
        q2d += 2.0 * uk * cross + uk * uk * ykk;
        const double square = q2d - dt * (cross + uk * ykk) + 0.25 * dt * dt * ykk;
        head_c += uk * std::norm(c[k]);
        const double head_trap = (k == 0) ? 0.0 : head_c - 0.5 * dt * std::norm(c[k]);

        occ.p00[k] = tail[k] * tail[k] + tail[k] * head_trap + ((k == 0) ? 0.0 : square);
        occ.p10[k] = std::norm(a.psi10_ii[k]) * tail[k] + row_a;
        occ.p01[k] = std::norm(a.psi01_ii[k]) * tail[k] + row_b;
        occ.p20[k] = std::norm(a.psi20[k]);
        occ.p11[k] = std::norm(a.psi11[k]);
        occ.p02[k] = std::norm(a.psi02[k]);
        occ.p001[k] = std::norm(a.psi001[k]);

        field.diagonal[k] = col[k];
        if (opt.slice_index) {
            const std::size_t sidx = *opt.slice_index;
            if (k == sidx)
                for (std::size_t i = 0; i <= k; ++i) field.slice[i] = col[i];
            else if (k > sidx)
                field.slice[k] = col[sidx];
        }
        if (opt.keep_matrix)
            for (std::size_t i = 0; i <= k; ++i) {
                field.xi_out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = col[i];
                field.xi_out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = col[i];
            }
        for (std::size_t i = 0; i <= k; ++i) {
            const double fac = (i == k) ? 1.0 : 2.0;
            const double ww = fac * wfull[i] * wfull[k];
            nrm += ww * std::norm(col[i]);
            if (opt.target) ov += ww * col[i] * std::conj((*opt.target)[i]) * std::conj((*opt.target)[k]);
        }
    }
    field.target_overlap = ov;
    field.norm = nrm;
    return field;
}

OverlapResult overlap_from_sum(cd sum) { return {std::norm(sum), std::arg(sum)}; }

OverlapResult two_photon_overlap(const TwoPhotonField& field, const std::vector<cd>& target, double dt) {
    const auto n = static_cast<std::size_t>(field.xi_out.rows());
    if (n == 0 || target.size() != n) throw std::invalid_argument("full output matrix required for the overlap");
    const auto w = trapezoid_weights(n, dt);
    cd sum{};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            sum += w[i] * w[j] * field.xi_out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                   std::conj(target[i]) * std::conj(target[j]);
    return overlap_from_sum(sum);
}

}  // namespace qcav
