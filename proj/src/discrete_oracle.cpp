#include "qcav/discrete_oracle.hpp"

#include <algorithm>
#include <cmath>

#include <gsl/gsl_fit.h>

#include "qcav/errors.hpp"
#include "qcav/timeline.hpp"

namespace qcav {

namespace {

double feed_sign(const OracleOptions& opt) { return opt.corrupt_coupling_sign ? -1.0 : 1.0; }

std::vector<cd> sample_bins(const TimeFunction& f, std::size_t n, double dt) {
    std::vector<cd> v(n + 1);
    for (std::size_t k = 0; k <= n; ++k) v[k] = f(static_cast<double>(k) * dt);
    return v;
}

}  // namespace

double BinState1::norm() const {
    double s = sys_amps.squaredNorm();
    for (std::size_t k = 1; k <= n_bins; ++k) s += std::norm(bin_amps[k]);
    return s;
}

double BinState2::norm() const {
    double s = sys.squaredNorm() + single.squaredNorm();
    for (std::size_t k = 1; k <= n_bins; ++k)
        for (std::size_t j = 1; j < k; ++j) s += std::norm(pairs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)));
    return s;
}

BinState1 make_bin_state1(const std::vector<cd>& xi, double dt) {
    BinState1 s;
    s.n_bins = xi.size() - 1;
    s.dt = dt;
    s.bin_amps.assign(xi.size(), cd{});
    for (std::size_t k = 1; k < xi.size(); ++k) s.bin_amps[k] = xi[k] * std::sqrt(dt);
    return s;
}

BinState2 make_bin_state2(const std::vector<cd>& xi, double dt) {
    const std::size_t n = xi.size() - 1;
    if (n > BinState2::kMaxBins) throw ConfigError("bin budget exceeded: at most 256 bins for two photons");
    BinState2 s;
    s.n_bins = n;
    s.dt = dt;
    const auto m = static_cast<Eigen::Index>(n + 1);
    s.pairs = Eigen::MatrixXcd::Zero(m, m);
    s.single = Eigen::MatrixXcd::Zero(2, m);
    for (std::size_t k = 1; k <= n; ++k)
        for (std::size_t j = 1; j < k; ++j)
            s.pairs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = std::sqrt(2.0) * xi[j] * xi[k] * dt;
    return s;
}

BinState1 step_single(const BinState1& s, std::size_t n, const Rates& r, const std::vector<cd>& xi,
                      const std::vector<cd>& lambda, const OracleOptions& opt) {
    if (n == 0 || n > s.n_bins) throw ConfigError("bin index out of range");
    const double sg = std::sqrt(r.gamma);
    BinState1 out = s;
    Vec2 feed = Vec2::Zero();
    feed(0) = feed_sign(opt) * sg * xi[n];
    out.sys_amps = s.sys_amps + s.dt * (one_photon_matrix(r, lambda[n]) * s.sys_amps + feed);
    const cd emitter = opt.literal_indexing ? s.sys_amps(0) : out.sys_amps(0);
    out.bin_amps[n] = s.bin_amps[n] - sg * std::sqrt(s.dt) * emitter;
    return out;
}

BinState2 step_pair(const BinState2& s, std::size_t n, const Rates& r, const NonlinearTerms& terms,
                    const std::vector<cd>& xi, const std::vector<cd>& lambda, const OracleOptions& opt) {
    if (n == 0 || n > s.n_bins) throw ConfigError("bin index out of range");
    if (s.n_bins > BinState2::kMaxBins) throw ConfigError("bin budget exceeded: at most 256 bins for two photons");
    (void)xi;
    const double sdt = std::sqrt(r.gamma * s.dt);
    const double fdt = feed_sign(opt) * sdt;
    const auto ni = static_cast<Eigen::Index>(n);
    const Mat2 a1 = one_photon_matrix(r, lambda[n]);
    const Mat4 a2 = two_photon_matrix(r, terms, lambda[n]);

    BinState2 out = s;
    out.single = s.single + s.dt * (a1 * s.single);
    for (std::size_t k = 1; k <= s.n_bins; ++k) {
        if (k == n) continue;
        const auto j = static_cast<Eigen::Index>(std::min(k, n));
        const auto l = static_cast<Eigen::Index>(std::max(k, n));
        out.single(0, static_cast<Eigen::Index>(k)) += fdt * s.pairs(j, l);
    }
    Vec4 absorbed = Vec4::Zero();
    absorbed(0) = std::sqrt(2.0) * s.single(0, ni);
    absorbed(1) = s.single(1, ni);
    out.sys = s.sys + s.dt * (a2 * s.sys) + fdt * absorbed;

    const Eigen::MatrixXcd& emit_single = opt.literal_indexing ? s.single : out.single;
    const Vec4& emit_sys = opt.literal_indexing ? s.sys : out.sys;
    for (std::size_t k = 1; k <= s.n_bins; ++k) {
        if (k == n) continue;
        const auto j = static_cast<Eigen::Index>(std::min(k, n));
        const auto l = static_cast<Eigen::Index>(std::max(k, n));
        out.pairs(j, l) -= sdt * emit_single(0, static_cast<Eigen::Index>(k));
    }
    out.single(0, ni) -= sdt * std::sqrt(2.0) * emit_sys(0);
    out.single(1, ni) -= sdt * emit_sys(1);
    return out;
}

BinState1 run_single_oracle(const std::vector<cd>& xi, const std::vector<cd>& lambda, double dt, const Rates& r,
                            const OracleOptions& opt) {
    BinState1 s = make_bin_state1(xi, dt);
    for (std::size_t n = 1; n <= s.n_bins; ++n) s = step_single(s, n, r, xi, lambda, opt);
    return s;
}

BinState2 run_pair_oracle(const std::vector<cd>& xi, const std::vector<cd>& lambda, double dt, const Rates& r,
                          const NonlinearTerms& terms, const OracleOptions& opt) {
    BinState2 s = make_bin_state2(xi, dt);
    for (std::size_t n = 1; n <= s.n_bins; ++n) s = step_pair(s, n, r, terms, xi, lambda, opt);
    return s;
}

cd pair_output(const BinState2& s, std::size_t j, std::size_t k) {
    if (j > k) std::swap(j, k);
    if (j == k) return cd{};
    return s.pairs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) / (std::sqrt(2.0) * s.dt);
}

OracleProblem reference_oracle_problem() {
    OracleProblem p;
    p.system.gamma = 1.0;
    p.system.gamma_l = 0.0;
    p.system.nonlinearity = NonlinearityKind::Chi3;
    p.system.chi3 = 0.2;
    const GaussianSpec g{1.0, 3.0};
    p.xi_in = [g](double t) { return cd{g.value(t), 0.0}; };
    p.control = [](double t) { return cd{0.3 * std::exp(-0.05 * (t - 5.0) * (t - 5.0)), 0.1}; };
    p.t_end = 10.0;
    return p;
}

OracleProblem oracle_problem_from(const RunConfig& cfg) {
    OracleProblem p;
    p.system = cfg.system;
    const GaussianSpec g{cfg.system.tau_g, cfg.schedule.t_in};
    const double omega = cfg.system.omega_g();
    p.xi_in = [g](double t) { return cd{g.value(t), 0.0}; };
    p.control = [omega, g](double t) {
        return omega * cd{0.3 * std::exp(-0.5 * (t - g.t_center) * (t - g.t_center) / (g.tau_g * g.tau_g)), 0.1};
    };
    p.t_end = 2.0 * cfg.schedule.t_in;
    return p;
}

ConvergenceReport convergence_report(const SystemConfig& cfg, const TimeFunction& control, const TimeFunction& xi_in,
                                     double t_end, const std::vector<std::size_t>& n_list, const OracleOptions& opt) {
    if (n_list.empty() || !std::is_sorted(n_list.begin(), n_list.end()))
        throw ConfigError("bin counts must be given in ascending order");
    const Rates r = cfg.rates();
    constexpr std::size_t kRefFactor = 8;
    ConvergenceReport rep;
    for (std::size_t n : n_list) {
        const double dt = t_end / static_cast<double>(n);
        const auto xi = sample_bins(xi_in, n, dt);
        const auto lam = sample_bins(control, n, dt);
        const BinState1 s = run_single_oracle(xi, lam, dt, r, opt);

        const std::size_t nf = n * kRefFactor;
        const double dtf = t_end / static_cast<double>(nf);
        const Drive d = make_drive(plain_timeline(nf + 1, dtf), sample_bins(xi_in, nf, dtf), sample_bins(control, nf, dtf));
        const TwoModeTrace ref = propagate_two_mode(d, r);

        ConvergenceRow row{n, dt, 0.0, 0.0};
        for (std::size_t k = 1; k <= n; ++k) {
            const cd o = s.bin_amps[k] / std::sqrt(dt);
            row.output_error = std::max(row.output_error, std::abs(o - ref.xi_out[k * kRefFactor]));
        }
        row.state_error = std::hypot(std::abs(s.sys_amps(0) - ref.psi10[nf]), std::abs(s.sys_amps(1) - ref.psi01[nf]));
        rep.rows.push_back(row);
    }
    if (rep.rows.size() >= 2) {
        std::vector<double> x, y;
        for (const auto& row : rep.rows)
            if (row.output_error > 0.0) {
                x.push_back(std::log(row.dt));
                y.push_back(std::log(row.output_error));
            }
        if (x.size() >= 2) {
            double c0, c1, cov00, cov01, cov11, sumsq;
            gsl_fit_linear(x.data(), 1, y.data(), 1, x.size(), &c0, &c1, &cov00, &cov01, &cov11, &sumsq);
            rep.order = c1;
        }
    }
    return rep;
}

PairComparison compare_pair(const SystemConfig& cfg, const TimeFunction& control, const TimeFunction& xi_in,
                            double t_end, std::size_t n_bins, const OracleOptions& opt) {
    const Rates r = cfg.rates();
    const NonlinearTerms terms = terms_for(cfg);
    const double dt = t_end / static_cast<double>(n_bins);
    const auto xi = sample_bins(xi_in, n_bins, dt);
    const auto lam = sample_bins(control, n_bins, dt);

    PairComparison cmp{n_bins, dt, 0.0, 0.0, make_bin_state2(xi, dt).norm()};
    const BinState2 s = run_pair_oracle(xi, lam, dt, r, terms, opt);

    const Drive d = make_drive(plain_timeline(n_bins + 1, dt), xi, lam);
    const TwoPhotonAmplitudes amps = propagate_pair_driven(d, r, terms);
    AssembleOptions ao;
    ao.keep_matrix = true;
    const TwoPhotonField field = assemble_output(amps, d, r, ao);

    for (std::size_t k = 1; k <= n_bins; ++k)
        for (std::size_t j = 1; j < k; ++j) {
            const cd ref = field.xi_out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
            cmp.max_error = std::max(cmp.max_error, std::abs(pair_output(s, j, k) - ref));
            cmp.max_amplitude = std::max(cmp.max_amplitude, std::abs(ref));
        }
    return cmp;
}

}  // namespace qcav
