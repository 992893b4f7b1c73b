#include "qcav/gate_protocols.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_roots.h>

#include "qcav/errors.hpp"

namespace qcav {

double wrap_phase(double x) {
    double y = std::remainder(x, 2.0 * kPi);
    if (y <= -kPi) y += 2.0 * kPi;
    return y;
}

SampledSignal input_wavepacket(const RunConfig& cfg, const TimeGrid& grid) {
    const GaussianSpec g{cfg.system.tau_g, cfg.schedule.t_in};
    SampledSignal x = gaussian(g, grid);
    const double t_end = 2.0 * cfg.schedule.t_in;
    for (std::size_t k = 0; k < x.size(); ++k)
        if (grid.time(k) > t_end + 1e-12) x[k] = cd{};
    return x;
}

SinglePhotonRun run_single(const RunConfig& cfg, bool compress) {
    const auto issues = validate(cfg.system, cfg.schedule);
    if (!issues.empty()) throw ConfigError(issues.front());
    const SystemConfig& sys = cfg.system;
    const ScheduleSpec& sch = cfg.schedule;
    const Rates r = sys.rates();
    check_step_stability(r.big_gamma, cfg.dt);
    const Timeline tl = build_timeline(sch, r.big_gamma, sys.tau_g, cfg.dt, compress);
    const std::size_t n = tl.n_points;

    const GaussianSpec in_spec{sys.tau_g, sch.t_in};
    const TimeGrid agrid{0.0, cfg.dt, tl.absorb_end + 1};
    SampledSignal xa = gaussian(in_spec, agrid);
    SampledSignal dxa = gaussian_derivative(in_spec, agrid);
    const std::size_t pass_end = std::min(tl.absorb_end, static_cast<std::size_t>(std::llround(2.0 * sch.t_in / cfg.dt)));
    for (std::size_t k = pass_end + 1; k < xa.size(); ++k) xa[k] = dxa[k] = cd{};

    SinglePhotonRun run;
    run.absorption = absorb(xa, sys, sch, &dxa);

    std::vector<cd> xi(n, cd{}), lam(n, cd{});
    for (std::size_t k = 0; k <= tl.absorb_end; ++k) {
        xi[k] = xa[k];
        lam[k] = run.absorption.control.combined[k];
    }
    const Drive stage1 = make_drive(tl, xi, lam);
    const Vec2 stored = advance_two_mode(Vec2::Zero(), stage1, r, 0, tl.emit_start);

    const TimeGrid egrid{tl.time(tl.emit_start), cfg.dt, n - tl.emit_start};
    const GaussianSpec out_spec{sys.tau_g, sch.t_out()};
    run.emission = synthesize_emission(out_spec, egrid, sys, sch, stored(1));
    for (std::size_t j = 0; j < egrid.n_points; ++j) lam[tl.emit_start + j] = run.emission.control.combined[j];

    run.drive = make_drive(tl, std::move(xi), std::move(lam));
    run.trace = propagate_two_mode(run.drive, r);
    for (std::size_t k = 0; k < n; ++k) {
        const double occ = std::norm(run.trace.psi10[k]) + std::norm(run.trace.psi01[k]);
        if (!std::isfinite(occ) || occ > 1.0 + 1e-3)
            throw NumericError("single-photon propagation unstable (cavity occupation " + std::to_string(occ) +
                               "); reduce dt");
    }
    run.target.resize(n);
    for (std::size_t k = 0; k < n; ++k) run.target[k] = out_spec.value(tl.time(k));
    run.metrics = heralded_metrics(run.trace.xi_out, SampledSignal(tl.index_grid(), run.target), pass_end,
                                   tl.emit_start);
    return run;
}

double two_photon_dt(const SystemConfig& sys) {
    double dt = sys.tau_g / 100.0;
    const double big = sys.rates().big_gamma;
    while (dt * big > 0.5) dt *= 0.5;
    return dt;
}

GateRun run_gate(const RunConfig& cfg, bool compress, const AssembleOptions& extra) {
    GateRun g;
    g.single = run_single(cfg, compress);
    const Rates r = cfg.system.rates();
    g.amplitudes = propagate_pair_driven(g.single.drive, r, terms_for(cfg.system));
    AssembleOptions opt = extra;
    opt.target = &g.single.target;
    g.field = assemble_output(g.amplitudes, g.single.drive, r, opt);
    const OverlapResult o2 = overlap_from_sum(g.field.target_overlap);
    const auto& m = g.single.metrics;
    g.report.f1 = m.f1;
    g.report.theta1 = m.theta1;
    g.report.f2 = o2.f2;
    g.report.theta2 = o2.theta2;
    g.report.delta_theta = wrap_phase(o2.theta2 - 2.0 * m.theta1);
    g.report.p_pass = m.p_pass;
    g.report.eta = g.single.emission.control.eta;
    g.report.p_l = m.p_l;
    g.report.t_store_solution = cfg.schedule.t_store;
    return g;
}

GateReport run_gate_chi3(const RunConfig& cfg) {
    if (cfg.system.nonlinearity != NonlinearityKind::Chi3) throw ConfigError("chi3 gate needs nonlinearity = chi3");
    return run_gate(cfg).report;
}

GateReport run_gate_chi2(const RunConfig& cfg) {
    if (cfg.system.nonlinearity != NonlinearityKind::Chi2Shg) throw ConfigError("chi2 gate needs nonlinearity = chi2");
    return run_gate(cfg).report;
}

double chi2_flip_store_time(const SystemConfig& sys) {
    const double chi2 = sys.rates().chi2;
    if (!(chi2 > 0.0)) throw ConfigError("chi2 must be positive for a Rabi flip");
    return kPi / (std::sqrt(2.0) * chi2);
}

namespace {

struct StoreProblem {
    RunConfig base;
    double target;
    GateReport last;
    double eval(double t_store) {
        RunConfig c = base;
        c.schedule.t_store = t_store;
        last = run_gate(c).report;
        return wrap_phase(last.delta_theta - target);
    }
};

double store_trampoline(double x, void* p) { return static_cast<StoreProblem*>(p)->eval(x); }

}  // namespace

StoreTimeResult find_store_time(const RunConfig& cfg, double target_phase, const StoreTimeOptions& opt) {
    StoreProblem prob{cfg, target_phase, {}};
    const double tg = cfg.system.tau_g;
    const double lo = cfg.schedule.t_in + cfg.schedule.tau_o + tg;
    StoreTimeResult res;
    double prev_t = lo;
    double prev_h = prob.eval(lo);
    res.scan.emplace_back(lo, prev_h);
    const double probe = 0.05 * tg;
    const double rate = std::abs(wrap_phase(prob.eval(lo + probe) - prev_h)) / probe;
    const double step = std::min(opt.scan_step * tg, rate > 0.0 ? 1.0 / rate : opt.scan_step * tg);
    double a = 0.0, b = 0.0;
    bool found = false;
    for (double t = lo + step; t <= opt.t_max * tg + 1e-9; t += step) {
        const double h = prob.eval(t);
        res.scan.emplace_back(t, h);
        if (std::abs(h) < opt.phase_tol) {
            res.t_store = t;
            res.report = prob.last;
            res.report.t_store_solution = t;
            return res;
        }
        if ((prev_h < 0.0) != (h < 0.0) && std::abs(h - prev_h) < 0.5 * kPi) {
            a = prev_t;
            b = t;
            found = true;
            break;
        }
        prev_t = t;
        prev_h = h;
    }
    if (!found) throw StoreTimeNotFound("no storage time reaches the target phase in the bracket", res.scan);

    gsl_function fn{&store_trampoline, &prob};
    gsl_root_fsolver* s = gsl_root_fsolver_alloc(gsl_root_fsolver_brent);
    gsl_root_fsolver_set(s, &fn, a, b);
    double x = 0.5 * (a + b);
    for (int it = 0; it < 60; ++it) {
        gsl_root_fsolver_iterate(s);
        x = gsl_root_fsolver_root(s);
        const double h = prob.eval(x);
        if (std::abs(h) < opt.phase_tol) break;
        if (gsl_root_test_interval(gsl_root_fsolver_x_lower(s), gsl_root_fsolver_x_upper(s), 1e-10, 0.0) ==
            GSL_SUCCESS)
            break;
    }
    gsl_root_fsolver_free(s);
    prob.eval(x);
    if (std::abs(wrap_phase(prob.last.delta_theta - target_phase)) > 100.0 * opt.phase_tol)
        throw StoreTimeNotFound("root refinement did not converge to the target phase", res.scan);
    res.t_store = x;
    res.report = prob.last;
    res.report.t_store_solution = x;
    return res;
}

cd PiParametrization::value(double t) const {
    const double w = 0.4 * edge;
    cd out{};
    for (int k = 0; k < kBumps && k < static_cast<int>(coefficients.size()); ++k) {
        const double c = (k < 4) ? (k + 1) * edge / 5.0 : t_pi_end - edge + (k - 3) * edge / 5.0;
        const double x = t - c;
        if (std::abs(x) < 0.5 * w) out += coefficients[static_cast<std::size_t>(k)] * 0.5 * (1.0 + std::cos(2.0 * kPi * x / w));
    }
    return out;
}

double tle_stage_dt(const SystemConfig& sys) {
    const double g = std::abs(sys.rates().g_tle);
    return g > 0.0 ? 0.005 / g : 0.005 * sys.tau_g;
}

TleObjective evaluate_pi_control(const PiParametrization& p, const SystemConfig& sys, const PiWeights& w) {
    const Rates r = sys.rates();
    const TleVector y =
        propagate_tle(tle_initial_state(), [&](double t) { return p.value(t); }, p.t_pi_end, tle_stage_dt(sys), r);
    TleObjective o;
    o.p1 = std::norm(y(0));
    o.p2 = std::norm(y(3));
    o.delta_theta = wrap_phase(std::arg(y(3)) - 2.0 * std::arg(y(0)));
    const double d = wrap_phase(o.delta_theta - kPi);
    o.j = w.w1 * (1.0 - o.p1) + w.w2 * (1.0 - o.p2) + w.w3 * d * d;
    return o;
}

PiParametrization seed_pi_control(const SystemConfig& sys, const PiWeights& w) {
    const double g = std::abs(sys.rates().g_tle);
    if (!(g > 0.0)) throw ConfigError("TLE coupling g must be non-zero to seed the control");
    const double edge = 0.2 / g;
    const double amp = (kPi / 2.0) / (0.8 * edge);
    const double centre = 12.0 * kPi / g;
    PiParametrization best;
    double best_j = 1e300;
    for (int i = 0; i <= 120; ++i) {
        const double tw = centre * (0.97 + 0.06 * i / 120.0);
        PiParametrization p{tw + edge, edge, std::vector<cd>(PiParametrization::kBumps, cd{amp, 0.0})};
        const double j = evaluate_pi_control(p, sys, w).j;
        if (j < best_j) {
            best_j = j;
            best = p;
        }
    }
    return best;
}

namespace {

struct PiProblem {
    const SystemConfig* sys;
    const PiWeights* w;
    PiParametrization shape;
    int evals = 0;
    PiParametrization from(const gsl_vector* x) const {
        PiParametrization p = shape;
        for (int k = 0; k < PiParametrization::kBumps; ++k)
            p.coefficients[static_cast<std::size_t>(k)] = cd{gsl_vector_get(x, k), gsl_vector_get(x, k + PiParametrization::kBumps)};
        return p;
    }
};

double pi_trampoline(const gsl_vector* x, void* params) {
    auto* prob = static_cast<PiProblem*>(params);
    ++prob->evals;
    return evaluate_pi_control(prob->from(x), *prob->sys, *prob->w).j;
}

GateReport tle_report(const TleObjective& o) {
    GateReport g;
    g.f1 = o.p1;
    g.f2 = o.p2;
    g.delta_theta = o.delta_theta;
    return g;
}

}  // namespace

PiOptimization optimize_pi_control(const SystemConfig& sys, const PiParametrization& init, const PiWeights& w,
                                   int budget) {
    if (sys.nonlinearity != NonlinearityKind::TwoLevelEmitter)
        throw ConfigError("Pi optimization needs nonlinearity = tle");
    constexpr int kb = PiParametrization::kBumps;
    PiProblem prob{&sys, &w, init, 0};
    prob.shape.coefficients.resize(kb);

    gsl_vector* x = gsl_vector_alloc(2 * kb);
    gsl_vector* step = gsl_vector_alloc(2 * kb);
    double scale = 0.0;
    for (int k = 0; k < kb; ++k) scale = std::max(scale, std::abs(prob.shape.coefficients[static_cast<std::size_t>(k)]));
    if (scale == 0.0) scale = init.edge > 0.0 ? (kPi / 2.0) / (0.8 * init.edge) : 1.0;
    for (int k = 0; k < kb; ++k) {
        gsl_vector_set(x, k, prob.shape.coefficients[static_cast<std::size_t>(k)].real());
        gsl_vector_set(x, k + kb, prob.shape.coefficients[static_cast<std::size_t>(k)].imag());
        gsl_vector_set(step, k, 0.05 * scale);
        gsl_vector_set(step, k + kb, 0.05 * scale);
    }
    gsl_multimin_function fn{&pi_trampoline, static_cast<std::size_t>(2 * kb), &prob};
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2 * kb);
    gsl_multimin_fminimizer_set(s, &fn, x, step);
    while (prob.evals < budget) {
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-10) == GSL_SUCCESS) break;
    }
    PiOptimization out;
    out.best = prob.from(gsl_multimin_fminimizer_x(s));
    out.evaluations = prob.evals;
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(step);
    gsl_vector_free(x);

    out.objective = evaluate_pi_control(out.best, sys, w);
    const TleObjective start = evaluate_pi_control(init, sys, w);
    if (start.j < out.objective.j) {
        out.best = init;
        out.objective = start;
    }
    out.report = tle_report(out.objective);
    out.converged = (1.0 - out.objective.p1) < 1e-2 && (1.0 - out.objective.p2) < 1e-2 &&
                    std::abs(wrap_phase(out.objective.delta_theta - kPi)) < 0.05;
    return out;
}

}  // namespace qcav
