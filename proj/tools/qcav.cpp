#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcav/config_model.hpp"
#include "qcav/control_synthesis.hpp"
#include "qcav/discrete_oracle.hpp"
#include "qcav/errors.hpp"
#include "qcav/gate_protocols.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace qcav;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kInfeasible = 3, kNumeric = 4, kMismatch = 5 };

struct Globals {
    std::string config_path;
    std::string out_dir = "out";
    double dt = 0.0;
    int jobs = 1;
};

class Csv {
public:
    Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw ConfigError("cannot write " + path.string());
        out_ << std::setprecision(17);
        row_strings(header);
    }
    template <class... T>
    void row(const T&... v) {
        bool first = true;
        ((out_ << (first ? "" : ",") << v, first = false), ...);
        out_ << '\n';
    }
    void row_strings(const std::vector<std::string>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
        out_ << '\n';
    }
    std::ostream& stream() { return out_; }

private:
    std::ofstream out_;
};

RunConfig resolve_config(const Globals& g) {
    RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
    if (g.dt > 0.0) cfg.dt = g.dt;
    return cfg;
}

fs::path prepare_out(const Globals& g) {
    fs::path p(g.out_dir);
    fs::create_directories(p);
    return p;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg, const json& extra = {}) {
    json m;
    m["command"] = command;
    json c;
    for (const auto& k : config_keys()) c[k] = get_config_value(cfg, k);
    m["config"] = c;
    m["schedule"] = {{"t_in", cfg.schedule.t_in},
                     {"t_store", cfg.schedule.t_store},
                     {"t_out", cfg.schedule.t_out()},
                     {"emission_window", {cfg.schedule.emit_start(), cfg.schedule.total()}}};
    m["output_directory"] = dir.string();
    m["determinism"] = "outputs are pure functions of the configuration; no random numbers are drawn";
    if (!extra.is_null()) m["run"] = extra;
    std::ofstream(dir / "manifest.json") << std::setw(2) << m << '\n';
}

json timeline_json(const Timeline& tl) {
    json j{{"dt", tl.dt}, {"n_points", tl.n_points}, {"absorb_end_index", tl.absorb_end},
           {"emit_start_index", tl.emit_start}, {"gap", tl.gap}};
    j["gap_after_index"] = tl.gap_after ? json(*tl.gap_after) : json(nullptr);
    return j;
}

void write_metrics(const fs::path& path, const std::vector<std::pair<std::string, double>>& kv) {
    std::ofstream out(path);
    out << std::setprecision(17);
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

std::vector<std::pair<std::string, double>> single_metrics(const SinglePhotonRun& run) {
    const auto& m = run.metrics;
    return {{"p_pass", m.p_pass},   {"eta", run.emission.control.eta}, {"eta_measured", m.eta_measured},
            {"p_l", m.p_l},         {"f1", m.f1},                      {"theta1", m.theta1},
            {"f1_cond", m.f1_cond}};
}

// ---------------------------------------------------------------- commands

int cmd_synthesize(const Globals& g) {
    const RunConfig cfg = resolve_config(g);
    const auto dir = prepare_out(g);
    const SinglePhotonRun run = run_single(cfg);
    const Timeline& tl = run.drive.timeline;

    Csv control(dir / "control.csv", {"t", "abs_lambda", "phase", "re_lambda", "im_lambda"});
    for (std::size_t k = 0; k < tl.n_points; ++k) {
        const cd l = run.drive.lambda[k];
        control.row(tl.time(k), std::abs(l), std::arg(l), l.real(), l.imag());
    }
    Csv feas(dir / "feasibility.csv", {"stage", "t", "denominator", "window"});
    auto dump = [&](const char* stage, const Synthesis& s) {
        const auto& d = s.aux.denominator;
        for (std::size_t k = 0; k < d.size(); ++k) feas.row(stage, d.time(k), d[k].real(), s.aux.window[k].real());
    };
    dump("absorption", run.absorption);
    dump("emission", run.emission);
    std::ofstream(dir / "eta.txt") << std::setprecision(17) << run.emission.control.eta << '\n';
    for (const auto& d : run.absorption.aux.diagnostics) std::cerr << "note: " << d << '\n';
    write_manifest(dir, "synthesize", cfg, {{"timeline", timeline_json(tl)}});
    return kOk;
}

int cmd_simulate(const Globals& g, int photons, bool dump_matrix) {
    if (photons != 1 && photons != 2) throw ConfigError("photons must be 1 or 2");
    const RunConfig cfg = resolve_config(g);
    const auto dir = prepare_out(g);
    if (photons == 1) {
        const SinglePhotonRun run = run_single(cfg);
        const Timeline& tl = run.drive.timeline;
        Csv tr(dir / "traces.csv", {"t", "psi10_sq", "psi01_sq", "xi_out_sq"});
        for (std::size_t k = 0; k < tl.n_points; ++k)
            tr.row(tl.time(k), std::norm(run.trace.psi10[k]), std::norm(run.trace.psi01[k]),
                   std::norm(run.trace.xi_out[k]));
        write_metrics(dir / "metrics.txt", single_metrics(run));
        write_manifest(dir, "simulate", cfg, {{"photons", 1}, {"timeline", timeline_json(tl)}});
        return kOk;
    }
    AssembleOptions opt;
    opt.keep_matrix = dump_matrix;
    const GateRun gate = run_gate(cfg, true, opt);
    const Timeline& tl = gate.single.drive.timeline;
    const auto& o = gate.field.occupation;
    Csv tr(dir / "traces.csv", {"t", "p00", "p10", "p01", "p20", "p11", "p02", "p001", "total"});
    for (std::size_t k = 0; k < tl.n_points; ++k)
        tr.row(tl.time(k), o.p00[k], o.p10[k], o.p01[k], o.p20[k], o.p11[k], o.p02[k], o.p001[k], o.total(k));
    Csv diag(dir / "xi_out_diag.csv", {"t", "re", "im", "abs_sq"});
    for (std::size_t k = 0; k < tl.n_points; ++k) {
        const cd v = gate.field.diagonal[k];
        diag.row(tl.time(k), v.real(), v.imag(), std::norm(v));
    }
    if (dump_matrix) {
        Csv mat(dir / "xi_out_matrix.csv", {"tau", "t", "re", "im"});
        for (std::size_t i = 0; i < tl.n_points; ++i)
            for (std::size_t k = 0; k < tl.n_points; ++k) {
                const cd v = gate.field.xi_out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
                mat.row(tl.time(i), tl.time(k), v.real(), v.imag());
            }
    }
    auto kv = single_metrics(gate.single);
    kv.insert(kv.end(), {{"f2", gate.report.f2},
                         {"theta2", gate.report.theta2},
                         {"delta_theta", gate.report.delta_theta},
                         {"two_photon_norm", gate.field.norm}});
    write_metrics(dir / "metrics.txt", kv);
    write_manifest(dir, "simulate", cfg, {{"photons", 2}, {"timeline", timeline_json(tl)}});
    return kOk;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct SweepRow {
    std::string value;
    std::string status = "ok";
    SinglePhotonRun run;
    GateReport gate;
};

int cmd_sweep(const Globals& g, const std::string& key, const std::string& values, int photons) {
    if (!is_numeric_key(key)) throw ConfigError("sweep key must be a numeric config key: " + key);
    const auto vals = split_list(values);
    if (vals.empty()) throw ConfigError("sweep needs at least one value");
    if (photons != 1 && photons != 2) throw ConfigError("photons must be 1 or 2");
    const RunConfig base = resolve_config(g);
    std::vector<RunConfig> cfgs;
    for (const auto& v : vals) {
        RunConfig c = base;
        set_config_value(c, key, v);
        cfgs.push_back(c);
    }
    const auto dir = prepare_out(g);

    auto point = [&](std::size_t i) {
        SweepRow r;
        r.value = vals[i];
        try {
            if (photons == 1) {
                r.run = run_single(cfgs[i]);
            } else {
                GateRun gr = run_gate(cfgs[i]);
                r.run = std::move(gr.single);
                r.gate = gr.report;
            }
        } catch (const InfeasibleError& e) {
            r.status = "infeasible";
        } catch (const NumericError& e) {
            r.status = "numeric";
        } catch (const ConfigError& e) {
            r.status = "config";
        }
        return r;
    };
    std::vector<SweepRow> rows(vals.size());
    const std::size_t jobs = static_cast<std::size_t>(std::max(1, g.jobs));
    for (std::size_t start = 0; start < vals.size(); start += jobs) {
        std::vector<std::future<SweepRow>> batch;
        for (std::size_t i = start; i < std::min(vals.size(), start + jobs); ++i)
            batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, point, i));
        for (std::size_t i = 0; i < batch.size(); ++i) rows[start + i] = batch[i].get();
    }

    std::vector<std::string> header{key, "status", "p_pass", "eta", "eta_measured", "p_l", "f1", "theta1", "f1_cond",
                                    "f1_cond_law"};
    if (photons == 2) header.insert(header.end(), {"f2", "theta2", "delta_theta"});
    Csv csv(dir / "sweep.csv", header);
    const double nan = std::nan("");
    for (const auto& r : rows) {
        auto& os = csv.stream();
        os << r.value << ',' << r.status;
        const bool ok = r.status == "ok";
        const auto& m = r.run.metrics;
        const double law = ok ? m.eta_measured / (m.p_pass + m.eta_measured) : nan;
        for (double v : {m.p_pass, r.run.emission.control.eta, m.eta_measured, m.p_l, m.f1, m.theta1, m.f1_cond, law})
            os << ',' << (ok ? v : nan);
        if (photons == 2)
            for (double v : {r.gate.f2, r.gate.theta2, r.gate.delta_theta}) os << ',' << (ok ? v : nan);
        os << '\n';
    }
    write_manifest(dir, "sweep", base, {{"key", key}, {"values", vals}, {"photons", photons}, {"jobs", g.jobs}});
    return kOk;
}

int cmd_gate(const Globals& g, const std::string& kind) {
    RunConfig cfg = resolve_config(g);
    const auto dir = prepare_out(g);
    GateReport rep;
    json extra{{"kind", kind}};
    if (kind == "chi3") {
        cfg.system.nonlinearity = NonlinearityKind::Chi3;
        const StoreTimeResult r = find_store_time(cfg);
        rep = r.report;
        Csv scan(dir / "scan.csv", {"t_store", "phase_error"});
        for (const auto& [t, h] : r.scan) scan.row(t, h);
    } else if (kind == "chi2") {
        cfg.system.nonlinearity = NonlinearityKind::Chi2Shg;
        cfg.schedule.t_store = chi2_flip_store_time(cfg.system);
        rep = run_gate(cfg).report;
    } else if (kind == "tle") {
        cfg.system.nonlinearity = NonlinearityKind::TwoLevelEmitter;
        const PiParametrization seed = seed_pi_control(cfg.system);
        const PiOptimization opt = optimize_pi_control(cfg.system, seed);
        rep = opt.report;
        extra["converged"] = opt.converged;
        extra["evaluations"] = opt.evaluations;
        extra["objective"] = opt.objective.j;
        Csv pi(dir / "pi_control.csv", {"t", "re_pi", "im_pi"});
        const std::size_t n = 2000;
        for (std::size_t k = 0; k <= n; ++k) {
            const double t = opt.best.t_pi_end * static_cast<double>(k) / static_cast<double>(n);
            const cd v = opt.best.value(t);
            pi.row(t, v.real(), v.imag());
        }
        rep.t_store_solution = opt.best.t_pi_end;
    } else {
        throw ConfigError("gate kind must be chi3, chi2 or tle");
    }
    write_metrics(dir / "gate.txt", {{"f1", rep.f1},
                                     {"theta1", rep.theta1},
                                     {"f2", rep.f2},
                                     {"theta2", rep.theta2},
                                     {"delta_theta", rep.delta_theta},
                                     {"p_pass", rep.p_pass},
                                     {"eta", rep.eta},
                                     {"p_l", rep.p_l},
                                     {"t_store_solution", rep.t_store_solution}});
    write_manifest(dir, "gate", cfg, extra);
    return kOk;
}

int cmd_oracle_check(const Globals& g, const std::string& bins, int photons, bool literal, bool corrupt) {
    std::vector<std::size_t> n_list;
    for (const auto& s : split_list(bins)) {
        const long v = std::stol(s);
        if (v < 4) throw ConfigError("bin counts must be at least 4");
        n_list.push_back(static_cast<std::size_t>(v));
    }
    if (n_list.empty()) throw ConfigError("oracle-check needs at least one bin count");
    std::sort(n_list.begin(), n_list.end());
    if (photons != 1 && photons != 2) throw ConfigError("photons must be 1 or 2");

    RunConfig cfg = resolve_config(g);
    const OracleProblem prob = g.config_path.empty() ? reference_oracle_problem() : oracle_problem_from(cfg);
    if (g.config_path.empty()) cfg.system = prob.system;
    OracleOptions opt;
    opt.literal_indexing = literal;
    opt.corrupt_coupling_sign = corrupt;
    const auto dir = prepare_out(g);

    bool pass = true;
    std::ostringstream report;
    report << std::setprecision(6);
    if (photons == 1) {
        if (n_list.size() < 2) throw ConfigError("single-photon check needs at least two bin counts");
        const ConvergenceReport rep = convergence_report(prob.system, prob.control, prob.xi_in, prob.t_end, n_list, opt);
        Csv csv(dir / "oracle.csv", {"n_bins", "dt", "output_error", "state_error"});
        for (const auto& r : rep.rows) csv.row(r.n_bins, r.dt, r.output_error, r.state_error);
        pass = std::abs(rep.order - 1.0) <= 0.2;
        report << "fitted order = " << rep.order << '\n';
    } else {
        for (std::size_t n : n_list)
            if (n > BinState2::kMaxBins) throw ConfigError("bin budget exceeded: at most 256 bins for two photons");
        std::vector<std::size_t> list = n_list;
        if (list.size() == 1) list.insert(list.begin(), list.front() / 2);
        Csv csv(dir / "oracle.csv", {"n_bins", "dt", "max_error", "max_amplitude", "error_over_dt"});
        std::vector<PairComparison> cmp;
        for (std::size_t n : list) {
            cmp.push_back(compare_pair(prob.system, prob.control, prob.xi_in, prob.t_end, n, opt));
            const auto& c = cmp.back();
            csv.row(c.n_bins, c.dt, c.max_error, c.max_amplitude, c.max_error / c.dt);
        }
        const double order = std::log(cmp.front().max_error / cmp.back().max_error) /
                             std::log(cmp.front().dt / cmp.back().dt);
        pass = std::abs(order - 1.0) <= 0.2;
        report << "fitted order = " << order << '\n';
    }
    report << (pass ? "PASS" : "FAIL") << '\n';
    std::ofstream(dir / "report.txt") << report.str();
    std::cout << report.str();
    write_manifest(dir, "oracle-check", cfg, {{"photons", photons}, {"bins", n_list}, {"literal_indexing", literal}});
    if (!pass) throw OracleMismatch("oracle and ODE engines disagree beyond the first-order bound");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity control synthesis and photon scattering simulator"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "Configuration file (key = value)");
    app.add_option("--out", g.out_dir, "Output directory");
    app.add_option("--dt", g.dt, "Override the time step [tau_G]")->check(CLI::PositiveNumber);
    app.add_option("--jobs", g.jobs, "Concurrent sweep points")->check(CLI::PositiveNumber);

    auto* syn = app.add_subcommand("synthesize", "Write absorption and emission controls");

    int photons = 1;
    bool dump_matrix = false;
    auto* sim = app.add_subcommand("simulate", "Propagate one or two photons through the full schedule");
    sim->add_option("--photons", photons, "1 or 2");
    sim->add_flag("--dump-matrix", dump_matrix, "Write the full two-photon output amplitude");

    std::string key, values;
    int sweep_photons = 1;
    auto* sweep = app.add_subcommand("sweep", "Scan one numeric configuration key");
    sweep->add_option("--key", key, "Config key")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required();
    sweep->add_option("--photons", sweep_photons, "1 or 2");

    std::string kind;
    auto* gate = app.add_subcommand("gate", "Solve a controlled-phase gate");
    gate->add_option("--kind", kind, "chi3, chi2 or tle")->required();

    std::string bins = "100,200,400,800";
    int oracle_photons = 1;
    bool shifted = false, corrupt = false;
    auto* oracle = app.add_subcommand("oracle-check", "Compare the time-bin oracle against the ODE engines");
    oracle->add_option("--bins", bins, "Bin counts, comma separated");
    oracle->add_option("--photons", oracle_photons, "1 or 2");
    oracle->add_flag("--shifted-indexing", shifted, "Emit from the post-step amplitude");
    oracle->add_flag("--corrupt-coupling-sign", corrupt)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*syn) return cmd_synthesize(g);
        if (*sim) return cmd_simulate(g, photons, dump_matrix);
        if (*sweep) return cmd_sweep(g, key, values, sweep_photons);
        if (*gate) return cmd_gate(g, kind);
        if (*oracle) return cmd_oracle_check(g, bins, oracle_photons, !shifted, corrupt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const StoreTimeNotFound& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumeric;
    } catch (const OracleMismatch& e) {
        std::cerr << "oracle mismatch: " << e.what() << '\n';
        return kMismatch;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
