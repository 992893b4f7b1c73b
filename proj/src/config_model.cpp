#include "qcav/config_model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qcav/errors.hpp"

namespace qcav {

std::string to_string(NonlinearityKind kind) {
    switch (kind) {
        case NonlinearityKind::Chi3: return "chi3";
        case NonlinearityKind::Chi2Shg: return "chi2";
        case NonlinearityKind::TwoLevelEmitter: return "tle";
        case NonlinearityKind::LinearOnly: return "linear";
    }
    return "linear";
}

NonlinearityKind parse_nonlinearity(const std::string& name) {
    if (name == "chi3") return NonlinearityKind::Chi3;
    if (name == "chi2") return NonlinearityKind::Chi2Shg;
    if (name == "tle") return NonlinearityKind::TwoLevelEmitter;
    if (name == "linear") return NonlinearityKind::LinearOnly;
    throw ConfigError("unknown nonlinearity '" + name + "' (expected chi3|chi2|tle|linear)");
}

Rates SystemConfig::rates() const {
    const double w = omega_g();
    Rates r;
    r.gamma = gamma * w;
    r.gamma_l = gamma_l * w;
    r.big_gamma = big_gamma() * w;
    r.delta_a = delta_a * w;
    r.delta_b = delta_b * w;
    r.delta_c = delta_c * w;
    r.delta_e = delta_e * w;
    r.chi2 = chi2 * w;
    r.chi3 = chi3 * w;
    r.g_tle = g_tle * w;
    r.gamma_e = gamma_e * w;
    r.xpm = nonlinearity == NonlinearityKind::Chi3 || nonlinearity == NonlinearityKind::TwoLevelEmitter;
    return r;
}

Detunings derive_detunings(const FrequencyLadder& l, NonlinearityKind kind) {
    Detunings d;
    d.delta_a = l.omega_a - l.omega_w;
    if (kind == NonlinearityKind::Chi2Shg) {
        d.delta_lambda = l.omega_p - (l.omega_b - l.omega_a);
        d.delta_b = d.delta_lambda + d.delta_a;
        d.delta_c = l.omega_c - 2.0 * l.omega_b;
        return d;
    }
    d.delta_lambda = (l.omega_2 - l.omega_1) - (l.omega_a - l.omega_b);
    d.delta_pi = (l.omega_3 - l.omega_1) - (l.omega_b - l.omega_c);
    d.delta_b = d.delta_lambda + d.delta_a;
    d.delta_c = d.delta_pi + d.delta_b;
    d.delta_e = l.omega_e - l.omega_c;
    return d;
}

std::vector<std::string> validate(const SystemConfig& c, const ScheduleSpec& s) {
    std::vector<std::string> out;
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(c.gamma) || c.gamma < 0.0) out.emplace_back("negative coupling rate gamma");
    if (!finite(c.gamma_l) || c.gamma_l < 0.0) out.emplace_back("negative loss rate gamma_l");
    if (!finite(c.gamma_e) || c.gamma_e < 0.0) out.emplace_back("negative emitter decay rate gamma_e");
    if (!finite(c.chi2) || c.chi2 < 0.0) out.emplace_back("negative chi2");
    if (!finite(c.chi3) || c.chi3 < 0.0) out.emplace_back("negative chi3");
    if (!finite(c.delta_a) || !finite(c.delta_b) || !finite(c.delta_c) || !finite(c.delta_e))
        out.emplace_back("non-finite detuning");
    if (!(c.tau_g > 0.0)) out.emplace_back("tau_g must be positive");
    if (!(s.t_in > 0.0)) out.emplace_back("t_in must be positive");
    if (!(s.tau_o > 0.0)) out.emplace_back("tau_o must be positive");
    if (!(s.tau_e > 0.0)) out.emplace_back("tau_e must be positive");
    if (!(s.eps_eta > 0.0 && s.eps_eta < 1.0)) out.emplace_back("eps_eta must lie in (0,1)");
    if (!(s.t_store > s.t_in + s.tau_o)) out.emplace_back("absorption/emission windows overlap (need t_store > t_in + tau_o)");
    return out;
}

namespace {

const std::vector<std::string> kKeys = {"gamma",   "gamma_l", "delta_a", "delta_b",     "delta_c", "delta_e",
                                        "nonlinearity", "chi2", "chi3", "g_tle", "gamma_e", "tau_g",
                                        "t_in",    "t_store", "tau_o",   "tau_e",       "eps_eta", "dt"};

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* b = text.data();
    const char* e = b + text.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e || !std::isfinite(v))
        throw ConfigError("invalid number for '" + key + "': '" + text + "'");
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

const std::vector<std::string>& config_keys() { return kKeys; }

bool is_numeric_key(const std::string& key) {
    for (const auto& k : kKeys)
        if (k == key) return key != "nonlinearity";
    return false;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto& s = cfg.system;
    auto& h = cfg.schedule;
    if (key == "nonlinearity") {
        s.nonlinearity = parse_nonlinearity(value);
        return;
    }
    if (!is_numeric_key(key)) throw ConfigError("unknown config key '" + key + "'");
    const double v = parse_double(key, value);
    if (key == "gamma") s.gamma = v;
    else if (key == "gamma_l") s.gamma_l = v;
    else if (key == "delta_a") s.delta_a = v;
    else if (key == "delta_b") s.delta_b = v;
    else if (key == "delta_c") s.delta_c = v;
    else if (key == "delta_e") s.delta_e = v;
    else if (key == "chi2") s.chi2 = v;
    else if (key == "chi3") s.chi3 = v;
    else if (key == "g_tle") s.g_tle = cd{v, 0.0};
    else if (key == "gamma_e") s.gamma_e = v;
    else if (key == "tau_g") s.tau_g = v;
    else if (key == "t_in") h.t_in = v;
    else if (key == "t_store") h.t_store = v;
    else if (key == "tau_o") h.tau_o = v;
    else if (key == "tau_e") h.tau_e = v;
    else if (key == "eps_eta") h.eps_eta = v;
    else if (key == "dt") cfg.dt = v;
}

std::string get_config_value(const RunConfig& cfg, const std::string& key) {
    const auto& s = cfg.system;
    const auto& h = cfg.schedule;
    if (key == "nonlinearity") return to_string(s.nonlinearity);
    if (key == "gamma") return fmt(s.gamma);
    if (key == "gamma_l") return fmt(s.gamma_l);
    if (key == "delta_a") return fmt(s.delta_a);
    if (key == "delta_b") return fmt(s.delta_b);
    if (key == "delta_c") return fmt(s.delta_c);
    if (key == "delta_e") return fmt(s.delta_e);
    if (key == "chi2") return fmt(s.chi2);
    if (key == "chi3") return fmt(s.chi3);
    if (key == "g_tle") return fmt(s.g_tle.real());
    if (key == "gamma_e") return fmt(s.gamma_e);
    if (key == "tau_g") return fmt(s.tau_g);
    if (key == "t_in") return fmt(h.t_in);
    if (key == "t_store") return fmt(h.t_store);
    if (key == "tau_o") return fmt(h.tau_o);
    if (key == "tau_e") return fmt(h.tau_e);
    if (key == "eps_eta") return fmt(h.eps_eta);
    if (key == "dt") return fmt(cfg.dt);
    throw ConfigError("unknown config key '" + key + "'");
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
        set_config_value(cfg, key, value);
    }
    if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string format_config(const RunConfig& cfg) {
    std::ostringstream os;
    for (const auto& k : kKeys) os << k << " = " << get_config_value(cfg, k) << '\n';
    return os.str();
}

}  // namespace qcav
