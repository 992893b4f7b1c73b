#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qcav/grid_signal.hpp"

namespace qcav {

enum class NonlinearityKind { Chi3, Chi2Shg, TwoLevelEmitter, LinearOnly };

std::string to_string(NonlinearityKind kind);
NonlinearityKind parse_nonlinearity(const std::string& name);

// Rates converted to inverse time units (time measured in the unit of tau_g).
struct Rates {
    double gamma = 0.0;
    double gamma_l = 0.0;
    double big_gamma = 0.0;
    double delta_a = 0.0;
    double delta_b = 0.0;
    double delta_c = 0.0;
    double delta_e = 0.0;
    double chi2 = 0.0;
    double chi3 = 0.0;
    cd g_tle{};
    double gamma_e = 0.0;
    bool xpm = false;
};

// Rates are stored in units of the pulse bandwidth Omega_G = 4 ln2 / tau_g.
struct SystemConfig {
    double gamma = 30.0;
    double gamma_l = 0.0;
    double delta_a = 0.0;
    double delta_b = 0.0;
    double delta_c = 0.0;
    double delta_e = 0.0;
    NonlinearityKind nonlinearity = NonlinearityKind::Chi3;
    double chi2 = 0.0;
    double chi3 = 0.0;
    cd g_tle{1.0, 0.0};
    double gamma_e = 0.0;
    double tau_g = 1.0;

    double big_gamma() const { return gamma + gamma_l; }
    double omega_g() const { return 4.0 * kLn2 / tau_g; }
    Rates rates() const;
};

struct ScheduleSpec {
    double t_in = 2.5;
    double t_store = 9.0;
    double tau_o = 4.08;
    double tau_e = 1.0;
    double eps_eta = 1e-4;

    double t_out() const { return t_in + t_store; }
    double absorb_end() const { return 2.0 * t_in; }
    double emit_start() const { return t_out() - tau_o; }
    double total() const { return t_out() + tau_o; }
};

struct FrequencyLadder {
    double omega_w = 0.0;
    double omega_a = 0.0;
    double omega_b = 0.0;
    double omega_c = 0.0;
    double omega_e = 0.0;
    double omega_p = 0.0;
    double omega_1 = 0.0;
    double omega_2 = 0.0;
    double omega_3 = 0.0;
};

struct Detunings {
    double delta_a = 0.0;
    double delta_b = 0.0;
    double delta_c = 0.0;
    double delta_e = 0.0;
    double delta_lambda = 0.0;
    double delta_pi = 0.0;
};

Detunings derive_detunings(const FrequencyLadder& ladder, NonlinearityKind kind);

std::vector<std::string> validate(const SystemConfig& config, const ScheduleSpec& schedule);

// Everything a config file can set.
struct RunConfig {
    SystemConfig system;
    ScheduleSpec schedule;
    double dt = 0.005;
};

const std::vector<std::string>& config_keys();
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& cfg, const std::string& key);
bool is_numeric_key(const std::string& key);

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);
std::string format_config(const RunConfig& cfg);

}  // namespace qcav
