#pragma once

#include <string>
#include <vector>

#include "qcav/config_model.hpp"
#include "qcav/grid_signal.hpp"

namespace qcav {

// Local time inside every synthesis routine is measured from the first grid
// point of the supplied signal.

struct ControlSolution {
    SampledSignal magnitude;
    SampledSignal phase;
    SampledSignal combined;
    double eta = 1.0;
};

struct ControlIntermediates {
    SampledSignal f;
    SampledSignal g;
    SampledSignal theta;
    SampledSignal big_f;
    SampledSignal x;
    SampledSignal y;
    SampledSignal r;
    SampledSignal denominator;
    SampledSignal window;
    SampledSignal xpm_phase;  // P(t) = 2 * cumulative integral of |Lambda|
    double c_const = 0.0;
    double eps_eta = 0.0;
    double first_feasible = 0.0;
    double last_feasible = 0.0;
    std::vector<std::string> diagnostics;
};

struct Synthesis {
    ControlSolution control;
    ControlIntermediates aux;
};

struct FeasibilityReport {
    SampledSignal profile;
    bool gronwall_ok = false;
};

FeasibilityReport feasibility_profile(const SampledSignal& xi_in, const SystemConfig& cfg,
                                      const SampledSignal* xi_dot = nullptr);

// Lossless bound xi^2 < (gamma/5) * cumulative integral of xi^2, checked past the first sample.
bool gronwall_bound_holds(const SampledSignal& xi, double gamma_rate);

Synthesis absorb_chi3(const SampledSignal& xi_in, const SystemConfig& cfg, const ScheduleSpec& sched,
                      const SampledSignal* xi_dot = nullptr);
Synthesis absorb_chi2(const SampledSignal& xi_in, const SystemConfig& cfg, const ScheduleSpec& sched,
                      const SampledSignal* xi_dot = nullptr);
Synthesis absorb(const SampledSignal& xi_in, const SystemConfig& cfg, const ScheduleSpec& sched,
                 const SampledSignal* xi_dot = nullptr);

// Integral of f_o for a unit target, from -infinity to infinity, in closed form.
double emission_integral_limit(const GaussianSpec& target, const TimeGrid& grid, const SystemConfig& cfg);

struct EtaChoice {
    double eta = 0.0;
    double eps = 0.0;
};

// Efficiency with the smallest margin (from eps_eta upward) that keeps the
// emission denominator positive on the whole window.
EtaChoice choose_eta(const GaussianSpec& target, const TimeGrid& grid, const SystemConfig& cfg,
                     const ScheduleSpec& sched, double psi01_mag);

double emission_efficiency(const GaussianSpec& target, const TimeGrid& grid, const SystemConfig& cfg,
                           const ScheduleSpec& sched, double psi01_mag);

// xi_target must already carry the sqrt(eta) scale.
Synthesis emit_chi3(const SampledSignal& xi_target, const SystemConfig& cfg, const ScheduleSpec& sched,
                    cd psi01_initial, const SampledSignal* xi_dot = nullptr);
Synthesis emit_chi2(const SampledSignal& xi_target, const SystemConfig& cfg, const ScheduleSpec& sched,
                    cd psi01_initial, const SampledSignal* xi_dot = nullptr);

// Picks eta, scales the Gaussian target and synthesizes the emission control.
Synthesis synthesize_emission(const GaussianSpec& target, const TimeGrid& grid, const SystemConfig& cfg,
                              const ScheduleSpec& sched, cd psi01_initial);

struct PumpDrive {
    SampledSignal q;
    SampledSignal psi1;
    SampledSignal psi2;
    SampledSignal r_alpha;
    SampledSignal phi1;
    SampledSignal phi2;
    double gamma_p = 0.0;
    double big_gamma_p = 0.0;
};

PumpDrive pump_backout(const ControlSolution& lambda, double chi3, double gamma_p, double big_gamma_p);

}  // namespace qcav
