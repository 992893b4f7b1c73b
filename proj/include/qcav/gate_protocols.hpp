#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "qcav/config_model.hpp"
#include "qcav/control_synthesis.hpp"
#include "qcav/linear_dynamics.hpp"
#include "qcav/nonlinear_models.hpp"
#include "qcav/timeline.hpp"
#include "qcav/two_photon_engine.hpp"

namespace qcav {

struct GateReport {
    double f1 = 0.0;
    double theta1 = 0.0;
    double f2 = 0.0;
    double theta2 = 0.0;
    double delta_theta = 0.0;
    double p_pass = 0.0;
    double eta = 0.0;
    double p_l = 0.0;
    double t_store_solution = 0.0;
};

double wrap_phase(double x);

struct SinglePhotonRun {
    Drive drive;
    Synthesis absorption;
    Synthesis emission;
    TwoModeTrace trace;
    std::vector<cd> target;  // G(t - T_out) on the timeline
    HeraldedMetrics metrics;
};

SampledSignal input_wavepacket(const RunConfig& cfg, const TimeGrid& grid);
SinglePhotonRun run_single(const RunConfig& cfg, bool compress = true);

// Default two-photon step: tau_G/100, halved until dt * Gamma <= 0.5.
double two_photon_dt(const SystemConfig& sys);

struct GateRun {
    SinglePhotonRun single;
    TwoPhotonAmplitudes amplitudes;
    TwoPhotonField field;
    GateReport report;
};

GateRun run_gate(const RunConfig& cfg, bool compress = true, const AssembleOptions& extra = {});
GateReport run_gate_chi3(const RunConfig& cfg);
GateReport run_gate_chi2(const RunConfig& cfg);

struct StoreTimeNotFound : std::runtime_error {
    std::vector<std::pair<double, double>> scan;
    StoreTimeNotFound(const std::string& what, std::vector<std::pair<double, double>> s)
        : std::runtime_error(what), scan(std::move(s)) {}
};

struct StoreTimeOptions {
    double t_max = 300.0;  // in units of tau_G
    double scan_step = 5.0;
    double phase_tol = 1e-4;
};

struct StoreTimeResult {
    double t_store = 0.0;
    GateReport report;
    std::vector<std::pair<double, double>> scan;
};

StoreTimeResult find_store_time(const RunConfig& cfg, double target_phase = 3.14159265358979323846,
                                const StoreTimeOptions& opt = {});

// Storage time giving one full |020> -> |001> -> |020> flip.
double chi2_flip_store_time(const SystemConfig& sys);

// Pi(t) on [0, t_pi_end]: four raised-cosine bumps tile [0, edge] and four tile
// [t_pi_end - edge, t_pi_end].
struct PiParametrization {
    double t_pi_end = 0.0;
    double edge = 0.0;
    std::vector<cd> coefficients;

    cd value(double t) const;
    static constexpr int kBumps = 8;
};

struct PiWeights {
    double w1 = 1.0;
    double w2 = 1.0;
    double w3 = 1.0 / (3.14159265358979323846 * 3.14159265358979323846);
};

struct TleObjective {
    double p1 = 0.0;
    double p2 = 0.0;
    double delta_theta = 0.0;  // arg phi20g - 2 arg phi10g, wrapped
    double j = 0.0;
};

double tle_stage_dt(const SystemConfig& sys);
TleObjective evaluate_pi_control(const PiParametrization& p, const SystemConfig& sys, const PiWeights& w = {});
PiParametrization seed_pi_control(const SystemConfig& sys, const PiWeights& w = {});

struct PiOptimization {
    PiParametrization best;
    TleObjective objective;
    GateReport report;
    bool converged = false;
    int evaluations = 0;
};

PiOptimization optimize_pi_control(const SystemConfig& sys, const PiParametrization& init, const PiWeights& w = {},
                                   int budget = 2000);

}  // namespace qcav
