#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qcav/config_model.hpp"
#include "qcav/linear_dynamics.hpp"
#include "qcav/two_photon_engine.hpp"

namespace qcav {

// Brute-force time-bin propagation with first-order collision updates.
// Bins are numbered 1..N; bin n is the one the system meets on step n and
// corresponds to sample index n of a uniform grid starting at t = 0.

struct OracleOptions {
    // Emission into bin n uses the system amplitude before step n (literal)
    // rather than after it.
    bool literal_indexing = true;
    // Negative control: flips the sign of the absorption coupling only.
    bool corrupt_coupling_sign = false;
};

struct BinState1 {
    std::size_t n_bins = 0;
    double dt = 0.0;
    std::vector<cd> bin_amps;  // index 1..N, amplitude of |1_k> (includes sqrt(dt))
    Vec2 sys_amps = Vec2::Zero();
    double norm() const;
};

struct BinState2 {
    static constexpr std::size_t kMaxBins = 256;
    std::size_t n_bins = 0;
    double dt = 0.0;
    Eigen::MatrixXcd pairs;   // (j, k), j < k: |00>|1_j 1_k>
    Eigen::MatrixXcd single;  // 2 x (N+1): |10>|1_k>, |01>|1_k>
    Vec4 sys = Vec4::Zero();  // |20>, |11>, |02>, |001>
    double norm() const;
};

BinState1 make_bin_state1(const std::vector<cd>& xi, double dt);
// Symmetrized two-photon input: sqrt(2) xi_j xi_k dt for j < k.
BinState2 make_bin_state2(const std::vector<cd>& xi, double dt);

// xi and lambda are indexed by bin (entry 0 is unused).
BinState1 step_single(const BinState1& s, std::size_t n, const Rates& r, const std::vector<cd>& xi,
                      const std::vector<cd>& lambda, const OracleOptions& opt = {});
BinState2 step_pair(const BinState2& s, std::size_t n, const Rates& r, const NonlinearTerms& terms,
                    const std::vector<cd>& xi, const std::vector<cd>& lambda, const OracleOptions& opt = {});

BinState1 run_single_oracle(const std::vector<cd>& xi, const std::vector<cd>& lambda, double dt, const Rates& r,
                            const OracleOptions& opt = {});
BinState2 run_pair_oracle(const std::vector<cd>& xi, const std::vector<cd>& lambda, double dt, const Rates& r,
                          const NonlinearTerms& terms, const OracleOptions& opt = {});

// Two-photon output amplitude xi_out(t_j, t_k) for j < k.
cd pair_output(const BinState2& s, std::size_t j, std::size_t k);

using TimeFunction = std::function<cd(double)>;

// Smooth drive used when no configuration is supplied: a Gaussian photon and
// a slowly varying complex control on [0, t_end], gamma = 1 Omega_G.
struct OracleProblem {
    SystemConfig system;
    TimeFunction control;
    TimeFunction xi_in;
    double t_end = 10.0;
};

OracleProblem reference_oracle_problem();

// The config's input photon with a fixed smooth control on [0, 2 t_in].
OracleProblem oracle_problem_from(const RunConfig& cfg);

struct ConvergenceRow {
    std::size_t n_bins = 0;
    double dt = 0.0;
    double output_error = 0.0;  // max |xi_out oracle - reference|
    double state_error = 0.0;   // |final system state difference|
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    double order = 0.0;  // fitted slope of log(output_error) against log(dt)
};

ConvergenceReport convergence_report(const SystemConfig& cfg, const TimeFunction& control, const TimeFunction& xi_in,
                                     double t_end, const std::vector<std::size_t>& n_list,
                                     const OracleOptions& opt = {});

struct PairComparison {
    std::size_t n_bins = 0;
    double dt = 0.0;
    double max_error = 0.0;
    double max_amplitude = 0.0;
    double input_norm = 0.0;
};

// Oracle xi_out(tau, t) against assemble_output on the same uniform grid.
PairComparison compare_pair(const SystemConfig& cfg, const TimeFunction& control, const TimeFunction& xi_in,
                            double t_end, std::size_t n_bins, const OracleOptions& opt = {});

}  // namespace qcav
