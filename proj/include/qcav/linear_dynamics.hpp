#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "qcav/config_model.hpp"
#include "qcav/grid_signal.hpp"
#include "qcav/timeline.hpp"

namespace qcav {

using Vec2 = Eigen::Matrix<cd, 2, 1>;
using Mat2 = Eigen::Matrix<cd, 2, 2>;

// Coefficient matrix of (psi10, psi01) for a given control value.
Mat2 one_photon_matrix(const Rates& r, cd lambda);

// Exact control-free propagator over an idle interval.
Mat2 idle_propagator_one(const Rates& r, double duration);

struct SingleModeTrace {
    SampledSignal psi1;
    SampledSignal xi_out;
};

struct TwoModeTrace {
    SampledSignal psi10;
    SampledSignal psi01;
    SampledSignal xi_out;
};

SingleModeTrace propagate_one_mode(const SampledSignal& xi_in, const SystemConfig& cfg);

// Steps (psi10, psi01) from index `from` to `to`, optionally recording every sample.
Vec2 advance_two_mode(Vec2 y, const Drive& d, const Rates& r, std::size_t from, std::size_t to,
                      std::vector<Vec2>* record = nullptr);

TwoModeTrace propagate_two_mode(const Drive& d, const Rates& r, Vec2 initial = Vec2::Zero());
TwoModeTrace propagate_two_mode(const SampledSignal& xi_in, const SampledSignal& control, const SystemConfig& cfg,
                                Vec2 initial = Vec2::Zero());

double pass_probability(const TwoModeTrace& trace, std::size_t pass_end);

struct HeraldedMetrics {
    double p_l = 0.0;
    double p_pass = 0.0;
    double f1 = 0.0;
    double theta1 = 0.0;
    double f1_cond = 0.0;
    double eta_measured = 0.0;
};

// Trapezoid over indices [a, b] of a sampled quantity.
double trapezoid(const std::vector<double>& v, double dt, std::size_t a, std::size_t b);

// P_pass integrates indices [0, pass_end]; the emitted share starts at emit_start.
HeraldedMetrics heralded_metrics(const SampledSignal& xi_out, const SampledSignal& target, std::size_t pass_end,
                                 std::size_t emit_start);

}  // namespace qcav
