#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qcav/config_model.hpp"
#include "qcav/linear_dynamics.hpp"
#include "qcav/nonlinear_models.hpp"
#include "qcav/timeline.hpp"

namespace qcav {

using Vec4 = Eigen::Matrix<cd, 4, 1>;
using Mat4 = Eigen::Matrix<cd, 4, 4>;

// Coefficients of (psi20, psi11, psi02, psi001) for a given control value.
Mat4 two_photon_matrix(const Rates& r, const NonlinearTerms& terms, cd lambda);
Mat4 idle_propagator_two(const Rates& r, const NonlinearTerms& terms, double duration);

struct PairInitial {
    Vec2 ii = Vec2::Zero();
    Vec4 two = Vec4::Zero();
};

struct TwoPhotonAmplitudes {
    std::vector<cd> psi10_ii, psi01_ii;
    std::vector<cd> psi20, psi11, psi02, psi001;
};

TwoPhotonAmplitudes propagate_pair_driven(const Drive& d, const Rates& r, const NonlinearTerms& terms,
                                          const PairInitial& init = {});

// Conditional amplitudes started at grid index tau; entry j belongs to index tau + j.
struct TwoTimeRow {
    std::size_t tau_index = 0;
    std::vector<cd> l10, l01, m10, m01, psi10_i, psi01_i;
};

TwoTimeRow propagate_two_time(std::size_t tau_index, const Drive& d, const Rates& r);

// Output amplitude for tau <= t from the eight scattering paths.
cd xi_out_paths(std::size_t tau, std::size_t t, const TwoPhotonAmplitudes& a, const TwoTimeRow& row, const Drive& d,
                const Rates& r);

struct OccupationTraces {
    std::vector<double> p00, p10, p01, p20, p11, p02, p001;
    double total(std::size_t k) const { return p00[k] + p10[k] + p01[k] + p20[k] + p11[k] + p02[k] + p001[k]; }
};

struct AssembleOptions {
    bool keep_matrix = false;
    const std::vector<cd>* target = nullptr;
    std::optional<std::size_t> slice_index;
};

struct TwoPhotonField {
    Eigen::MatrixXcd xi_out;  // filled only with keep_matrix
    std::vector<cd> diagonal;
    std::vector<cd> slice;
    OccupationTraces occupation;
    cd target_overlap{};
    double norm = 0.0;
};

TwoPhotonField assemble_output(const TwoPhotonAmplitudes& a, const Drive& d, const Rates& r,
                               const AssembleOptions& opt = {});

struct OverlapResult {
    double f2 = 0.0;
    double theta2 = 0.0;
};

OverlapResult two_photon_overlap(const TwoPhotonField& field, const std::vector<cd>& target, double dt);
OverlapResult overlap_from_sum(cd sum);

}  // namespace qcav
