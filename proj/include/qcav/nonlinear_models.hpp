#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qcav/config_model.hpp"
#include "qcav/grid_signal.hpp"

namespace qcav {

struct Drive;

// Two-photon amplitude slots: 0 = |20>, 1 = |11>, 2 = |02>, 3 = |001> (SHG only).
struct Coupling {
    int from = 0;
    int to = 0;
    cd coefficient{};
};

struct NonlinearTerms {
    cd shift20{};
    cd shift11{};
    cd shift02{};
    bool has_c_mode = false;
    cd c_diagonal{};
    std::vector<Coupling> couplings;
};

NonlinearTerms linear_terms();
NonlinearTerms chi3_terms(double chi3_rate);
NonlinearTerms shg_terms(double chi2_rate, double delta_c_rate, double gamma_l_rate);
NonlinearTerms terms_for(const SystemConfig& cfg);

struct ShgAmplitudes {
    SampledSignal psi200;
    SampledSignal psi110;
    SampledSignal psi020;
    SampledSignal psi001;
};

// Two-photon amplitudes of the SHG system; init holds (|200>, |110>, |020>, |001>).
ShgAmplitudes propagate_shg(const Drive& drive, const SystemConfig& cfg, const std::array<cd, 4>& init = {});

// TLE stage: slots 0..2 = phi10g, phi01g, phi00e; 3..7 = phi20g, phi11g, phi02g, phi10e, phi01e.
using TleVector = Eigen::Matrix<cd, 8, 1>;

struct TleStageState {
    SampledSignal phi10g, phi01g, phi00e;
    SampledSignal phi20g, phi11g, phi02g, phi10e, phi01e;
};

TleVector tle_initial_state();
TleVector tle_rhs(const TleVector& y, cd pi, const Rates& r);

// Integrates on [0, t_end] with the control evaluated exactly at the RK4 stages.
TleVector propagate_tle(const TleVector& y0, const std::function<cd(double)>& pi, double t_end, double dt,
                        const Rates& r);

// Sampled control with local time zero at the first sample.
TleStageState propagate_tle_stage(const TleVector& y0, const SampledSignal& pi, const SystemConfig& cfg);

}  // namespace qcav
