#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qcav/config_model.hpp"
#include "qcav/grid_signal.hpp"

namespace qcav {

// Index axis of a full absorb/store/emit run. The control-free part of the
// storage interval may be collapsed into a single idle gap that the engines
// bridge with an exact propagator.
struct Timeline {
    double dt = 0.005;
    std::size_t n_points = 2;
    std::size_t absorb_end = 0;
    std::size_t emit_start = 1;
    std::optional<std::size_t> gap_after;
    double gap = 0.0;

    double time(std::size_t k) const {
        const double t = static_cast<double>(k) * dt;
        return (gap_after && k > *gap_after) ? t + gap : t;
    }
    TimeGrid index_grid() const { return TimeGrid{0.0, dt, n_points}; }
    bool is_gap_step(std::size_t k) const { return gap_after && *gap_after == k; }
};

// Time needed for the loading mode to empty before the gap may begin.
double settle_time(double big_gamma_rate, double tau_g);

Timeline build_timeline(const ScheduleSpec& sched, double big_gamma_rate, double tau_g, double dt, bool compress);

Timeline plain_timeline(std::size_t n_points, double dt);

// Values at the midpoints between samples. Cubic four-point stencils inside
// each segment, lower order at the segment edges, linear on the gap step.
std::vector<cd> half_step_values(const std::vector<cd>& v, std::optional<std::size_t> gap_after = std::nullopt);

// Input waveguide field and control sampled on a timeline.
struct Drive {
    Timeline timeline;
    std::vector<cd> xi;
    std::vector<cd> lambda;
    std::vector<cd> xi_half;
    std::vector<cd> lambda_half;

    std::size_t size() const { return timeline.n_points; }
};

Drive make_drive(const Timeline& tl, std::vector<cd> xi, std::vector<cd> lambda);

// One classical RK4 step for y' = rhs(y, lambda, xi).
template <class State, class Rhs>
State rk4_step(const State& y, double dt, Rhs&& rhs, cd lam0, cd xi0, cd lamh, cd xih, cd lam1, cd xi1) {
    const State k1 = rhs(y, lam0, xi0);
    const State k2 = rhs(State(y + (0.5 * dt) * k1), lamh, xih);
    const State k3 = rhs(State(y + (0.5 * dt) * k2), lamh, xih);
    const State k4 = rhs(State(y + dt * k3), lam1, xi1);
    return State(y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

template <class State, class Rhs>
State rk4_step(const State& y, const Drive& d, std::size_t n, Rhs&& rhs) {
    return rk4_step(y, d.timeline.dt, rhs, d.lambda[n], d.xi[n], d.lambda_half[n], d.xi_half[n], d.lambda[n + 1],
                    d.xi[n + 1]);
}

void check_step_stability(double big_gamma_rate, double dt);

}  // namespace qcav
