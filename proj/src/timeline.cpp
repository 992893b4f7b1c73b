#include "qcav/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qcav/errors.hpp"

namespace qcav {

double settle_time(double big_gamma_rate, double tau_g) {
    if (!(big_gamma_rate > 0.0)) return tau_g;
    return std::max(tau_g, 30.0 / big_gamma_rate);
}

Timeline build_timeline(const ScheduleSpec& s, double big_gamma_rate, double tau_g, double dt, bool compress) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
    const double t0 = s.emit_start();
    const double t_end = s.total();
    if (!(t0 > s.absorb_end())) throw ConfigError("absorption/emission windows overlap");

    Timeline tl;
    tl.dt = dt;
    tl.absorb_end = static_cast<std::size_t>(std::floor(s.absorb_end() / dt + 1e-9));
    const auto n_emit = static_cast<std::size_t>(std::floor(2.0 * s.tau_o / dt + 1e-9)) + 1;

    if (compress) {
        const double idle_from = s.absorb_end() + settle_time(big_gamma_rate, tau_g);
        const auto kg = static_cast<std::size_t>(std::ceil(idle_from / dt - 1e-9));
        const double gap = t0 - static_cast<double>(kg + 1) * dt;
        if (gap > 1e-12) {
            tl.gap_after = kg;
            tl.gap = gap;
            tl.emit_start = kg + 1;
            tl.n_points = tl.emit_start + n_emit;
            return tl;
        }
    }
    tl.emit_start = static_cast<std::size_t>(std::llround(t0 / dt));
    tl.n_points = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9)) + 1;
    if (tl.emit_start <= tl.absorb_end || tl.emit_start + 1 >= tl.n_points)
        throw ConfigError("schedule too short for time step " + std::to_string(dt));
    return tl;
}

Timeline plain_timeline(std::size_t n_points, double dt) {
    if (n_points < 2) throw ConfigError("timeline needs at least two points");
    Timeline tl;
    tl.dt = dt;
    tl.n_points = n_points;
    tl.absorb_end = n_points - 1;
    tl.emit_start = n_points - 1;
    return tl;
}

namespace {

void fill_segment(const std::vector<cd>& v, std::size_t a, std::size_t b, std::vector<cd>& out) {
    // midpoints of [k, k+1] for a <= k < b
    const std::size_t len = b - a + 1;
    for (std::size_t k = a; k < b; ++k) {
        if (len >= 4 && k > a && k + 2 <= b) {
            out[k] = (-v[k - 1] + 9.0 * v[k] + 9.0 * v[k + 1] - v[k + 2]) / 16.0;
        } else if (len >= 3 && k == a) {
            out[k] = (3.0 * v[k] + 6.0 * v[k + 1] - v[k + 2]) / 8.0;
        } else if (len >= 3 && k + 1 == b) {
            out[k] = (-v[k - 1] + 6.0 * v[k] + 3.0 * v[k + 1]) / 8.0;
        } else {
            out[k] = 0.5 * (v[k] + v[k + 1]);
        }
    }
}

}  // namespace

std::vector<cd> half_step_values(const std::vector<cd>& v, std::optional<std::size_t> gap_after) {
    if (v.size() < 2) return {};
    std::vector<cd> out(v.size() - 1);
    const std::size_t last = v.size() - 1;
    if (gap_after && *gap_after < last) {
        const std::size_t g = *gap_after;
        fill_segment(v, 0, g, out);
        out[g] = 0.5 * (v[g] + v[g + 1]);
        fill_segment(v, g + 1, last, out);
    } else {
        fill_segment(v, 0, last, out);
    }
    return out;
}

Drive make_drive(const Timeline& tl, std::vector<cd> xi, std::vector<cd> lambda) {
    if (xi.size() != tl.n_points || lambda.size() != tl.n_points)
        throw std::invalid_argument("drive length does not match timeline");
    Drive d;
    d.timeline = tl;
    d.xi = std::move(xi);
    d.lambda = std::move(lambda);
    d.xi_half = half_step_values(d.xi, tl.gap_after);
    d.lambda_half = half_step_values(d.lambda, tl.gap_after);
    return d;
}

void check_step_stability(double big_gamma_rate, double dt) {
    if (dt * big_gamma_rate > 0.5)
        throw ConfigError("time step too large for the decay rate (dt*Gamma = " + std::to_string(dt * big_gamma_rate) +
                          " > 0.5)");
}

}  // namespace qcav
