#include "qcav/grid_signal.hpp"

#include <cmath>
#include <stdexcept>

#include "qcav/errors.hpp"

namespace qcav {

bool TimeGrid::same_as(const TimeGrid& o) const {
    return n_points == o.n_points && t_start == o.t_start && dt == o.dt;
}

TimeGrid make_grid(double t_start, double t_end, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
    if (!(t_end > t_start)) throw ConfigError("time interval is empty or reversed");
    const double span = (t_end - t_start) / dt;
    const auto n = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    if (n < 2) throw ConfigError("time interval shorter than one step");
    return TimeGrid{t_start, dt, n};
}

SampledSignal::SampledSignal(const TimeGrid& g) : grid(g), values(g.n_points, cd{}) {}

SampledSignal::SampledSignal(const TimeGrid& g, std::vector<cd> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.n_points) throw std::invalid_argument("signal length does not match grid");
}

std::vector<double> SampledSignal::real() const {
    std::vector<double> out(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) out[k] = values[k].real();
    return out;
}

std::vector<double> SampledSignal::abs() const {
    std::vector<double> out(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) out[k] = std::abs(values[k]);
    return out;
}

std::vector<double> SampledSignal::abs2() const {
    std::vector<double> out(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) out[k] = std::norm(values[k]);
    return out;
}

double GaussianSpec::value(double t) const {
    const double s = t - t_center;
    return std::sqrt(2.0 / tau_g) * std::pow(kLn2 / kPi, 0.25) *
           std::exp(-2.0 * kLn2 * s * s / (tau_g * tau_g));
}

double GaussianSpec::derivative(double t) const {
    const double s = t - t_center;
    return -4.0 * kLn2 * s / (tau_g * tau_g) * value(t);
}

SampledSignal gaussian(const GaussianSpec& spec, const TimeGrid& grid) {
    if (!(spec.tau_g > 0.0)) throw ConfigError("Gaussian width must be positive");
    SampledSignal out(grid);
    for (std::size_t k = 0; k < grid.n_points; ++k) out[k] = spec.value(grid.time(k));
    return out;
}

SampledSignal gaussian_derivative(const GaussianSpec& spec, const TimeGrid& grid) {
    if (!(spec.tau_g > 0.0)) throw ConfigError("Gaussian width must be positive");
    SampledSignal out(grid);
    for (std::size_t k = 0; k < grid.n_points; ++k) out[k] = spec.derivative(grid.time(k));
    return out;
}

double smoothing_up(double t, double tau_e) {
    if (!(tau_e > 0.0)) throw ConfigError("smoothing time must be positive");
    if (t <= -0.5 * tau_e) return 0.0;
    if (t >= 0.5 * tau_e) return 1.0;
    return 0.5 * (1.0 + std::sin(kPi * t / tau_e));
}

double smoothing_down(double t, double tau_e) { return smoothing_up(-t, tau_e); }

SampledSignal cumulative_integral(const SampledSignal& sig) {
    SampledSignal out(sig.grid);
    const double h = 0.5 * sig.grid.dt;
    for (std::size_t k = 1; k < sig.size(); ++k) out[k] = out[k - 1] + h * (sig[k - 1] + sig[k]);
    return out;
}

std::vector<double> trapezoid_weights(std::size_t n, double dt) {
    std::vector<double> w(n, dt);
    if (n > 0) {
        w.front() = 0.5 * dt;
        w.back() = 0.5 * dt;
    }
    if (n == 1) w[0] = 0.0;
    return w;
}

cd integral(const SampledSignal& sig) {
    cd acc{};
    const auto w = trapezoid_weights(sig.size(), sig.grid.dt);
    for (std::size_t k = 0; k < sig.size(); ++k) acc += w[k] * sig[k];
    return acc;
}

cd inner_product(const SampledSignal& a, const SampledSignal& b) {
    if (!a.grid.same_as(b.grid)) throw std::invalid_argument("inner product of signals on different grids");
    cd acc{};
    const auto w = trapezoid_weights(a.size(), a.grid.dt);
    for (std::size_t k = 0; k < a.size(); ++k) acc += w[k] * a[k] * std::conj(b[k]);
    return acc;
}

SampledSignal derivative(const SampledSignal& sig) {
    const std::size_t n = sig.size();
    SampledSignal out(sig.grid);
    const double dt = sig.grid.dt;
    if (n < 3) {
        const cd d = (sig[n - 1] - sig[0]) / dt;
        for (auto& v : out.values) v = d;
        return out;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) out[k] = (sig[k + 1] - sig[k - 1]) / (2.0 * dt);
    out[0] = (-3.0 * sig[0] + 4.0 * sig[1] - sig[2]) / (2.0 * dt);
    out[n - 1] = (3.0 * sig[n - 1] - 4.0 * sig[n - 2] + sig[n - 3]) / (2.0 * dt);
    return out;
}

}  // namespace qcav
