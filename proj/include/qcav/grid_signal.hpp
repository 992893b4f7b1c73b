#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qcav {

using cd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLn2 = 0.69314718055994530942;

// Uniform time axis. Times are always computed from the index.
struct TimeGrid {
    double t_start = 0.0;
    double dt = 1.0;
    std::size_t n_points = 2;

    double time(std::size_t k) const { return t_start + static_cast<double>(k) * dt; }
    double t_end() const { return time(n_points - 1); }
    bool same_as(const TimeGrid& o) const;
};

TimeGrid make_grid(double t_start, double t_end, double dt);

struct SampledSignal {
    TimeGrid grid;
    std::vector<cd> values;

    SampledSignal() = default;
    explicit SampledSignal(const TimeGrid& g);
    SampledSignal(const TimeGrid& g, std::vector<cd> v);

    std::size_t size() const { return values.size(); }
    cd& operator[](std::size_t k) { return values[k]; }
    const cd& operator[](std::size_t k) const { return values[k]; }
    double time(std::size_t k) const { return grid.time(k); }

    std::vector<double> real() const;
    std::vector<double> abs() const;
    std::vector<double> abs2() const;
};

struct GaussianSpec {
    double tau_g = 1.0;
    double t_center = 0.0;

    double omega_g() const { return 4.0 * kLn2 / tau_g; }
    double value(double t) const;
    double derivative(double t) const;
};

SampledSignal gaussian(const GaussianSpec& spec, const TimeGrid& grid);
SampledSignal gaussian_derivative(const GaussianSpec& spec, const TimeGrid& grid);

double smoothing_up(double t, double tau_e);
double smoothing_down(double t, double tau_e);

SampledSignal cumulative_integral(const SampledSignal& sig);
cd integral(const SampledSignal& sig);
cd inner_product(const SampledSignal& a, const SampledSignal& b);

// Trapezoid weights for a grid of n points with spacing dt.
std::vector<double> trapezoid_weights(std::size_t n, double dt);

// Centered differences in the interior, second-order one-sided at the ends.
SampledSignal derivative(const SampledSignal& sig);

}  // namespace qcav
