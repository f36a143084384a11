#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gauge/metrics.hpp"

namespace gauge {

struct Asymptote {
    double value = 0.0;        // mean over the trailing window
    double fluctuation = 0.0;  // (max - min) / mean over the same window
};

// Trailing-window mean of series over [t_eval - window, t_eval]; window = 0
// reads the single sample at t_eval.
Asymptote extract_asymptote(const TimeSeries& series, double t_eval = 5.0, double window = 0.5);

inline constexpr double kCleanAsymptoteGate = 0.02;

struct ScalingPoint {
    double gamma = 0.0;
    int length = 0;
    double s_asymptote = 0.0;
};

// ln(gamma^2 S) = a L + b + c / L
struct ScalingFit {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double residual = 0.0;  // RMS of ln-space residuals
};

ScalingFit fit_scaling(std::span<const ScalingPoint> points);

struct OnsetDefaults {
    static constexpr double t_min = 1.0;
    static constexpr double epsilon = 1e-4;
};

// First sample time t > t_min at which the forward difference of the series
// drops below -epsilon * (running max of the series so far).
std::optional<double> detect_onset(const TimeSeries& series, double t_min = OnsetDefaults::t_min,
                                   double epsilon = OnsetDefaults::epsilon);

// t_s^2 = t0^2 / |gamma - gamma0|, fitted as a line t_s^-2 = m gamma + q with
// gamma0 = -q / m and t0 = |m|^-1/2. m < 0 means the onset diverges as gamma
// rises toward gamma0 from below.
struct OnsetFit {
    double gamma0 = 0.0;
    double t0 = 0.0;
    double slope = 0.0;
    double residual = 0.0;  // RMS in t_s^-2 space
    double r_squared = 0.0;
};

OnsetFit fit_onset_divergence(std::span<const std::pair<double, double>> gamma_onsets);

// ln err = rate t + intercept over the samples with floor < err < ceiling.
struct GrowthFit {
    double rate = 0.0;
    double intercept = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t samples = 0;
};

GrowthFit fit_growth(const TimeSeries& err, double floor = 1e-10, double ceiling = 1e-2);

// Ordinary least squares by Householder QR. Returns coefficients for the
// columns of `design` (row-major, rows x cols). Throws InvalidInput when the
// design is numerically rank deficient.
std::vector<double> least_squares(std::span<const double> design, std::size_t rows,
                                  std::size_t cols, std::span<const double> rhs);

}  // namespace gauge
