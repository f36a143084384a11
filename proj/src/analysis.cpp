#include "gauge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "gauge/errors.hpp"

namespace gauge {

std::vector<double> least_squares(std::span<const double> design, std::size_t rows,
                                  std::size_t cols, std::span<const double> rhs) {
    if (design.size() != rows * cols || rhs.size() != rows) {
        throw InvalidInput("least_squares: design and right-hand side sizes disagree");
    }
    if (rows < cols) throw InvalidInput("least_squares: fewer observations than unknowns");

    std::vector<double> a(design.begin(), design.end());
    std::vector<double> y(rhs.begin(), rhs.end());
    std::vector<double> col_norm(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t i = 0; i < rows; ++i) col_norm[j] += a[i * cols + j] * a[i * cols + j];
        col_norm[j] = std::sqrt(col_norm[j]);
    }

    // Householder QR applied in place to a and y.
    for (std::size_t k = 0; k < cols; ++k) {
        double sigma = 0.0;
        for (std::size_t i = k; i < rows; ++i) sigma += a[i * cols + k] * a[i * cols + k];
        sigma = std::sqrt(sigma);
        if (sigma <= 1e-12 * std::max(col_norm[k], 1e-300)) {
            throw InvalidInput("least_squares: design is rank deficient (column " +
                               std::to_string(k) + " is a combination of earlier columns)");
        }
        const double alpha = a[k * cols + k] > 0.0 ? -sigma : sigma;
        std::vector<double> v(rows - k);
        for (std::size_t i = k; i < rows; ++i) v[i - k] = a[i * cols + k];
        v[0] -= alpha;
        double vnorm2 = 0.0;
        for (double x : v) vnorm2 += x * x;
        if (vnorm2 == 0.0) continue;
        for (std::size_t j = k; j < cols; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < rows; ++i) dot += v[i - k] * a[i * cols + j];
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = k; i < rows; ++i) a[i * cols + j] -= f * v[i - k];
        }
        double dot = 0.0;
        for (std::size_t i = k; i < rows; ++i) dot += v[i - k] * y[i];
        const double f = 2.0 * dot / vnorm2;
        for (std::size_t i = k; i < rows; ++i) y[i] -= f * v[i - k];
    }

    std::vector<double> x(cols);
    for (std::size_t kk = cols; kk-- > 0;) {
        double s = y[kk];
        for (std::size_t j = kk + 1; j < cols; ++j) s -= a[kk * cols + j] * x[j];
        x[kk] = s / a[kk * cols + kk];
    }
    return x;
}

Asymptote extract_asymptote(const TimeSeries& series, double t_eval, double window) {
    validate(series);
    if (series.size() == 0) throw InvalidInput("extract_asymptote: empty series");
    if (window < 0.0) throw InvalidInput("extract_asymptote: window must be non-negative");
    const double tol = 1e-9 * std::max(1.0, std::abs(t_eval));
    const double lo = t_eval - window;
    if (series.times.front() > lo + tol || series.times.back() < t_eval - tol) {
        throw InvalidInput("extract_asymptote: series does not cover [t_eval - window, t_eval]");
    }
    double sum = 0.0;
    double mn = INFINITY;
    double mx = -INFINITY;
    std::size_t count = 0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double t = series.times[k];
        if (t < lo - tol || t > t_eval + tol) continue;
        const double v = series.values[k];
        sum += v;
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        ++count;
    }
    if (count == 0) throw InvalidInput("extract_asymptote: no samples inside the window");
    Asymptote out;
    out.value = sum / static_cast<double>(count);
    out.fluctuation = out.value != 0.0 ? (mx - mn) / std::abs(out.value) : (mx - mn == 0.0 ? 0.0 : INFINITY);
    return out;
}

ScalingFit fit_scaling(std::span<const ScalingPoint> points) {
    if (points.size() < 3) throw InvalidInput("fit_scaling: need at least 3 points");
    std::set<int> lengths;
    for (const auto& p : points) {
        if (!(p.s_asymptote > 0.0) || !(p.gamma > 0.0) || p.length <= 0) {
            throw InvalidInput("fit_scaling: points need gamma > 0, L > 0 and S > 0");
        }
        lengths.insert(p.length);
    }
    if (lengths.size() < 2) {
        throw InvalidInput("fit_scaling: all points share one L, so a, b and c cannot be separated");
    }
    if (lengths.size() < 3) {
        throw InvalidInput(
            "fit_scaling: design is rank deficient; L, 1 and 1/L are dependent on two distinct L "
            "values (need at least 3)");
    }
    const std::size_t n = points.size();
    std::vector<double> design(n * 3);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double L = points[i].length;
        design[3 * i] = L;
        design[3 * i + 1] = 1.0;
        design[3 * i + 2] = 1.0 / L;
        y[i] = std::log(points[i].gamma * points[i].gamma * points[i].s_asymptote);
    }
    const auto x = least_squares(design, n, 3, y);
    ScalingFit fit{x[0], x[1], x[2], 0.0};
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (x[0] * design[3 * i] + x[1] + x[2] * design[3 * i + 2]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

std::optional<double> detect_onset(const TimeSeries& series, double t_min, double epsilon) {
    validate(series);
    if (series.size() < 2) return std::nullopt;
    double running_max = series.values.front();
    for (std::size_t k = 0; k + 1 < series.size(); ++k) {
        running_max = std::max(running_max, series.values[k]);
        if (!(series.times[k] > t_min)) continue;
        const double diff = series.values[k + 1] - series.values[k];
        if (diff < -epsilon * running_max) return series.times[k];
    }
    return std::nullopt;
}

OnsetFit fit_onset_divergence(std::span<const std::pair<double, double>> gamma_onsets) {
    if (gamma_onsets.size() < 3) throw InvalidInput("fit_onset_divergence: need at least 3 points");
    std::set<double> gammas;
    const std::size_t n = gamma_onsets.size();
    std::vector<double> design(2 * n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [g, ts] = gamma_onsets[i];
        if (!(ts > 0.0) || !std::isfinite(ts) || !std::isfinite(g)) {
            throw InvalidInput("fit_onset_divergence: onset times must be positive and finite");
        }
        gammas.insert(g);
        design[2 * i] = g;
        design[2 * i + 1] = 1.0;
        y[i] = 1.0 / (ts * ts);
    }
    if (gammas.size() != n) throw InvalidInput("fit_onset_divergence: gamma values must be distinct");
    const auto x = least_squares(design, n, 2, y);
    const double slope = x[0];
    const double intercept = x[1];
    // the line may cross zero from either side; only a flat line has no divergence
    double y_scale = 0.0;
    for (double v : y) y_scale = std::max(y_scale, std::abs(v));
    const double span = *gammas.rbegin() - *gammas.begin();
    if (std::abs(slope) * span <= 1e-12 * y_scale || !std::isfinite(intercept / slope)) {
        throw InvalidInput("fit_onset_divergence: zero slope; onsets do not diverge");
    }
    OnsetFit fit;
    fit.slope = slope;
    fit.t0 = 1.0 / std::sqrt(std::abs(slope));
    fit.gamma0 = -intercept / slope;
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (slope * design[2 * i] + intercept);
        ss_res += r * r;
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    fit.residual = std::sqrt(ss_res / static_cast<double>(n));
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

GrowthFit fit_growth(const TimeSeries& err, double floor, double ceiling) {
    validate(err);
    if (!(ceiling > floor)) throw InvalidInput("fit_growth: ceiling must exceed floor");
    std::vector<double> design;
    std::vector<double> y;
    GrowthFit fit;
    for (std::size_t k = 0; k < err.size(); ++k) {
        const double e = err.values[k];
        if (e < 0.0) throw InvalidInput("fit_growth: error series must be non-negative");
        if (!(e > floor && e < ceiling)) continue;
        if (y.empty()) fit.t_lo = err.times[k];
        fit.t_hi = err.times[k];
        design.push_back(err.times[k]);
        design.push_back(1.0);
        y.push_back(std::log(e));
    }
    if (y.size() < 5) {
        throw InvalidInput("fit_growth: only " + std::to_string(y.size()) +
                           " samples inside the (floor, ceiling) band; need 5");
    }
    const auto x = least_squares(design, y.size(), 2, y);
    fit.rate = x[0];
    fit.intercept = x[1];
    fit.samples = y.size();
    return fit;
}

}  // namespace gauge
