#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gauge/analysis.hpp"
#include "gauge/errors.hpp"
#include "support.hpp"

using namespace gauge;

namespace {

TimeSeries grid_series(double t_end, double dt, double (*f)(double)) {
    TimeSeries s;
    for (int k = 0; k * dt <= t_end + 1e-12; ++k) {
        s.times.push_back(k * dt);
        s.values.push_back(f(k * dt));
    }
    return s;
}

std::vector<ScalingPoint> synthetic_points(double a, double b, double c, double k2 = 1.0) {
    std::vector<ScalingPoint> pts;
    for (double g : {12.0, 16.0, 20.0}) {
        for (int L : {7, 8, 9, 10}) {
            const double S = std::exp(a * L + b + c / L) / (g * g);
            pts.push_back({g, L, k2 * S});
        }
    }
    return pts;
}

}  // namespace

TEST_CASE("asymptote extraction") {
    const TimeSeries flat = grid_series(5.0, 0.05, [](double) { return 0.3; });
    const Asymptote a = extract_asymptote(flat);
    CHECK(a.value == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(a.fluctuation == 0.0);

    const TimeSeries ramp = grid_series(5.0, 0.01, [](double t) { return t < 2.0 ? 0.005 * t : 0.01; });
    CHECK(std::abs(extract_asymptote(ramp).value - 0.01) <= 1e-12);

    const TimeSeries line = grid_series(5.0, 0.5, [](double t) { return t; });
    CHECK(extract_asymptote(line, 5.0, 0.0).value == 5.0);
    CHECK(extract_asymptote(line, 5.0, 1.0).value == doctest::Approx(4.5));
    CHECK(extract_asymptote(line, 5.0, 1.0).fluctuation == doctest::Approx(1.0 / 4.5));

    CHECK_THROWS_AS(extract_asymptote(line, 6.0, 0.5), InvalidInput);
    CHECK_THROWS_AS(extract_asymptote(line, 5.0, 6.0), InvalidInput);
    CHECK_THROWS_AS(extract_asymptote(line, 5.0, -1.0), InvalidInput);
}

TEST_CASE("scaling fit recovers synthetic parameters exactly") {
    for (const auto& [a, b, c] : std::vector<std::array<double, 3>>{{2.63, 0.19, -20.63}, {4.21, 0.13, -25.35}}) {
        const auto pts = synthetic_points(a, b, c);
        const ScalingFit f = fit_scaling(pts);
        CHECK(std::abs(f.a - a) <= 1e-10);
        CHECK(std::abs(f.b - b) <= 1e-10);
        CHECK(std::abs(f.c - c) <= 1e-10);
        CHECK(f.residual <= 1e-10);
        for (double k : {2.0, 4.0, 0.3}) {
            const ScalingFit g = fit_scaling(synthetic_points(a, b, c, k * k));
            CHECK(std::abs(g.a - f.a) <= 1e-10);
            CHECK(std::abs(g.c - f.c) <= 1e-10);
            CHECK(std::abs(g.b - f.b - std::log(k * k)) <= 1e-10);
        }
    }
}

TEST_CASE("scaling fit rejects degenerate designs") {
    std::vector<ScalingPoint> one_l{{8, 6, 0.01}, {16, 6, 0.003}, {32, 6, 0.001}};
    CHECK_THROWS_WITH_AS(fit_scaling(one_l), doctest::Contains("one L"), InvalidInput);
    std::vector<ScalingPoint> two_l{{8, 6, 0.01}, {16, 6, 0.003}, {8, 7, 0.02}, {16, 7, 0.005}};
    CHECK_THROWS_WITH_AS(fit_scaling(two_l), doctest::Contains("rank deficient"), InvalidInput);
    std::vector<ScalingPoint> nonpos{{8, 5, 0.01}, {8, 6, 0.0}, {8, 7, 0.02}};
    CHECK_THROWS_AS(fit_scaling(nonpos), InvalidInput);
    CHECK_THROWS_AS(fit_scaling(std::vector<ScalingPoint>{{8, 5, 0.01}, {8, 6, 0.02}}), InvalidInput);
}

TEST_CASE("onset detection") {
    const TimeSeries mono = grid_series(20.0, 0.05, [](double t) { return 1.0 - std::exp(-t); });
    CHECK_FALSE(detect_onset(mono).has_value());

    auto dip = [](double t) { return t <= 7.3 ? 0.02 * (1.0 - std::exp(-2.0 * t)) : 0.02 * (1.0 - std::exp(-2.0 * t)) - 0.001 * (t - 7.3); };
    const TimeSeries s = grid_series(10.0, 0.01, dip);
    const auto t = detect_onset(s);
    REQUIRE(t.has_value());
    CHECK(std::abs(*t - 7.3) <= 0.01 + 1e-12);

    TimeSeries scaled = s;
    for (double& v : scaled.values) v *= 1234.5;
    CHECK(detect_onset(scaled) == t);

    // early dips are part of the transient
    auto early = [](double t) { return t < 0.5 ? 1.0 - t : 0.5 + 0.01 * t; };
    CHECK_FALSE(detect_onset(grid_series(5.0, 0.01, early)).has_value());
    CHECK(detect_onset(grid_series(5.0, 0.01, early), 0.0).has_value());
}

TEST_CASE("onset divergence fit") {
    const double t0 = 5.0;
    const double g0 = 2.7;
    std::vector<std::pair<double, double>> above;
    for (double g : {2.8, 3.0, 3.3, 3.9}) above.emplace_back(g, t0 / std::sqrt(g - g0));
    const OnsetFit fa = fit_onset_divergence(above);
    CHECK(std::abs(fa.gamma0 - g0) <= 1e-10);
    CHECK(std::abs(fa.t0 - t0) <= 1e-10);
    CHECK(fa.slope > 0.0);
    CHECK(fa.residual <= 1e-10);
    CHECK(fa.r_squared == doctest::Approx(1.0));

    std::vector<std::pair<double, double>> below;
    for (double g : {2.2, 2.3, 2.4, 2.5, 2.6}) below.emplace_back(g, t0 / std::sqrt(g0 - g));
    const OnsetFit fb = fit_onset_divergence(below);
    CHECK(std::abs(fb.gamma0 - g0) <= 1e-10);
    CHECK(std::abs(fb.t0 - t0) <= 1e-10);
    CHECK(fb.slope < 0.0);

    CHECK_THROWS_AS(fit_onset_divergence(std::vector<std::pair<double, double>>{{2.2, 3.0}, {2.3, 3.5}}), InvalidInput);
    CHECK_THROWS_AS(fit_onset_divergence(std::vector<std::pair<double, double>>{{2.2, 3.0}, {2.2, 3.5}, {2.4, 4.0}}), InvalidInput);
    CHECK_THROWS_AS(fit_onset_divergence(std::vector<std::pair<double, double>>{{2.2, 3.0}, {2.3, 3.0}, {2.4, 3.0}}), InvalidInput);
    CHECK_THROWS_AS(fit_onset_divergence(std::vector<std::pair<double, double>>{{2.2, 3.0}, {2.3, -3.0}, {2.4, 3.0}}), InvalidInput);
}

TEST_CASE("growth fit") {
    const TimeSeries e = grid_series(20.0, 0.1, [](double t) { return 1e-9 * std::exp(0.8 * t); });
    const GrowthFit g = fit_growth(e);
    CHECK(std::abs(g.rate - 0.8) <= 1e-6);
    CHECK(g.t_lo == 0.0);
    CHECK(g.t_hi <= 20.0);
    for (std::size_t k = 0; k < e.size(); ++k) {
        if (e.times[k] >= g.t_lo && e.times[k] <= g.t_hi) CHECK(e.values[k] < 1e-2);
    }
    const TimeSeries flat = grid_series(10.0, 0.1, [](double) { return 1e-5; });
    CHECK(std::abs(fit_growth(flat).rate) <= 1e-10);
    const TimeSeries tiny = grid_series(10.0, 0.1, [](double) { return 1e-14; });
    CHECK_THROWS_AS(fit_growth(tiny), InvalidInput);
    const TimeSeries neg = grid_series(1.0, 0.1, [](double) { return -1.0; });
    CHECK_THROWS_AS(fit_growth(neg), InvalidInput);
}

TEST_CASE("least squares against Eigen QR") {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> d;
    const std::size_t rows = 11;
    const std::size_t cols = 4;
    std::vector<double> a(rows * cols);
    std::vector<double> y(rows);
    for (auto& v : a) v = d(gen);
    for (auto& v : y) v = d(gen);
    Eigen::MatrixXd ea(rows, cols);
    Eigen::VectorXd ey(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        ey(static_cast<Eigen::Index>(i)) = y[i];
        for (std::size_t j = 0; j < cols; ++j) ea(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i * cols + j];
    }
    const Eigen::VectorXd ref = ea.colPivHouseholderQr().solve(ey);
    const auto x = least_squares(a, rows, cols, y);
    for (std::size_t j = 0; j < cols; ++j) CHECK(std::abs(x[j] - ref(static_cast<Eigen::Index>(j))) <= 1e-12);

    std::vector<double> dep{1, 2, 2, 4, 3, 6};
    CHECK_THROWS_AS(least_squares(dep, 3, 2, std::vector<double>{1, 2, 3}), InvalidInput);
    CHECK_THROWS_AS(least_squares(dep, 2, 3, std::vector<double>{1, 2}), InvalidInput);
}
