#include "gauge/metrics.hpp"

#include <cmath>
#include <string>

#include "gauge/engine.hpp"
#include "gauge/errors.hpp"

namespace gauge {

void validate(const TimeSeries& series) {
    if (series.times.size() != series.values.size()) {
        throw InvalidInput("time series '" + series.label + "' has misaligned times and values");
    }
    for (std::size_t k = 1; k < series.times.size(); ++k) {
        if (!(series.times[k] > series.times[k - 1])) {
            throw InvalidInput("time series '" + series.label + "' times are not strictly increasing");
        }
    }
}

double s_deviation(const GaugeState& state, std::size_t i, std::size_t j) {
    if (i >= state.cover().size() || j >= state.cover().size()) {
        throw InvalidInput("s_deviation: patch index out of range");
    }
    if (!state.cover().overlap(i, j)) throw InvalidInput("s_deviation: patches do not overlap");
    const double n = static_cast<double>(state.dim());
    return 1.0 - pair_trace(state.frame(i), state.frame(j)).real() / n;
}

TimeSeries picture_error(const TimeSeries& gauge, const TimeSeries& exact) {
    validate(gauge);
    validate(exact);
    if (gauge.size() != exact.size()) throw InvalidInput("picture_error: grids differ in length");
    TimeSeries err{gauge.label + "_error", gauge.times, std::vector<double>(gauge.size())};
    for (std::size_t k = 0; k < gauge.size(); ++k) {
        const double t = gauge.times[k];
        if (std::abs(t - exact.times[k]) > 1e-9 * std::max(1.0, std::abs(t))) {
            throw InvalidInput("picture_error: time grids differ at sample " + std::to_string(k));
        }
        err.values[k] = std::abs(gauge.values[k] - exact.values[k]);
    }
    return err;
}

}  // namespace gauge
