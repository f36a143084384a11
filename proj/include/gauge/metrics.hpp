#pragma once

#include <string>
#include <vector>

namespace gauge {

class GaugeState;

struct TimeSeries {
    std::string label;
    std::vector<double> times;
    std::vector<double> values;

    std::size_t size() const noexcept { return times.size(); }
};

// Throws InvalidInput unless times are strictly increasing and aligned with values.
void validate(const TimeSeries& series);

// S_IJ = 1 - Re Tr(U_I U_J^dagger) / N for overlapping patches I, J.
double s_deviation(const GaugeState& state, std::size_t i, std::size_t j);

// Pointwise |gauge - exact| on identical time grids.
TimeSeries picture_error(const TimeSeries& gauge, const TimeSeries& exact);

}  // namespace gauge
