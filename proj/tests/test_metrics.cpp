#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gauge/engine.hpp"
#include "gauge/errors.hpp"
#include "gauge/metrics.hpp"
#include "gauge/reference.hpp"
#include "support.hpp"

using namespace gauge;
using namespace testing;

namespace {

GaugeState pair_state(const ComplexMatrix& u0, const ComplexMatrix& u1) {
    const PatchCover cover(3, {{0, {0, 1}}, {1, {1, 2}}});
    return {cover, plus_x_state(3), {u0, u1}, 0.0};
}

}  // namespace

TEST_CASE("s_deviation examples") {
    const ComplexMatrix id = ComplexMatrix::identity(8);
    CHECK(s_deviation(pair_state(id, id), 0, 1) == 0.0);
    CHECK(s_deviation(pair_state(-1.0 * id, id), 0, 1) == doctest::Approx(2.0));
    const double theta = 0.9;
    CHECK(s_deviation(pair_state(std::exp(Complex(0, theta)) * id, id), 0, 1) ==
          doctest::Approx(1.0 - std::cos(theta)).epsilon(1e-14));

    const ComplexMatrix a = random_unitary(8);
    const ComplexMatrix b = random_unitary(8);
    const GaugeState s = pair_state(a, b);
    const double naive = 1.0 - trace(matmul(a, adjoint(b))).real() / 8.0;
    CHECK(std::abs(s_deviation(s, 0, 1) - naive) <= 1e-12);
    CHECK(s_deviation(s, 0, 1) == s_deviation(s, 1, 0));
    CHECK(s_deviation(s, 0, 1) >= 0.0);
    CHECK(s_deviation(s, 0, 1) <= 2.0);

    const GaugeState disjoint(PatchCover(4, {{0, {0, 1}}, {1, {2, 3}}}), plus_x_state(4),
                              {ComplexMatrix::identity(16), ComplexMatrix::identity(16)}, 0.0);
    CHECK_THROWS_AS(s_deviation(disjoint, 0, 1), InvalidInput);
}

TEST_CASE("picture_error") {
    const TimeSeries a{"a", {0.0, 1.0, 2.0}, {0.5, -0.25, 1.0}};
    const TimeSeries z = picture_error(a, a);
    for (double v : z.values) CHECK(v == 0.0);
    TimeSeries b = a;
    for (double& v : b.values) v += 1e-3;
    for (double v : picture_error(a, b).values) CHECK(v == doctest::Approx(1e-3).epsilon(1e-9));
    TimeSeries shifted = a;
    shifted.times[1] = 1.5;
    CHECK_THROWS_AS(picture_error(a, shifted), InvalidInput);
    TimeSeries shorter{"s", {0.0, 1.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(picture_error(a, shorter), InvalidInput);
    CHECK_THROWS_AS(validate(TimeSeries{"bad", {0.0, 0.0}, {1.0, 1.0}}), InvalidInput);
    CHECK_THROWS_AS(validate(TimeSeries{"bad", {0.0, 1.0}, {1.0}}), InvalidInput);
}

TEST_CASE("gamma = 0 error stays small at L = 6") {
    const ModelSpec spec{6, 1.0, 1.0, 0.0};
    EvolutionConfig c;
    c.t_max = 2.0;
    c.sample_stride = 20;
    const RunResult r = run(spec, c);
    const auto exact = evolve_exact(build_propagator(assemble_full_hamiltonian(spec), 0.1), plus_x_state(6), r.times);
    TimeSeries ex{"exact", r.times, {}};
    for (const auto& psi : exact) ex.values.push_back(sigma_x_expectation(psi, 0));
    const TimeSeries err = picture_error({"gauge", r.times, r.sx[0]}, ex);
    for (double v : err.values) CHECK(v <= 1e-4);
    for (std::size_t k = 1; k < r.times.size(); ++k) CHECK(r.s_mean[k] > 0.0);
}
