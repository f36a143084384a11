#include "gauge/reference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gauge/errors.hpp"

namespace gauge {

ExactPropagator build_propagator(const ComplexMatrix& hamiltonian, double delta) {
    if (!hamiltonian.is_square()) throw InvalidInput("build_propagator: Hamiltonian is not square");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidInput("build_propagator: delta must be positive");
    if (hermiticity_residual(hamiltonian) > 1e-10) {
        throw InvalidInput("build_propagator: Hamiltonian is not Hermitian");
    }
    ComplexMatrix g = Complex(0.0, -delta) * hamiltonian;
    return {hamiltonian.rows(), expm_antihermitian(g, 1e-13), delta};
}

std::vector<StateVector> evolve_exact(const ExactPropagator& prop, const StateVector& psi0,
                                      std::span<const double> sample_times) {
    if (psi0.size() != prop.dim) throw InvalidInput("evolve_exact: state dimension mismatch");
    std::vector<StateVector> out;
    out.reserve(sample_times.size());
    StateVector psi = psi0;
    long long applied = 0;
    for (double t : sample_times) {
        const double ratio = t / prop.delta;
        const long long m = std::llround(ratio);
        if (m < 0 || std::abs(ratio - static_cast<double>(m)) > 1e-9 * std::max(1.0, ratio)) {
            throw InvalidInput("evolve_exact: sample time " + std::to_string(t) +
                               " is not a multiple of the propagator step");
        }
        if (m < applied) throw InvalidInput("evolve_exact: sample times must be non-decreasing");
        for (; applied < m; ++applied) psi = matvec(prop.step, psi);
        out.push_back(psi);
    }
    return out;
}

namespace {

long long step_count(double t, double delta) {
    const double ratio = t / delta;
    const long long m = std::llround(ratio);
    if (m < 0 || std::abs(ratio - static_cast<double>(m)) > 1e-9 * std::max(1.0, ratio)) {
        throw InvalidInput("sample time " + std::to_string(t) + " is not a multiple of the step");
    }
    return m;
}

}  // namespace

std::vector<StateVector> evolve_rk4(const ComplexMatrix& hamiltonian, const StateVector& psi0,
                                    double delta, std::span<const double> sample_times) {
    if (!hamiltonian.is_square() || hamiltonian.rows() != psi0.size()) {
        throw InvalidInput("evolve_rk4: dimension mismatch");
    }
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidInput("evolve_rk4: delta must be positive");
    // RK4 on a linear ODE is the degree-4 Taylor polynomial of exp(-i H delta)
    const ComplexMatrix a = Complex(0.0, -delta) * hamiltonian;
    ComplexMatrix step = ComplexMatrix::identity(a.rows());
    ComplexMatrix power = ComplexMatrix::identity(a.rows());
    double factorial = 1.0;
    for (int k = 1; k <= 4; ++k) {
        power = matmul(power, a);
        factorial *= k;
        step.add_scaled(1.0 / factorial, power);
    }
    std::vector<StateVector> out;
    out.reserve(sample_times.size());
    StateVector psi = psi0;
    long long applied = 0;
    for (double t : sample_times) {
        const long long m = step_count(t, delta);
        if (m < applied) throw InvalidInput("evolve_rk4: sample times must be non-decreasing");
        for (; applied < m; ++applied) psi = matvec(step, psi);
        out.push_back(psi);
    }
    return out;
}

double expectation(std::span<const Complex> psi, const ComplexMatrix& op) {
    return expectation_value(psi, op);
}

}  // namespace gauge
