#pragma once

#include <span>
#include <vector>

#include "gauge/linalg.hpp"

namespace gauge {

// Exact one-step Schrödinger propagator exp(-i H delta).
struct ExactPropagator {
    std::size_t dim = 0;
    ComplexMatrix step;
    double delta = 0.0;
};

ExactPropagator build_propagator(const ComplexMatrix& hamiltonian, double delta);

// psi(t_k) = step^{m_k} psi0 for each requested time; times must be
// non-decreasing integer multiples of delta.
std::vector<StateVector> evolve_exact(const ExactPropagator& prop, const StateVector& psi0,
                                      std::span<const double> sample_times);

// Classical RK4 integration of i d/dt psi = H psi with step delta, sampled
// like evolve_exact. Used as a linear-ODE control for integrator error growth.
std::vector<StateVector> evolve_rk4(const ComplexMatrix& hamiltonian, const StateVector& psi0,
                                    double delta, std::span<const double> sample_times);

// <psi|op|psi> for Hermitian op.
double expectation(std::span<const Complex> psi, const ComplexMatrix& op);

}  // namespace gauge
