#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "gauge/linalg.hpp"

namespace testing {

using gauge::Complex;
using gauge::ComplexMatrix;
using gauge::StateVector;
using EMat = Eigen::MatrixXcd;
using EVec = Eigen::VectorXcd;

inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(20240611);
    return gen;
}

inline ComplexMatrix random_matrix(std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> d;
    ComplexMatrix m(rows, cols);
    for (auto& z : m.entries()) z = Complex(d(rng()), d(rng()));
    return m;
}

inline ComplexMatrix random_hermitian(std::size_t n) {
    ComplexMatrix a = random_matrix(n, n);
    ComplexMatrix h = a + gauge::adjoint(a);
    h *= 0.5;
    return h;
}

inline ComplexMatrix random_unitary(std::size_t n, double scale = 1.0) {
    ComplexMatrix g = Complex(0.0, -scale) * random_hermitian(n);
    return gauge::expm_antihermitian(g);
}

inline StateVector random_state(std::size_t n) {
    std::normal_distribution<double> d;
    StateVector v(n);
    for (auto& z : v) z = Complex(d(rng()), d(rng()));
    const double s = gauge::norm(v);
    for (auto& z : v) z /= s;
    return v;
}

inline EMat to_eigen(const ComplexMatrix& m) {
    EMat e(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
    }
    return e;
}

inline ComplexMatrix from_eigen(const EMat& e) {
    ComplexMatrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    return m;
}

inline EVec to_eigen(const StateVector& v) {
    EVec e(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) e(static_cast<Eigen::Index>(i)) = v[i];
    return e;
}

// exp(-i H t) by diagonalization.
inline EMat eigen_propagator(const ComplexMatrix& h, double t) {
    Eigen::SelfAdjointEigenSolver<EMat> es(to_eigen(h));
    const Eigen::VectorXd& w = es.eigenvalues();
    EVec phase(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) phase(i) = std::exp(Complex(0.0, -w(i) * t));
    return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

inline double max_abs_diff(const ComplexMatrix& a, const EMat& b) {
    double m = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
            m = std::max(m, std::abs(a(r, c) - b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
        }
    }
    return m;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    return max_abs_diff(a, to_eigen(b));
}

}  // namespace testing
