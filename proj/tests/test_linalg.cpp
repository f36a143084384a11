#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "gauge/errors.hpp"
#include "support.hpp"

using namespace gauge;
using namespace testing;

namespace {

// I_{2^(L-i-2)} (x) op (x) I_{2^i}: op on sites {i, i+1} with site 0 rightmost.
ComplexMatrix kron_embed_pair(const ComplexMatrix& op, int i, int L) {
    const ComplexMatrix left = ComplexMatrix::identity(std::size_t{1} << (L - i - 2));
    const ComplexMatrix right = ComplexMatrix::identity(std::size_t{1} << i);
    return kron(kron(left, op), right);
}

ComplexMatrix naive_partial_trace(const ComplexMatrix& a, const std::vector<int>& traced, int L) {
    std::vector<int> kept;
    for (int s = 0; s < L; ++s) {
        if (std::find(traced.begin(), traced.end(), s) == traced.end()) kept.push_back(s);
    }
    const std::size_t nk = std::size_t{1} << kept.size();
    const std::size_t nt = std::size_t{1} << traced.size();
    ComplexMatrix out(nk, nk);
    auto compose = [&](std::size_t k_idx, std::size_t t_idx) {
        std::size_t full = 0;
        for (std::size_t m = 0; m < kept.size(); ++m) full |= ((k_idx >> m) & 1U) << kept[m];
        for (std::size_t m = 0; m < traced.size(); ++m) full |= ((t_idx >> m) & 1U) << traced[m];
        return full;
    };
    for (std::size_t r = 0; r < nk; ++r) {
        for (std::size_t c = 0; c < nk; ++c) {
            for (std::size_t t = 0; t < nt; ++t) out(r, c) += a(compose(r, t), compose(c, t));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("trace") {
    CHECK(trace(ComplexMatrix::identity(7)) == Complex(7.0));
    CHECK(std::abs(trace(pauli::z())) == 0.0);
    const ComplexMatrix a = random_matrix(16, 16);
    const ComplexMatrix b = random_matrix(16, 16);
    CHECK(std::abs(trace(matmul(a, b)) - trace(matmul(b, a))) <= 1e-10);
    CHECK_THROWS_AS(trace(ComplexMatrix(2, 3)), InvalidInput);
}

TEST_CASE("pair_trace") {
    CHECK(std::abs(pair_trace(ComplexMatrix::identity(8), ComplexMatrix::identity(8)) - 8.0) < 1e-15);
    const ComplexMatrix u = random_unitary(16);
    CHECK(std::abs(pair_trace(u, u) - 16.0) <= 1e-10);
    const ComplexMatrix a = random_matrix(32, 32);
    const ComplexMatrix b = random_matrix(32, 32);
    CHECK(std::abs(pair_trace(a, b) - trace(matmul(a, adjoint(b)))) <= 1e-10);
    CHECK_THROWS_AS(pair_trace(a, ComplexMatrix(32, 16)), InvalidInput);
}

TEST_CASE("matmul against Eigen on many shapes") {
    const std::vector<std::array<std::size_t, 3>> shapes = {
        {1, 1, 1}, {3, 5, 7}, {6, 8, 4}, {7, 9, 300}, {13, 16, 17}, {64, 64, 64}, {65, 41, 260}, {128, 128, 512}};
    for (const auto& [m, k, n] : shapes) {
        CAPTURE(m);
        CAPTURE(k);
        CAPTURE(n);
        const ComplexMatrix a = random_matrix(m, k);
        const ComplexMatrix b = random_matrix(k, n);
        const EMat ref = to_eigen(a) * to_eigen(b);
        CHECK(max_abs_diff(matmul(a, b), ref) <= 1e-11 * static_cast<double>(k));

        ComplexMatrix c = random_matrix(m, n);
        const EMat c0 = to_eigen(c);
        matmul_into(a, b, c, true);
        CHECK(max_abs_diff(c, c0 + ref) <= 1e-11 * static_cast<double>(k));
    }
    CHECK_THROWS_AS(matmul(ComplexMatrix(2, 3), ComplexMatrix(2, 3)), InvalidInput);
}

TEST_CASE("matmul is associative and bitwise repeatable") {
    const ComplexMatrix a = random_matrix(12, 12);
    const ComplexMatrix b = random_matrix(12, 12);
    const ComplexMatrix c = random_matrix(12, 12);
    CHECK(frobenius_distance(matmul(matmul(a, b), c), matmul(a, matmul(b, c))) <= 1e-10);
    const ComplexMatrix x = random_matrix(96, 96);
    const ComplexMatrix y = random_matrix(96, 96);
    CHECK(matmul(x, y) == matmul(x, y));
}

TEST_CASE("matvec, adjoint, kron, commutator") {
    const ComplexMatrix a = random_matrix(9, 5);
    const StateVector v = random_state(5);
    const StateVector w = random_state(9);
    const EVec av = to_eigen(a) * to_eigen(v);
    const StateVector got = matvec(a, v);
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(got[i] - av(static_cast<Eigen::Index>(i))) <= 1e-13);
    const EVec atw = to_eigen(a).adjoint() * to_eigen(w);
    const StateVector got2 = adjoint_matvec(a, w);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(got2[i] - atw(static_cast<Eigen::Index>(i))) <= 1e-13);
    CHECK(max_abs_diff(adjoint(a), EMat(to_eigen(a).adjoint())) == 0.0);

    const ComplexMatrix k = kron(pauli::x(), pauli::z());
    CHECK(k(0, 2) == Complex(1.0));
    CHECK(k(1, 3) == Complex(-1.0));
    CHECK(frobenius_distance(commutator(pauli::x(), pauli::y()), Complex(0, 2) * pauli::z()) == 0.0);
}

TEST_CASE("norms and residuals") {
    CHECK(frobenius_norm(ComplexMatrix::identity(4)) == doctest::Approx(2.0));
    CHECK(one_norm(ComplexMatrix::from_rows({{1.0, -2.0}, {3.0, Complex(0, 4)}})) == doctest::Approx(6.0));
    CHECK(hermiticity_residual(random_hermitian(8)) <= 1e-14);
    CHECK(unitarity_residual(random_unitary(16)) <= 1e-12);
    ComplexMatrix bad = ComplexMatrix::identity(2);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(all_finite(bad));
}

TEST_CASE("embed_local examples") {
    CHECK(embed_local(pauli::z(), std::vector<int>{0}, 1) == pauli::z());

    const ComplexMatrix x1 = embed_local(pauli::x(), std::vector<int>{1}, 2);
    const StateVector plus(4, Complex(0.5));
    const StateVector out = matvec(x1, plus);
    for (const auto& z : out) CHECK(std::abs(z - 0.5) <= 1e-15);

    const ComplexMatrix zz = kron(pauli::z(), pauli::z());
    for (int i = 0; i + 1 < 4; ++i) {
        CHECK(embed_local(zz, std::vector<int>{i, i + 1}, 4) == kron_embed_pair(zz, i, 4));
    }
    // bit m of the operator's index lands on sites[m]
    const ComplexMatrix xz = kron(pauli::x(), pauli::z());  // z on sites[0], x on sites[1]
    CHECK(embed_local(xz, std::vector<int>{1, 2}, 4) == kron_embed_pair(xz, 1, 4));
    CHECK(embed_local(xz, std::vector<int>{2, 1}, 4) == kron_embed_pair(kron(pauli::z(), pauli::x()), 1, 4));

    CHECK_THROWS_AS(embed_local(zz, std::vector<int>{0}, 3), InvalidInput);
    CHECK_THROWS_AS(embed_local(zz, std::vector<int>{0, 0}, 3), InvalidInput);
    CHECK_THROWS_AS(embed_local(zz, std::vector<int>{0, 3}, 3), InvalidInput);
}

TEST_CASE("apply_local equals the embedded product") {
    const int L = 5;
    const std::vector<int> sites{3, 1};
    const SiteSplit split(sites, L);
    const ComplexMatrix op = random_matrix(4, 4);
    const ComplexMatrix m = random_matrix(32, 32);
    CHECK(max_abs_diff(apply_local(op, split, m), matmul(embed_local(op, sites, L), m)) <= 1e-12);
    const StateVector v = random_state(32);
    const StateVector a = apply_local(op, split, v);
    const StateVector b = matvec(embed_local(op, sites, L), v);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-13);
}

TEST_CASE("partial_trace examples and properties") {
    CHECK(partial_trace(ComplexMatrix::identity(4), std::vector<int>{0}, 2) == 2.0 * ComplexMatrix::identity(2));

    // A on site 1, B on site 0
    const ComplexMatrix a = random_matrix(2, 2);
    const ComplexMatrix b = random_matrix(2, 2);
    CHECK(max_abs_diff(partial_trace(kron(a, b), std::vector<int>{0}, 2), trace(b) * a) <= 1e-14);

    const ComplexMatrix r = random_matrix(16, 16);
    for (const auto& traced : std::vector<std::vector<int>>{{0}, {2}, {1, 3}, {3, 0}, {0, 1, 2}}) {
        const ComplexMatrix pt = partial_trace(r, traced, 4);
        CHECK(max_abs_diff(pt, naive_partial_trace(r, traced, 4)) <= 1e-12);
        CHECK(std::abs(trace(pt) - trace(r)) <= 1e-10);
    }

    // embed then trace out the complement
    const ComplexMatrix op = random_matrix(4, 4);
    const ComplexMatrix full = embed_local(op, std::vector<int>{1, 3}, 5);
    const ComplexMatrix back = partial_trace(full, std::vector<int>{0, 2, 4}, 5);
    CHECK(max_abs_diff(back, 8.0 * op) <= 1e-12);

    CHECK_THROWS_AS(partial_trace(r, std::vector<int>{4}, 4), InvalidInput);
    CHECK_THROWS_AS(partial_trace(random_matrix(8, 8), std::vector<int>{0}, 4), InvalidInput);
}

TEST_CASE("partial_trace_product_adjoint and embed_rest") {
    const int L = 5;
    const std::vector<int> sites{4, 0};
    const SiteSplit split(sites, L);
    const ComplexMatrix a = random_matrix(32, 32);
    const ComplexMatrix b = random_matrix(32, 32);
    CHECK(max_abs_diff(partial_trace_product_adjoint(a, b, split),
                       partial_trace(matmul(a, adjoint(b)), split)) <= 1e-11);
    CHECK(max_abs_diff(partial_trace(a, split), partial_trace(a, sites, L)) == 0.0);

    const ComplexMatrix rest = random_matrix(8, 8);
    const ComplexMatrix e = embed_rest(rest, split);
    CHECK(max_abs_diff(partial_trace(e, split), 4.0 * rest) <= 1e-13);
    // commutes with anything supported on the split sites
    const ComplexMatrix local = embed_local(random_matrix(4, 4), sites, L);
    CHECK(frobenius_norm(commutator(e, local)) <= 1e-12);
}

TEST_CASE("expm_antihermitian") {
    CHECK(expm_antihermitian(ComplexMatrix(4, 4)) == ComplexMatrix::identity(4));

    const ComplexMatrix g = Complex(0.0, -std::numbers::pi / 2) * pauli::x();
    CHECK(max_abs_diff(expm_antihermitian(g), Complex(0, -1) * pauli::x()) <= 1e-14);

    for (double t : {0.01, 0.7, 5.0, 40.0}) {
        const ComplexMatrix h = random_hermitian(8);
        const ComplexMatrix u = expm_antihermitian(Complex(0.0, -t) * h);
        CHECK(max_abs_diff(u, eigen_propagator(h, t)) <= 1e-10);
        CHECK(unitarity_residual(u) <= 1e-10);
    }
    CHECK_THROWS_AS(expm_antihermitian(random_hermitian(4)), InvalidInput);
    CHECK_THROWS_AS(expm_antihermitian(random_matrix(2, 3)), InvalidInput);
}

TEST_CASE("polar_unitarize") {
    CHECK(polar_unitarize(ComplexMatrix::identity(8)) == ComplexMatrix::identity(8));

    const ComplexMatrix u = random_unitary(16);
    CHECK(max_abs_diff(polar_unitarize(1.01 * u), u) <= 1e-12);

    ComplexMatrix near = u;
    near.add_scaled(1e-4, random_matrix(16, 16));
    const ComplexMatrix p = polar_unitarize(near);
    Eigen::JacobiSVD<EMat> svd(to_eigen(near), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const EMat oracle = svd.matrixU() * svd.matrixV().adjoint();
    CHECK(max_abs_diff(p, oracle) <= 1e-10);
    CHECK(unitarity_residual(p) <= 1e-12);

    const ComplexMatrix twice = polar_unitarize(p);
    CHECK(max_abs_diff(twice, p) <= 1e-13);

    CHECK_THROWS_AS(polar_unitarize(3.0 * random_matrix(8, 8)), IntegrationInstability);
}
