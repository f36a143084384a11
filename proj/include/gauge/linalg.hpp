#pragma once

// Dense complex linear algebra for Hilbert spaces of up to ~10 qubits.
//
// Storage is row-major, entries interleaved (re, im) as std::complex<double>.
// Qubit/bit convention used everywhere in this library: site s of an L-site
// register is bit s of the basis-state index, so site 0 is the least
// significant bit. For a site list {s_0, s_1, ...} handed to embed_local or
// apply_local, bit m of the small operator's index refers to site s_m. In
// Kronecker notation this means embed_local(A (x) B, {s0, s1}) puts B on s0
// and A on s1.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace gauge {

using Complex = std::complex<double>;

class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

    static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool is_square() const noexcept { return rows_ == cols_; }
    bool empty() const noexcept { return data_.empty(); }

    Complex& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const noexcept {
        return data_[r * cols_ + c];
    }

    Complex* data() noexcept { return data_.data(); }
    const Complex* data() const noexcept { return data_.data(); }
    std::span<Complex> entries() noexcept { return data_; }
    std::span<const Complex> entries() const noexcept { return data_; }
    Complex* row(std::size_t r) noexcept { return data_.data() + r * cols_; }
    const Complex* row(std::size_t r) const noexcept { return data_.data() + r * cols_; }

    void set_zero();

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(Complex s);

    // this += s * other
    void add_scaled(Complex s, const ComplexMatrix& other);

    bool operator==(const ComplexMatrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, ComplexMatrix a);

using StateVector = std::vector<Complex>;

// ---- products ------------------------------------------------------------

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

// out = a * b (or out += a * b when accumulate). out must not alias a or b.
void matmul_into(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& out,
                 bool accumulate = false);

StateVector matvec(const ComplexMatrix& a, std::span<const Complex> v);
StateVector adjoint_matvec(const ComplexMatrix& a, std::span<const Complex> v);

ComplexMatrix adjoint(const ComplexMatrix& a);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

// ---- scalars -------------------------------------------------------------

Complex trace(const ComplexMatrix& a);

// Tr(a b^dagger) = sum_ij a_ij conj(b_ij), without forming the product.
Complex pair_trace(const ComplexMatrix& a, const ComplexMatrix& b);

double frobenius_norm(const ComplexMatrix& a);
double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b);
double one_norm(const ComplexMatrix& a);
// ||a - a^dagger||_F
double hermiticity_residual(const ComplexMatrix& a);
// ||a^dagger a - I||_F
double unitarity_residual(const ComplexMatrix& a);
bool all_finite(const ComplexMatrix& a);

Complex inner(std::span<const Complex> a, std::span<const Complex> b);  // <a|b>
double norm(std::span<const Complex> v);
// <v|op|v>, real part; op must be Hermitian for the result to be meaningful.
double expectation_value(std::span<const Complex> v, const ComplexMatrix& op);

// ---- tensor structure ----------------------------------------------------

// Precomputed index map splitting an L-qubit basis index into a "local" part
// over an ordered site list and a "rest" part over the remaining sites (in
// increasing site order). full(rest, local) gives the full index.
class SiteSplit {
public:
    SiteSplit(std::span<const int> sites, int num_sites);

    int num_sites() const noexcept { return num_sites_; }
    std::size_t local_dim() const noexcept { return local_dim_; }
    std::size_t rest_dim() const noexcept { return rest_dim_; }
    std::size_t full_dim() const noexcept { return local_dim_ * rest_dim_; }
    const std::vector<int>& sites() const noexcept { return sites_; }

    std::size_t full(std::size_t rest, std::size_t local) const noexcept {
        return table_[rest * local_dim_ + local];
    }

private:
    int num_sites_;
    std::vector<int> sites_;
    std::size_t local_dim_;
    std::size_t rest_dim_;
    std::vector<std::size_t> table_;
};

// Full 2^L operator acting as op on the listed sites and identity elsewhere.
ComplexMatrix embed_local(const ComplexMatrix& op, std::span<const int> sites, int num_sites);

// embed_local(op, sites) * m, in O(N^2 * 2^k) without forming the embedding.
ComplexMatrix apply_local(const ComplexMatrix& op, const SiteSplit& split, const ComplexMatrix& m);
StateVector apply_local(const ComplexMatrix& op, const SiteSplit& split, std::span<const Complex> v);

// Full operator acting as op on every site NOT in split.sites() and as the
// identity on split.sites(); op has dimension split.rest_dim().
ComplexMatrix embed_rest(const ComplexMatrix& op, const SiteSplit& split);

// Partial trace over traced_sites; result acts on the remaining sites in
// increasing order (bit m of the result index = m-th smallest kept site).
ComplexMatrix partial_trace(const ComplexMatrix& a, std::span<const int> traced_sites,
                            int num_sites);
ComplexMatrix partial_trace(const ComplexMatrix& a, const SiteSplit& split);

// Partial trace over split.sites() of a * b^dagger, without forming the product.
ComplexMatrix partial_trace_product_adjoint(const ComplexMatrix& a, const ComplexMatrix& b,
                                            const SiteSplit& split);

// ---- matrix functions ----------------------------------------------------

// exp(g) for anti-Hermitian g by scaling and squaring of a Taylor series.
ComplexMatrix expm_antihermitian(const ComplexMatrix& g, double tol = 1e-13);

// Unitary polar factor of u by Newton-Schulz iteration. Throws
// IntegrationInstability if u is too far from unitary to converge.
ComplexMatrix polar_unitarize(const ComplexMatrix& u);

// Newton–Schulz in place; returns the final residual ||u^dagger u - I||_F.
double polar_unitarize_inplace(ComplexMatrix& u);

namespace pauli {
ComplexMatrix identity();
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
}  // namespace pauli

}  // namespace gauge
