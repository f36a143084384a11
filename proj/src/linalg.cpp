#include "gauge/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "gauge/errors.hpp"

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace gauge {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw InvalidInput(what);
}

// Complex GEMM on interleaved row-major storage: C[m x n] (+)= A[m x k] B[k x n].
// Portable path: column panels of kPanel entries are
// accumulated for kRows rows at a time with a k-block small enough that the
// B panel stays resident in L2. Loop order is fixed, so results are bitwise
// reproducible.
constexpr std::size_t kRows = 4;
constexpr std::size_t kPanel = 32;
constexpr std::size_t kDepth = 256;

template <std::size_t R>
void gemm_rows(std::size_t i0, std::size_t j0, std::size_t jn, std::size_t k0, std::size_t kn,
               std::size_t n, std::size_t k, const double* a, const double* b, double* c,
               bool load) {
    double acc[R][2 * kPanel];
    for (std::size_t r = 0; r < R; ++r) {
        if (load) {
            std::memcpy(acc[r], c + 2 * ((i0 + r) * n + j0), sizeof(double) * 2 * jn);
        } else {
            std::fill_n(acc[r], 2 * jn, 0.0);
        }
    }
    for (std::size_t kk = k0; kk < k0 + kn; ++kk) {
        const double* bk = b + 2 * (kk * n + j0);
        for (std::size_t r = 0; r < R; ++r) {
            const double ar = a[2 * ((i0 + r) * k + kk)];
            const double ai = a[2 * ((i0 + r) * k + kk) + 1];
            double* out = acc[r];
#pragma GCC ivdep
            for (std::size_t j = 0; j < jn; ++j) {
                const double br = bk[2 * j];
                const double bi = bk[2 * j + 1];
                out[2 * j] += ar * br - ai * bi;
                out[2 * j + 1] += ar * bi + ai * br;
            }
        }
    }
    for (std::size_t r = 0; r < R; ++r) {
        std::memcpy(c + 2 * ((i0 + r) * n + j0), acc[r], sizeof(double) * 2 * jn);
    }
}

void gemm_generic(std::size_t m, std::size_t n, std::size_t k, std::size_t col_begin,
                  const double* a, const double* b, double* c, bool accumulate) {
    for (std::size_t j0 = col_begin; j0 < n; j0 += kPanel) {
        const std::size_t jn = std::min(kPanel, n - j0);
        for (std::size_t k0 = 0; k0 < k; k0 += kDepth) {
            const std::size_t kn = std::min(kDepth, k - k0);
            const bool load = accumulate || k0 > 0;
            std::size_t i = 0;
            for (; i + kRows <= m; i += kRows) {
                gemm_rows<kRows>(i, j0, jn, k0, kn, n, k, a, b, c, load);
            }
            for (; i < m; ++i) gemm_rows<1>(i, j0, jn, k0, kn, n, k, a, b, c, load);
        }
    }
}

#if defined(__AVX512F__)
// AVX-512 path: MR x 8 complex register tile against a packed B panel. The
// real and imaginary parts of each A entry are broadcast separately into two
// accumulator sets (ar * B and ai * swap(B)), which are merged with one
// addsub at the end.
constexpr std::size_t kTileCols = 8;
constexpr std::size_t kTileRows = 6;

template <std::size_t MR>
inline void avx512_tile(std::size_t kn, const double* a, std::size_t lda, const double* packed,
                        double* c, std::size_t ldc, bool load) {
    __m512d p0[MR], p1[MR], q0[MR], q1[MR];
    for (std::size_t r = 0; r < MR; ++r) {
        p0[r] = _mm512_setzero_pd();
        p1[r] = _mm512_setzero_pd();
        q0[r] = _mm512_setzero_pd();
        q1[r] = _mm512_setzero_pd();
    }
    for (std::size_t kk = 0; kk < kn; ++kk) {
        const __m512d b0 = _mm512_loadu_pd(packed + 16 * kk);
        const __m512d b1 = _mm512_loadu_pd(packed + 16 * kk + 8);
        const __m512d s0 = _mm512_permute_pd(b0, 0x55);
        const __m512d s1 = _mm512_permute_pd(b1, 0x55);
        for (std::size_t r = 0; r < MR; ++r) {
            const __m512d ar = _mm512_set1_pd(a[r * lda + 2 * kk]);
            const __m512d ai = _mm512_set1_pd(a[r * lda + 2 * kk + 1]);
            p0[r] = _mm512_fmadd_pd(ar, b0, p0[r]);
            p1[r] = _mm512_fmadd_pd(ar, b1, p1[r]);
            q0[r] = _mm512_fmadd_pd(ai, s0, q0[r]);
            q1[r] = _mm512_fmadd_pd(ai, s1, q1[r]);
        }
    }
    const __m512d one = _mm512_set1_pd(1.0);
    for (std::size_t r = 0; r < MR; ++r) {
        __m512d v0 = _mm512_fmaddsub_pd(one, p0[r], q0[r]);
        __m512d v1 = _mm512_fmaddsub_pd(one, p1[r], q1[r]);
        double* cr = c + r * ldc;
        if (load) {
            v0 = _mm512_add_pd(v0, _mm512_loadu_pd(cr));
            v1 = _mm512_add_pd(v1, _mm512_loadu_pd(cr + 8));
        }
        _mm512_storeu_pd(cr, v0);
        _mm512_storeu_pd(cr + 8, v1);
    }
}

void gemm_avx512(std::size_t m, std::size_t n_tiled, std::size_t n, std::size_t k,
                 const double* a, const double* b, double* c, bool accumulate) {
    thread_local std::vector<double> packed(2 * kTileCols * kDepth);
    for (std::size_t k0 = 0; k0 < k; k0 += kDepth) {
        const std::size_t kn = std::min(kDepth, k - k0);
        const bool load = accumulate || k0 > 0;
        for (std::size_t j0 = 0; j0 < n_tiled; j0 += kTileCols) {
            for (std::size_t kk = 0; kk < kn; ++kk) {
                std::memcpy(packed.data() + 16 * kk, b + 2 * ((k0 + kk) * n + j0),
                            16 * sizeof(double));
            }
            std::size_t i = 0;
            for (; i + kTileRows <= m; i += kTileRows) {
                avx512_tile<kTileRows>(kn, a + 2 * (i * k + k0), 2 * k, packed.data(),
                                       c + 2 * (i * n + j0), 2 * n, load);
            }
            for (; i < m; ++i) {
                avx512_tile<1>(kn, a + 2 * (i * k + k0), 2 * k, packed.data(),
                               c + 2 * (i * n + j0), 2 * n, load);
            }
        }
    }
}
#endif

void gemm(std::size_t m, std::size_t n, std::size_t k, const Complex* A, const Complex* B,
          Complex* C, bool accumulate) {
    const auto* a = reinterpret_cast<const double*>(A);
    const auto* b = reinterpret_cast<const double*>(B);
    auto* c = reinterpret_cast<double*>(C);
    if (k == 0) {
        if (!accumulate) std::fill_n(C, m * n, Complex{});
        return;
    }
#if defined(__AVX512F__)
    const std::size_t n_tiled = n - n % kTileCols;
    if (n_tiled > 0) gemm_avx512(m, n_tiled, n, k, a, b, c, accumulate);
    if (n_tiled < n) gemm_generic(m, n, k, n_tiled, a, b, c, accumulate);
#else
    gemm_generic(m, n, k, 0, a, b, c, accumulate);
#endif
}

void validate_sites(std::span<const int> sites, int num_sites) {
    require(num_sites >= 1 && num_sites < 31, "site count out of range");
    std::vector<bool> seen(static_cast<std::size_t>(num_sites), false);
    for (int s : sites) {
        require(s >= 0 && s < num_sites, "site index out of range");
        require(!seen[static_cast<std::size_t>(s)], "repeated site index");
        seen[static_cast<std::size_t>(s)] = true;
    }
}

}  // namespace

// ---- ComplexMatrix -------------------------------------------------------

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {
    require(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    require(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
    require(data_.size() == rows * cols, "entry count does not match dimensions");
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
    const std::size_t r = rows.size();
    require(r >= 1, "empty matrix literal");
    const std::size_t c = rows.begin()->size();
    std::vector<Complex> entries;
    entries.reserve(r * c);
    for (const auto& row : rows) {
        require(row.size() == c, "ragged matrix literal");
        entries.insert(entries.end(), row.begin(), row.end());
    }
    return {r, c, std::move(entries)};
}

void ComplexMatrix::set_zero() { std::fill(data_.begin(), data_.end(), Complex{}); }

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    require(rows_ == other.rows_ && cols_ == other.cols_, "shape mismatch in +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    require(rows_ == other.rows_ && cols_ == other.cols_, "shape mismatch in -=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
    for (auto& x : data_) x *= s;
    return *this;
}

void ComplexMatrix::add_scaled(Complex s, const ComplexMatrix& other) {
    require(rows_ == other.rows_ && cols_ == other.cols_, "shape mismatch in add_scaled");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

// ---- products ------------------------------------------------------------

void matmul_into(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& out,
                 bool accumulate) {
    require(a.cols() == b.rows(), "matmul: inner dimensions differ");
    if (out.rows() != a.rows() || out.cols() != b.cols()) {
        require(!accumulate, "matmul: accumulate target has wrong shape");
        out = ComplexMatrix(a.rows(), b.cols());
    }
    gemm(a.rows(), b.cols(), a.cols(), a.data(), b.data(), out.data(), accumulate);
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    require(a.cols() == b.rows(), "matmul: inner dimensions differ");
    ComplexMatrix out(a.rows(), b.cols());
    gemm(a.rows(), b.cols(), a.cols(), a.data(), b.data(), out.data(), false);
    return out;
}

StateVector matvec(const ComplexMatrix& a, std::span<const Complex> v) {
    require(a.cols() == v.size(), "matvec: dimension mismatch");
    StateVector out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const Complex* row = a.row(i);
        Complex acc{};
        for (std::size_t j = 0; j < a.cols(); ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

StateVector adjoint_matvec(const ComplexMatrix& a, std::span<const Complex> v) {
    require(a.rows() == v.size(), "adjoint_matvec: dimension mismatch");
    StateVector out(a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const Complex* row = a.row(i);
        const Complex vi = v[i];
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += std::conj(row[j]) * vi;
    }
    return out;
}

ComplexMatrix adjoint(const ComplexMatrix& a) {
    ComplexMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
    }
    return out;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out = matmul(a, b);
    out -= matmul(b, a);
    return out;
}

// ---- scalars -------------------------------------------------------------

Complex trace(const ComplexMatrix& a) {
    require(a.is_square(), "trace: matrix is not square");
    Complex t{};
    for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
    return t;
}

Complex pair_trace(const ComplexMatrix& a, const ComplexMatrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "pair_trace: shape mismatch");
    const auto* x = reinterpret_cast<const double*>(a.data());
    const auto* y = reinterpret_cast<const double*>(b.data());
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        // a * conj(b)
        re += x[2 * i] * y[2 * i] + x[2 * i + 1] * y[2 * i + 1];
        im += x[2 * i + 1] * y[2 * i] - x[2 * i] * y[2 * i + 1];
    }
    return {re, im};
}

double frobenius_norm(const ComplexMatrix& a) {
    double s = 0.0;
    for (const auto& x : a.entries()) s += std::norm(x);
    return std::sqrt(s);
}

double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "frobenius_distance: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a.data()[i] - b.data()[i]);
    return std::sqrt(s);
}

double one_norm(const ComplexMatrix& a) {
    std::vector<double> col(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) col[j] += std::abs(a(i, j));
    return *std::max_element(col.begin(), col.end());
}

double hermiticity_residual(const ComplexMatrix& a) {
    require(a.is_square(), "hermiticity_residual: matrix is not square");
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += std::norm(a(i, j) - std::conj(a(j, i)));
    return std::sqrt(s);
}

double unitarity_residual(const ComplexMatrix& a) {
    require(a.is_square(), "unitarity_residual: matrix is not square");
    ComplexMatrix w = matmul(adjoint(a), a);
    for (std::size_t i = 0; i < w.rows(); ++i) w(i, i) -= 1.0;
    return frobenius_norm(w);
}

bool all_finite(const ComplexMatrix& a) {
    return std::all_of(a.entries().begin(), a.entries().end(), [](const Complex& x) {
        return std::isfinite(x.real()) && std::isfinite(x.imag());
    });
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
    require(a.size() == b.size(), "inner: dimension mismatch");
    Complex s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double norm(std::span<const Complex> v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

double expectation_value(std::span<const Complex> v, const ComplexMatrix& op) {
    require(op.is_square() && op.rows() == v.size(), "expectation_value: dimension mismatch");
    return inner(v, matvec(op, v)).real();
}

// ---- tensor structure ----------------------------------------------------

SiteSplit::SiteSplit(std::span<const int> sites, int num_sites)
    : num_sites_(num_sites), sites_(sites.begin(), sites.end()) {
    validate_sites(sites, num_sites);
    const int k = static_cast<int>(sites_.size());
    local_dim_ = std::size_t{1} << k;
    rest_dim_ = std::size_t{1} << (num_sites - k);

    std::vector<int> rest_sites;
    for (int s = 0; s < num_sites; ++s) {
        if (std::find(sites_.begin(), sites_.end(), s) == sites_.end()) rest_sites.push_back(s);
    }
    table_.resize(local_dim_ * rest_dim_);
    for (std::size_t r = 0; r < rest_dim_; ++r) {
        std::size_t base = 0;
        for (std::size_t m = 0; m < rest_sites.size(); ++m) {
            if ((r >> m) & 1U) base |= std::size_t{1} << rest_sites[m];
        }
        for (std::size_t p = 0; p < local_dim_; ++p) {
            std::size_t idx = base;
            for (int m = 0; m < k; ++m) {
                if ((p >> m) & 1U) idx |= std::size_t{1} << sites_[static_cast<std::size_t>(m)];
            }
            table_[r * local_dim_ + p] = idx;
        }
    }
}

ComplexMatrix embed_local(const ComplexMatrix& op, std::span<const int> sites, int num_sites) {
    SiteSplit split(sites, num_sites);
    require(op.is_square() && op.rows() == split.local_dim(),
            "embed_local: operator dimension does not match site count");
    const std::size_t n = split.full_dim();
    ComplexMatrix out(n, n);
    for (std::size_t r = 0; r < split.rest_dim(); ++r)
        for (std::size_t p = 0; p < split.local_dim(); ++p)
            for (std::size_t q = 0; q < split.local_dim(); ++q)
                out(split.full(r, p), split.full(r, q)) = op(p, q);
    return out;
}

ComplexMatrix apply_local(const ComplexMatrix& op, const SiteSplit& split, const ComplexMatrix& m) {
    require(op.is_square() && op.rows() == split.local_dim(),
            "apply_local: operator dimension does not match site count");
    require(m.rows() == split.full_dim(), "apply_local: matrix dimension mismatch");
    const std::size_t cols = m.cols();
    ComplexMatrix out(m.rows(), cols);
    for (std::size_t r = 0; r < split.rest_dim(); ++r) {
        for (std::size_t p = 0; p < split.local_dim(); ++p) {
            Complex* dst = out.row(split.full(r, p));
            for (std::size_t q = 0; q < split.local_dim(); ++q) {
                const Complex coef = op(p, q);
                if (coef == Complex{}) continue;
                const Complex* src = m.row(split.full(r, q));
                for (std::size_t c = 0; c < cols; ++c) dst[c] += coef * src[c];
            }
        }
    }
    return out;
}

StateVector apply_local(const ComplexMatrix& op, const SiteSplit& split, std::span<const Complex> v) {
    require(op.is_square() && op.rows() == split.local_dim(),
            "apply_local: operator dimension does not match site count");
    require(v.size() == split.full_dim(), "apply_local: vector dimension mismatch");
    StateVector out(v.size());
    for (std::size_t r = 0; r < split.rest_dim(); ++r)
        for (std::size_t p = 0; p < split.local_dim(); ++p) {
            Complex acc{};
            for (std::size_t q = 0; q < split.local_dim(); ++q) acc += op(p, q) * v[split.full(r, q)];
            out[split.full(r, p)] = acc;
        }
    return out;
}

ComplexMatrix embed_rest(const ComplexMatrix& op, const SiteSplit& split) {
    require(op.is_square() && op.rows() == split.rest_dim(), "embed_rest: dimension mismatch");
    const std::size_t n = split.full_dim();
    ComplexMatrix out(n, n);
    for (std::size_t r = 0; r < split.rest_dim(); ++r)
        for (std::size_t s = 0; s < split.rest_dim(); ++s)
            for (std::size_t p = 0; p < split.local_dim(); ++p)
                out(split.full(r, p), split.full(s, p)) = op(r, s);
    return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& a, const SiteSplit& split) {
    require(a.is_square() && a.rows() == split.full_dim(), "partial_trace: dimension mismatch");
    ComplexMatrix out(split.rest_dim(), split.rest_dim());
    for (std::size_t r = 0; r < split.rest_dim(); ++r)
        for (std::size_t s = 0; s < split.rest_dim(); ++s) {
            Complex acc{};
            for (std::size_t p = 0; p < split.local_dim(); ++p)
                acc += a(split.full(r, p), split.full(s, p));
            out(r, s) = acc;
        }
    return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& a, std::span<const int> traced_sites,
                            int num_sites) {
    return partial_trace(a, SiteSplit(traced_sites, num_sites));
}

ComplexMatrix partial_trace_product_adjoint(const ComplexMatrix& a, const ComplexMatrix& b,
                                            const SiteSplit& split) {
    require(a.rows() == split.full_dim() && b.rows() == split.full_dim() && a.cols() == b.cols(),
            "partial_trace_product_adjoint: dimension mismatch");
    const std::size_t rest = split.rest_dim();
    const std::size_t cols = a.cols();
    ComplexMatrix out(rest, rest);
    ComplexMatrix rows_a(rest, cols);
    ComplexMatrix rows_b_adj(cols, rest);
    for (std::size_t p = 0; p < split.local_dim(); ++p) {
        for (std::size_t r = 0; r < rest; ++r) {
            std::copy_n(a.row(split.full(r, p)), cols, rows_a.row(r));
            const Complex* src = b.row(split.full(r, p));
            for (std::size_t c = 0; c < cols; ++c) rows_b_adj(c, r) = std::conj(src[c]);
        }
        matmul_into(rows_a, rows_b_adj, out, /*accumulate=*/p > 0);
    }
    return out;
}

// ---- matrix functions ----------------------------------------------------

ComplexMatrix expm_antihermitian(const ComplexMatrix& g, double tol) {
    require(g.is_square(), "expm_antihermitian: matrix is not square");
    require(tol > 0.0, "expm_antihermitian: tolerance must be positive");
    {
        double s = 0.0;
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) s += std::norm(g(i, j) + std::conj(g(j, i)));
        require(std::sqrt(s) <= 1e-10 * std::max(1.0, frobenius_norm(g)),
                "expm_antihermitian: input is not anti-Hermitian");
    }
    const std::size_t n = g.rows();
    const double gnorm = one_norm(g);
    int squarings = 0;
    double scaled = gnorm;
    while (scaled > 0.5) {
        scaled *= 0.5;
        ++squarings;
    }
    ComplexMatrix a = std::ldexp(1.0, -squarings) * g;

    ComplexMatrix sum = ComplexMatrix::identity(n);
    ComplexMatrix term = ComplexMatrix::identity(n);
    ComplexMatrix next(n, n);
    for (int k = 1; k < 64; ++k) {
        matmul_into(term, a, next);
        next *= 1.0 / k;
        std::swap(term, next);
        sum += term;
        if (one_norm(term) <= tol) break;
    }
    for (int i = 0; i < squarings; ++i) {
        matmul_into(sum, sum, next);
        std::swap(sum, next);
    }
    return sum;
}

double polar_unitarize_inplace(ComplexMatrix& u) {
    require(u.is_square(), "polar_unitarize: matrix is not square");
    const std::size_t n = u.rows();
    const double tol =
        std::max(1e-13, 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n));

    ComplexMatrix uh = adjoint(u);
    ComplexMatrix gram(n, n);
    ComplexMatrix next(n, n);
    auto residual = [&] {
        matmul_into(uh, u, gram);
        for (std::size_t i = 0; i < n; ++i) gram(i, i) -= 1.0;
        return frobenius_norm(gram);
    };

    double r = residual();
    if (!std::isfinite(r) || r >= 1.0) {
        throw IntegrationInstability("polar_unitarize: frame drifted too far from unitarity (residual " +
                                     std::to_string(r) + ")");
    }
    for (int iter = 0; iter < 32 && r > tol; ++iter) {
        // gram holds u^dagger u - I, so (3I - u^dagger u)/2 = I - gram/2
        gram *= -0.5;
        for (std::size_t i = 0; i < n; ++i) gram(i, i) += 1.0;
        matmul_into(u, gram, next);
        std::swap(u, next);
        uh = adjoint(u);
        const double r_new = residual();
        if (!std::isfinite(r_new)) {
            throw IntegrationInstability("polar_unitarize: iteration produced non-finite entries");
        }
        if (r_new >= r) {
            // Stalled at the rounding floor; anything larger is genuine divergence.
            if (r < 1e-10) return r_new;
            throw IntegrationInstability("polar_unitarize: Newton-Schulz iteration diverged");
        }
        r = r_new;
    }
    return r;
}

ComplexMatrix polar_unitarize(const ComplexMatrix& u) {
    ComplexMatrix out = u;
    polar_unitarize_inplace(out);
    return out;
}

namespace pauli {
ComplexMatrix identity() { return ComplexMatrix::identity(2); }
ComplexMatrix x() { return ComplexMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}); }
ComplexMatrix y() {
    return ComplexMatrix::from_rows({{0.0, Complex(0.0, -1.0)}, {Complex(0.0, 1.0), 0.0}});
}
ComplexMatrix z() { return ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, -1.0}}); }
}  // namespace pauli

}  // namespace gauge
