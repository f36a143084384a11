#include "gauge/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gauge/errors.hpp"

namespace gauge {

PatchCover::PatchCover(int num_sites, std::vector<Patch> patches)
    : num_sites_(num_sites), patches_(std::move(patches)) {
    if (num_sites < 1) throw InvalidInput("cover needs at least one site");
    if (patches_.empty()) throw InvalidInput("cover needs at least one patch");
    std::vector<bool> covered(static_cast<std::size_t>(num_sites), false);
    for (std::size_t i = 0; i < patches_.size(); ++i) {
        Patch& p = patches_[i];
        if (p.id != static_cast<int>(i)) throw InvalidInput("patch ids must equal their position");
        if (p.sites.empty()) throw InvalidInput("patch has no sites");
        for (std::size_t a = 0; a < p.sites.size(); ++a) {
            const int s = p.sites[a];
            if (s < 0 || s >= num_sites) {
                throw InvalidInput("patch " + std::to_string(i) + " has site out of range");
            }
            if (std::find(p.sites.begin(), p.sites.begin() + static_cast<long>(a), s) !=
                p.sites.begin() + static_cast<long>(a)) {
                throw InvalidInput("patch " + std::to_string(i) + " repeats a site");
            }
            covered[static_cast<std::size_t>(s)] = true;
        }
    }
    if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
        throw InvalidInput("cover leaves a site uncovered");
    }
    overlaps_.resize(patches_.size());
    for (std::size_t i = 0; i < patches_.size(); ++i) {
        for (std::size_t j = 0; j < patches_.size(); ++j) {
            const auto& si = patches_[i].sites;
            const auto& sj = patches_[j].sites;
            const bool shared = std::any_of(si.begin(), si.end(), [&](int s) {
                return std::find(sj.begin(), sj.end(), s) != sj.end();
            });
            if (shared) overlaps_[i].push_back(static_cast<int>(j));
        }
    }
}

bool PatchCover::overlap(std::size_t i, std::size_t j) const {
    const auto& o = overlaps_.at(i);
    return std::find(o.begin(), o.end(), static_cast<int>(j)) != o.end();
}

PatchCover build_chain_cover(int num_sites) {
    if (num_sites < 3) throw InvalidInput("chain cover requires L >= 3");
    std::vector<Patch> patches;
    patches.reserve(static_cast<std::size_t>(num_sites));
    for (int i = 0; i < num_sites; ++i) patches.push_back({i, {i, (i + 1) % num_sites}});
    return {num_sites, std::move(patches)};
}

void validate(const ModelSpec& spec) {
    if (spec.length < 3) throw InvalidInput("model length must be >= 3 (periodic chain)");
    if (!std::isfinite(spec.coupling) || !std::isfinite(spec.hx) || !std::isfinite(spec.hz)) {
        throw InvalidInput("model couplings must be finite");
    }
}

LocalTerm tfim_local_term(const Patch& patch, const ModelSpec& spec) {
    if (patch.sites.size() != 2) throw InvalidInput("TFIM term needs a two-site patch");
    const ComplexMatrix id = pauli::identity();
    const ComplexMatrix x = pauli::x();
    const ComplexMatrix z = pauli::z();
    // local bit 0 <-> sites[0] (right Kronecker factor)
    const ComplexMatrix x_first = kron(id, x);
    const ComplexMatrix x_second = kron(x, id);
    const ComplexMatrix z_first = kron(id, z);
    const ComplexMatrix z_second = kron(z, id);

    ComplexMatrix h = -spec.coupling * kron(z, z);
    h.add_scaled(-0.5 * spec.hx, x_first + x_second);
    h.add_scaled(-0.5 * spec.hz, z_first + z_second);
    return {patch, std::move(h)};
}

LocalHamiltonian tfim_model(const ModelSpec& spec) {
    validate(spec);
    PatchCover cover = build_chain_cover(spec.length);
    std::vector<LocalTerm> terms;
    terms.reserve(cover.size());
    for (const auto& p : cover.patches()) terms.push_back(tfim_local_term(p, spec));
    return {std::move(cover), std::move(terms)};
}

ComplexMatrix assemble_full_hamiltonian(const ModelSpec& spec, int max_length) {
    validate(spec);
    if (spec.length > max_length) {
        throw ResourceLimit("full Hamiltonian for L=" + std::to_string(spec.length) +
                            " exceeds the dense cap L=" + std::to_string(max_length));
    }
    const int L = spec.length;
    const std::size_t n = std::size_t{1} << L;
    ComplexMatrix h(n, n);
    for (std::size_t b = 0; b < n; ++b) {
        double diag = 0.0;
        for (int i = 0; i < L; ++i) {
            const int j = (i + 1) % L;
            const double zi = ((b >> i) & 1U) ? -1.0 : 1.0;
            const double zj = ((b >> j) & 1U) ? -1.0 : 1.0;
            diag += -spec.coupling * zi * zj - spec.hz * zi;
        }
        h(b, b) = diag;
        for (int i = 0; i < L; ++i) h(b ^ (std::size_t{1} << i), b) += -spec.hx;
    }
    return h;
}

ComplexMatrix assemble_from_terms(const LocalHamiltonian& model) {
    const int L = model.cover.num_sites();
    const std::size_t n = std::size_t{1} << L;
    ComplexMatrix h(n, n);
    for (const auto& term : model.terms) h += embed_local(term.matrix, term.patch.sites, L);
    return h;
}

StateVector plus_x_state(int num_sites) {
    if (num_sites < 1) throw InvalidInput("state needs at least one site");
    const std::size_t n = std::size_t{1} << num_sites;
    return StateVector(n, Complex(1.0 / std::sqrt(static_cast<double>(n)), 0.0));
}

StateVector basis_state(int num_sites, std::size_t index) {
    if (num_sites < 1) throw InvalidInput("state needs at least one site");
    const std::size_t n = std::size_t{1} << num_sites;
    if (index >= n) throw InvalidInput("basis index out of range");
    StateVector v(n);
    v[index] = 1.0;
    return v;
}

double sigma_x_expectation(std::span<const Complex> psi, int site) {
    const std::size_t bit = std::size_t{1} << site;
    if (site < 0 || bit >= psi.size()) throw InvalidInput("site out of range");
    double acc = 0.0;
    for (std::size_t b = 0; b < psi.size(); ++b) acc += (std::conj(psi[b ^ bit]) * psi[b]).real();
    return acc;
}

double sigma_z_expectation(std::span<const Complex> psi, int site) {
    const std::size_t bit = std::size_t{1} << site;
    if (site < 0 || bit >= psi.size()) throw InvalidInput("site out of range");
    double acc = 0.0;
    for (std::size_t b = 0; b < psi.size(); ++b) acc += (b & bit) ? -std::norm(psi[b]) : std::norm(psi[b]);
    return acc;
}

}  // namespace gauge
