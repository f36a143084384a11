#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gauge/linalg.hpp"

namespace gauge {

struct Patch {
    int id = 0;
    std::vector<int> sites;
};

// A set of patches covering an L-site lattice plus the overlap adjacency.
// overlaps(i) lists every patch sharing at least one site with patch i,
// including i itself, in increasing id order.
class PatchCover {
public:
    PatchCover(int num_sites, std::vector<Patch> patches);

    int num_sites() const noexcept { return num_sites_; }
    std::size_t size() const noexcept { return patches_.size(); }
    const Patch& patch(std::size_t i) const { return patches_.at(i); }
    const std::vector<Patch>& patches() const noexcept { return patches_; }
    const std::vector<int>& overlaps(std::size_t i) const { return overlaps_.at(i); }
    bool overlap(std::size_t i, std::size_t j) const;

private:
    int num_sites_;
    std::vector<Patch> patches_;
    std::vector<std::vector<int>> overlaps_;
};

// Periodic nearest-neighbour cover: patch i = <i, i+1 mod L>.
PatchCover build_chain_cover(int num_sites);

// One Hamiltonian term H_J bound to patch J; acts on patch.sites in order.
struct LocalTerm {
    Patch patch;
    ComplexMatrix matrix;
};

// H = sum_J H_J over a cover, one term per patch (index-aligned with the cover).
struct LocalHamiltonian {
    PatchCover cover;
    std::vector<LocalTerm> terms;
};

struct ModelSpec {
    int length = 6;
    double coupling = 1.0;  // J
    double hx = 1.0;
    double hz = 0.0;
};

void validate(const ModelSpec& spec);

// H_<ij> = -J Z_i Z_j - (hx/2)(X_i + X_j) - (hz/2)(Z_i + Z_j)
LocalTerm tfim_local_term(const Patch& patch, const ModelSpec& spec);

LocalHamiltonian tfim_model(const ModelSpec& spec);

inline constexpr int kMaxDenseLength = 12;

// Full 2^L Hamiltonian built directly from its Pauli-string form.
ComplexMatrix assemble_full_hamiltonian(const ModelSpec& spec, int max_length = kMaxDenseLength);

// Sum of embedded local terms; must equal the direct assembly.
ComplexMatrix assemble_from_terms(const LocalHamiltonian& model);

StateVector plus_x_state(int num_sites);
StateVector basis_state(int num_sites, std::size_t index);

// Single-site Pauli expectations evaluated directly on the amplitudes.
double sigma_x_expectation(std::span<const Complex> psi, int site);
double sigma_z_expectation(std::span<const Complex> psi, int site);

}  // namespace gauge
