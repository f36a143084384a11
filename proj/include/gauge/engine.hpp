#pragma once

// Modified gauge-picture integrator.
//
// The evolved object is one unitary frame U_I per patch, with
//   d/dt U_I = -i G_I U_I,   G_I = H<I>^G + gamma X_I,
// and every other gauge-picture quantity is a derived view:
//   psi_I = U_I psi0,   U_IJ = U_I U_J^dagger,
//   H<I>^G = sum_{J overlaps I} U_IJ H_J U_JI = U_I (sum_J U_J^dagger H_J U_J) U_I^dagger,
//   X_I = Tr_I sum_{J overlaps I} (-i)(U_IJ - U_IJ^dagger)   (tensored with 1 on patch I).
// Flatness and psi_I = U_IJ psi_J therefore hold by construction.

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "gauge/linalg.hpp"
#include "gauge/model.hpp"

namespace gauge {

enum class XConvention {
    literal,     // (Tr_I Xtilde_I) (x) 1_I
    normalized,  // the same divided by 2^|I|; literal gamma equals normalized 2^|I| gamma
};

struct EvolutionConfig {
    double gamma = 0.0;
    double dt = 0.005;
    double t_max = 5.0;
    int sample_stride = 1;
    XConvention x_convention = XConvention::normalized;
    int unitarize_every = 1;
    int threads = 1;
};

void validate(const EvolutionConfig& config);

// Number of integrator steps covering [0, t_max]; t_max must be a whole
// number of steps to within 1e-9 relative.
std::size_t num_steps(const EvolutionConfig& config);

class GaugeState {
public:
    // Identity frames: all connections 1, every psi_I equal to psi0.
    GaugeState(PatchCover cover, StateVector psi0);
    GaugeState(PatchCover cover, StateVector psi0, std::vector<ComplexMatrix> frames, double t);

    const PatchCover& cover() const noexcept { return cover_; }
    const StateVector& psi0() const noexcept { return psi0_; }
    const std::vector<ComplexMatrix>& frames() const noexcept { return frames_; }
    const ComplexMatrix& frame(std::size_t i) const { return frames_.at(i); }
    std::vector<ComplexMatrix>& mutable_frames() noexcept { return frames_; }
    std::size_t dim() const noexcept { return psi0_.size(); }
    double time() const noexcept { return t_; }
    void set_time(double t) noexcept { t_ = t; }

private:
    PatchCover cover_;
    StateVector psi0_;
    std::vector<ComplexMatrix> frames_;
    double t_ = 0.0;
};

GaugeState init_gauge_state(PatchCover cover, StateVector psi0);

ComplexMatrix connection(const GaugeState& state, std::size_t i, std::size_t j);
StateVector local_wavefunction(const GaugeState& state, std::size_t i);

// Reference (unoptimized) forms of the generator pieces. The integrator uses
// an algebraically equivalent factored evaluation; these exist for
// inspection and as cross-checks.
ComplexMatrix effective_hamiltonian(const GaugeState& state, const LocalHamiltonian& model,
                                    std::size_t i);
ComplexMatrix xtilde(const GaugeState& state, std::size_t i);
ComplexMatrix x_term(const GaugeState& state, std::size_t i, XConvention convention);
ComplexMatrix generator(const GaugeState& state, const LocalHamiltonian& model, std::size_t i,
                        double gamma, XConvention convention);

// <psi_I| op |psi_I> for op acting on op_sites, which must lie inside patch I.
double local_expectation(const GaugeState& state, std::size_t i, const ComplexMatrix& op,
                         std::span<const int> op_sites);

// Owns the workspaces for repeated RK4 steps on one model.
class GaugeIntegrator {
public:
    GaugeIntegrator(LocalHamiltonian model, EvolutionConfig config);

    const LocalHamiltonian& model() const noexcept { return model_; }
    const EvolutionConfig& config() const noexcept { return config_; }

    // One classical RK4 step of all frames with stage-consistent generators,
    // followed by re-unitarization every `unitarize_every` steps.
    void step(GaugeState& state);

    // d/dt U_I = -i G_I(U) U_I for every patch.
    void derivative(std::span<const ComplexMatrix> frames, std::vector<ComplexMatrix>& out);

private:
    struct Workspace {
        ComplexMatrix a, b, c;
        ComplexMatrix rest_a, rest_b, rest_c, rest_d;
    };

    void conjugated_terms(std::span<const ComplexMatrix> frames);
    void patch_derivative(std::span<const ComplexMatrix> frames, std::size_t i, Workspace& ws,
                          ComplexMatrix& out);

    LocalHamiltonian model_;
    EvolutionConfig config_;
    std::size_t dim_;
    std::vector<SiteSplit> splits_;
    std::vector<Workspace> workspaces_;
    std::vector<ComplexMatrix> conjugated_;  // U_J^dagger H_J U_J
    std::vector<ComplexMatrix> k_, stage_, acc_;
    std::size_t steps_taken_ = 0;
};

// Convenience single step (allocates a fresh integrator).
GaugeState rk4_step(const GaugeState& state, const LocalHamiltonian& model,
                    const EvolutionConfig& config);

struct ObservableRequest {
    bool site_fields = true;   // <sigma^x_i>, <sigma^z_i> from the owning patch
    bool deviations = true;    // S_IJ for nearest-neighbour patch pairs
    bool unitarity = true;     // max_I ||U_I^dagger U_I - 1||_F
    bool energy = false;       // |sum_J <psi_J|H_J|psi_J> - E(0)|
};

struct RunResult {
    std::vector<double> times;
    std::vector<std::vector<double>> sx;  // [site][sample]
    std::vector<std::vector<double>> sz;
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::vector<double>> s_pairs;  // [pair][sample]
    std::vector<double> s_mean;
    std::vector<double> unitarity;
    std::vector<double> energy_drift;
};

using SampleObserver = std::function<void(const GaugeState&)>;

// Patch pairs (I, I+1 mod P) that overlap; falls back to every overlapping
// unordered pair when the cover has no such ring structure.
std::vector<std::pair<int, int>> neighbor_pairs(const PatchCover& cover);

// Index of the patch whose first site is `site` (else the first patch containing it).
std::size_t owning_patch(const PatchCover& cover, int site);

RunResult run(const LocalHamiltonian& model, const StateVector& psi0,
              const EvolutionConfig& config, const ObservableRequest& request = {},
              const SampleObserver& observer = {});

// TFIM quench from the all +X product state.
RunResult run(const ModelSpec& spec, const EvolutionConfig& config,
              const ObservableRequest& request = {}, const SampleObserver& observer = {});

}  // namespace gauge
