#include "gauge/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gauge/errors.hpp"
#include "gauge/metrics.hpp"
#include "gauge/parallel.hpp"

namespace gauge {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

void check_patch(const PatchCover& cover, std::size_t i) {
    if (i >= cover.size()) throw InvalidInput("patch index " + std::to_string(i) + " out of range");
}

SiteSplit split_of(const PatchCover& cover, std::size_t i) {
    return {cover.patch(i).sites, cover.num_sites()};
}

double x_scale(XConvention convention, const SiteSplit& split) {
    return convention == XConvention::normalized ? 1.0 / static_cast<double>(split.local_dim())
                                                 : 1.0;
}

}  // namespace

void validate(const EvolutionConfig& config) {
    if (!(config.dt > 0.0) || !std::isfinite(config.dt)) throw InvalidInput("dt must be positive");
    if (!(config.t_max >= 0.0) || !std::isfinite(config.t_max)) {
        throw InvalidInput("t_max must be non-negative");
    }
    if (!std::isfinite(config.gamma)) throw InvalidInput("gamma must be finite");
    if (config.sample_stride < 1) throw InvalidInput("sample_stride must be >= 1");
    if (config.unitarize_every < 0) throw InvalidInput("unitarize_every must be >= 0");
    if (config.threads < 1) throw InvalidInput("threads must be >= 1");
    num_steps(config);
}

std::size_t num_steps(const EvolutionConfig& config) {
    const double ratio = config.t_max / config.dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
        throw InvalidInput("t_max must be an integer multiple of dt");
    }
    return static_cast<std::size_t>(rounded);
}

// ---- state ---------------------------------------------------------------

GaugeState::GaugeState(PatchCover cover, StateVector psi0)
    : cover_(std::move(cover)), psi0_(std::move(psi0)) {
    const std::size_t n = std::size_t{1} << cover_.num_sites();
    if (psi0_.size() != n) throw InvalidInput("initial state dimension does not match 2^L");
    if (std::abs(norm(psi0_) - 1.0) > 1e-10) throw InvalidInput("initial state is not normalized");
    frames_.assign(cover_.size(), ComplexMatrix::identity(n));
}

GaugeState::GaugeState(PatchCover cover, StateVector psi0, std::vector<ComplexMatrix> frames,
                       double t)
    : cover_(std::move(cover)), psi0_(std::move(psi0)), frames_(std::move(frames)), t_(t) {
    const std::size_t n = std::size_t{1} << cover_.num_sites();
    if (psi0_.size() != n) throw InvalidInput("initial state dimension does not match 2^L");
    if (frames_.size() != cover_.size()) throw InvalidInput("need one frame per patch");
    for (const auto& f : frames_) {
        if (f.rows() != n || f.cols() != n) throw InvalidInput("frame dimension does not match 2^L");
    }
}

GaugeState init_gauge_state(PatchCover cover, StateVector psi0) {
    return {std::move(cover), std::move(psi0)};
}

ComplexMatrix connection(const GaugeState& state, std::size_t i, std::size_t j) {
    check_patch(state.cover(), i);
    check_patch(state.cover(), j);
    return matmul(state.frame(i), adjoint(state.frame(j)));
}

StateVector local_wavefunction(const GaugeState& state, std::size_t i) {
    check_patch(state.cover(), i);
    return matvec(state.frame(i), state.psi0());
}

ComplexMatrix effective_hamiltonian(const GaugeState& state, const LocalHamiltonian& model,
                                    std::size_t i) {
    check_patch(state.cover(), i);
    const int L = state.cover().num_sites();
    const std::size_t n = state.dim();
    ComplexMatrix h(n, n);
    for (int j : state.cover().overlaps(i)) {
        const auto& term = model.terms.at(static_cast<std::size_t>(j));
        const ComplexMatrix u_ij = connection(state, i, static_cast<std::size_t>(j));
        h += matmul(matmul(u_ij, embed_local(term.matrix, term.patch.sites, L)), adjoint(u_ij));
    }
    return h;
}

ComplexMatrix xtilde(const GaugeState& state, std::size_t i) {
    check_patch(state.cover(), i);
    const std::size_t n = state.dim();
    ComplexMatrix x(n, n);
    for (int j : state.cover().overlaps(i)) {
        const ComplexMatrix u_ij = connection(state, i, static_cast<std::size_t>(j));
        x.add_scaled(kMinusI, u_ij - adjoint(u_ij));
    }
    return x;
}

ComplexMatrix x_term(const GaugeState& state, std::size_t i, XConvention convention) {
    check_patch(state.cover(), i);
    const SiteSplit split = split_of(state.cover(), i);
    ComplexMatrix reduced = partial_trace(xtilde(state, i), split);
    reduced *= x_scale(convention, split);
    return embed_rest(reduced, split);
}

ComplexMatrix generator(const GaugeState& state, const LocalHamiltonian& model, std::size_t i,
                        double gamma, XConvention convention) {
    ComplexMatrix g = effective_hamiltonian(state, model, i);
    if (gamma != 0.0) g.add_scaled(gamma, x_term(state, i, convention));
    return g;
}

double local_expectation(const GaugeState& state, std::size_t i, const ComplexMatrix& op,
                         std::span<const int> op_sites) {
    check_patch(state.cover(), i);
    const auto& sites = state.cover().patch(i).sites;
    for (int s : op_sites) {
        if (std::find(sites.begin(), sites.end(), s) == sites.end()) {
            throw InvalidInput("operator is not supported on patch " + std::to_string(i));
        }
    }
    const SiteSplit split(op_sites, state.cover().num_sites());
    const StateVector psi = local_wavefunction(state, i);
    return inner(psi, apply_local(op, split, std::span<const Complex>(psi))).real();
}

// ---- integrator ----------------------------------------------------------

GaugeIntegrator::GaugeIntegrator(LocalHamiltonian model, EvolutionConfig config)
    : model_(std::move(model)), config_(config) {
    validate(config_);
    const auto& cover = model_.cover;
    if (model_.terms.size() != cover.size()) throw InvalidInput("need one local term per patch");
    dim_ = std::size_t{1} << cover.num_sites();
    for (std::size_t i = 0; i < cover.size(); ++i) {
        const auto& term = model_.terms[i];
        if (term.patch.sites != cover.patch(i).sites) {
            throw InvalidInput("local term " + std::to_string(i) + " is not bound to its patch");
        }
        splits_.push_back(split_of(cover, i));
        if (term.matrix.rows() != splits_.back().local_dim() || !term.matrix.is_square()) {
            throw InvalidInput("local term " + std::to_string(i) + " has wrong dimension");
        }
        if (hermiticity_residual(term.matrix) > 1e-12) {
            throw InvalidInput("local term " + std::to_string(i) + " is not Hermitian");
        }
    }
    const std::size_t p = cover.size();
    const auto workers = static_cast<std::size_t>(std::max(1, std::min<int>(config_.threads, static_cast<int>(p))));
    workspaces_.resize(workers);
    conjugated_.assign(p, ComplexMatrix(dim_, dim_));
    k_.assign(p, ComplexMatrix(dim_, dim_));
    stage_.assign(p, ComplexMatrix(dim_, dim_));
    acc_.assign(p, ComplexMatrix(dim_, dim_));
}

void GaugeIntegrator::conjugated_terms(std::span<const ComplexMatrix> frames) {
    parallel_for(frames.size(), config_.threads, [&](std::size_t j, std::size_t w) {
        Workspace& ws = workspaces_[w];
        // U_J^dagger (H_J U_J); H_J is applied through its local support.
        ws.a = apply_local(model_.terms[j].matrix, splits_[j], frames[j]);
        ws.b = adjoint(frames[j]);
        matmul_into(ws.b, ws.a, conjugated_[j]);
    });
}

void GaugeIntegrator::patch_derivative(std::span<const ComplexMatrix> frames, std::size_t i,
                                       Workspace& ws, ComplexMatrix& out) {
    const auto& overlaps = model_.cover.overlaps(i);
    const SiteSplit& split = splits_[i];

    // U_I K_I with K_I = sum_J U_J^dagger H_J U_J equals H<I>^G U_I on unitary frames.
    ws.c = conjugated_[static_cast<std::size_t>(overlaps.front())];
    for (std::size_t n = 1; n < overlaps.size(); ++n) {
        ws.c += conjugated_[static_cast<std::size_t>(overlaps[n])];
    }
    matmul_into(frames[i], ws.c, out);

    if (config_.gamma != 0.0) {
        const std::size_t rest = split.rest_dim();
        const std::size_t local = split.local_dim();
        // Rows of U_I grouped by patch-local index: block p holds rows full(., p).
        if (ws.rest_a.rows() != rest || ws.rest_a.cols() != dim_) {
            ws.rest_a = ComplexMatrix(rest, dim_);
            ws.rest_b = ComplexMatrix(dim_, rest);
            ws.rest_c = ComplexMatrix(rest, rest);
        }
        ComplexMatrix traced(rest, rest);
        bool first = true;
        for (int j : overlaps) {
            if (static_cast<std::size_t>(j) == i) continue;
            const ComplexMatrix& uj = frames[static_cast<std::size_t>(j)];
            for (std::size_t p = 0; p < local; ++p) {
                for (std::size_t r = 0; r < rest; ++r) {
                    std::copy_n(frames[i].row(split.full(r, p)), dim_, ws.rest_a.row(r));
                    const Complex* src = uj.row(split.full(r, p));
                    for (std::size_t c = 0; c < dim_; ++c) ws.rest_b(c, r) = std::conj(src[c]);
                }
                matmul_into(ws.rest_a, ws.rest_b, traced, !first);
                first = false;
            }
        }
        if (!first) {
            // reduced X_I = -i (T - T^dagger), scaled by gamma and the convention factor
            const Complex coef = config_.gamma * x_scale(config_.x_convention, split) * kMinusI;
            for (std::size_t r = 0; r < rest; ++r)
                for (std::size_t s = 0; s < rest; ++s)
                    ws.rest_c(r, s) = coef * (traced(r, s) - std::conj(traced(s, r)));

            // out += (X_I (x) 1_I) U_I, one rest-sized product per local index
            for (std::size_t p = 0; p < local; ++p) {
                for (std::size_t r = 0; r < rest; ++r) {
                    std::copy_n(frames[i].row(split.full(r, p)), dim_, ws.rest_a.row(r));
                }
                matmul_into(ws.rest_c, ws.rest_a, ws.rest_d);
                for (std::size_t r = 0; r < rest; ++r) {
                    Complex* dst = out.row(split.full(r, p));
                    const Complex* src = ws.rest_d.row(r);
                    for (std::size_t c = 0; c < dim_; ++c) dst[c] += src[c];
                }
            }
        }
    }
    out *= kMinusI;
}

void GaugeIntegrator::derivative(std::span<const ComplexMatrix> frames,
                                 std::vector<ComplexMatrix>& out) {
    if (frames.size() != model_.cover.size()) throw InvalidInput("need one frame per patch");
    out.resize(frames.size());
    conjugated_terms(frames);
    parallel_for(frames.size(), config_.threads, [&](std::size_t i, std::size_t w) {
        patch_derivative(frames, i, workspaces_[w], out[i]);
    });
}

void GaugeIntegrator::step(GaugeState& state) {
    auto& frames = state.mutable_frames();
    const std::size_t p = frames.size();
    if (p != model_.cover.size()) throw InvalidInput("state does not match the integrator's cover");
    const double dt = config_.dt;

    auto combine = [&](std::vector<ComplexMatrix>& dst, double stage_coef, double acc_coef,
                       bool init_acc) {
        parallel_for(p, config_.threads, [&](std::size_t i, std::size_t) {
            const Complex* u = frames[i].data();
            const Complex* k = k_[i].data();
            Complex* acc = acc_[i].data();
            Complex* st = dst.empty() ? nullptr : dst[i].data();
            const std::size_t n = frames[i].size();
            for (std::size_t e = 0; e < n; ++e) {
                acc[e] = (init_acc ? u[e] : acc[e]) + acc_coef * k[e];
                if (st) st[e] = u[e] + stage_coef * k[e];
            }
        });
    };

    std::vector<ComplexMatrix> none;
    derivative(frames, k_);
    combine(stage_, 0.5 * dt, dt / 6.0, true);
    derivative(stage_, k_);
    combine(stage_, 0.5 * dt, dt / 3.0, false);
    derivative(stage_, k_);
    combine(stage_, dt, dt / 3.0, false);
    derivative(stage_, k_);
    combine(none, 0.0, dt / 6.0, false);

    ++steps_taken_;
    const double t_new = state.time() + dt;
    const bool unitarize =
        config_.unitarize_every > 0 && steps_taken_ % static_cast<std::size_t>(config_.unitarize_every) == 0;
    std::vector<int> failed(p, 0);
    parallel_for(p, config_.threads, [&](std::size_t i, std::size_t) {
        std::swap(frames[i], acc_[i]);
        if (!all_finite(frames[i])) {
            failed[i] = 1;
            return;
        }
        if (unitarize) {
            try {
                polar_unitarize_inplace(frames[i]);
            } catch (const IntegrationInstability&) {
                failed[i] = 1;
            }
        }
    });
    state.set_time(t_new);
    for (std::size_t i = 0; i < p; ++i) {
        if (failed[i]) {
            throw IntegrationInstability("frame " + std::to_string(i) + " lost unitarity at t=" +
                                             std::to_string(t_new),
                                         t_new, static_cast<int>(i));
        }
    }
}

GaugeState rk4_step(const GaugeState& state, const LocalHamiltonian& model,
                    const EvolutionConfig& config) {
    GaugeIntegrator integrator(model, config);
    GaugeState next = state;
    integrator.step(next);
    return next;
}

// ---- runs ----------------------------------------------------------------

std::vector<std::pair<int, int>> neighbor_pairs(const PatchCover& cover) {
    std::vector<std::pair<int, int>> pairs;
    const std::size_t p = cover.size();
    bool ring = p >= 3;
    for (std::size_t i = 0; i < p && ring; ++i) ring = cover.overlap(i, (i + 1) % p);
    if (ring) {
        for (std::size_t i = 0; i < p; ++i) {
            pairs.emplace_back(static_cast<int>(i), static_cast<int>((i + 1) % p));
        }
        return pairs;
    }
    for (std::size_t i = 0; i < p; ++i)
        for (int j : cover.overlaps(i))
            if (static_cast<std::size_t>(j) > i) pairs.emplace_back(static_cast<int>(i), j);
    return pairs;
}

std::size_t owning_patch(const PatchCover& cover, int site) {
    for (const auto& patch : cover.patches()) {
        if (patch.sites.front() == site) return static_cast<std::size_t>(patch.id);
    }
    for (const auto& patch : cover.patches()) {
        if (std::find(patch.sites.begin(), patch.sites.end(), site) != patch.sites.end()) {
            return static_cast<std::size_t>(patch.id);
        }
    }
    throw InvalidInput("site " + std::to_string(site) + " is not covered");
}

namespace {

// Each term read in the frame of its own patch: sum_J <psi_J| H_J |psi_J>.
double patch_energy(const LocalHamiltonian& model, const std::vector<SiteSplit>& splits,
                    std::span<const StateVector> psi) {
    double e = 0.0;
    for (std::size_t j = 0; j < model.terms.size(); ++j) {
        const std::size_t owner = static_cast<std::size_t>(model.terms[j].patch.id);
        e += inner(psi[owner], apply_local(model.terms[j].matrix, splits[owner], psi[owner])).real();
    }
    return e;
}

}  // namespace

RunResult run(const LocalHamiltonian& model, const StateVector& psi0,
              const EvolutionConfig& config, const ObservableRequest& request,
              const SampleObserver& observer) {
    validate(config);
    const std::size_t steps = num_steps(config);
    const auto stride = static_cast<std::size_t>(config.sample_stride);
    const int L = model.cover.num_sites();

    RunResult result;
    result.pairs = neighbor_pairs(model.cover);
    if (request.site_fields) {
        result.sx.resize(static_cast<std::size_t>(L));
        result.sz.resize(static_cast<std::size_t>(L));
    }
    if (request.deviations) result.s_pairs.resize(result.pairs.size());

    std::vector<SiteSplit> splits;
    for (std::size_t j = 0; j < model.cover.size(); ++j) splits.push_back(split_of(model.cover, j));
    std::vector<std::size_t> owners;
    for (int s = 0; s < L; ++s) owners.push_back(owning_patch(model.cover, s));
    double e0 = 0.0;
    if (request.energy) {
        const std::vector<StateVector> initial(model.cover.size(), psi0);
        e0 = patch_energy(model, splits, initial);
    }

    GaugeState state = init_gauge_state(model.cover, psi0);
    GaugeIntegrator integrator(model, config);

    auto sample = [&](std::size_t k) {
        result.times.push_back(static_cast<double>(k) * config.dt);
        if (request.site_fields || request.energy) {
            std::vector<StateVector> psi(model.cover.size());
            for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = local_wavefunction(state, i);
            if (request.site_fields) {
                for (int s = 0; s < L; ++s) {
                    const auto& v = psi[owners[static_cast<std::size_t>(s)]];
                    result.sx[static_cast<std::size_t>(s)].push_back(sigma_x_expectation(v, s));
                    result.sz[static_cast<std::size_t>(s)].push_back(sigma_z_expectation(v, s));
                }
            }
            if (request.energy) {
                result.energy_drift.push_back(std::abs(patch_energy(model, splits, psi) - e0));
            }
        }
        if (request.deviations) {
            double mean = 0.0;
            for (std::size_t q = 0; q < result.pairs.size(); ++q) {
                const auto [a, b] = result.pairs[q];
                const double s = s_deviation(state, static_cast<std::size_t>(a), static_cast<std::size_t>(b));
                result.s_pairs[q].push_back(s);
                mean += s;
            }
            result.s_mean.push_back(mean / static_cast<double>(std::max<std::size_t>(1, result.pairs.size())));
        }
        if (request.unitarity) {
            std::vector<double> res(state.frames().size());
            parallel_for(res.size(), config.threads, [&](std::size_t i, std::size_t) {
                res[i] = unitarity_residual(state.frame(i));
            });
            result.unitarity.push_back(*std::max_element(res.begin(), res.end()));
        }
        if (observer) observer(state);
    };

    sample(0);
    for (std::size_t k = 1; k <= steps; ++k) {
        integrator.step(state);
        // keep the clock on the exact grid
        state.set_time(static_cast<double>(k) * config.dt);
        if (k % stride == 0) sample(k);
    }
    return result;
}

RunResult run(const ModelSpec& spec, const EvolutionConfig& config,
              const ObservableRequest& request, const SampleObserver& observer) {
    return run(tfim_model(spec), plus_x_state(spec.length), config, request, observer);
}

}  // namespace gauge
