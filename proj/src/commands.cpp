#include "gauge/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "gauge/errors.hpp"
#include "gauge/parallel.hpp"
#include "gauge/reference.hpp"

namespace gauge {

namespace {

EvolutionConfig cell_evolution(const RunConfig& c, double gamma, int threads) {
    EvolutionConfig e = c.evolution;
    e.gamma = gamma;
    e.threads = threads;
    return e;
}

ModelSpec cell_model(const RunConfig& c, int length) {
    ModelSpec m = c.model;
    m.length = length;
    return m;
}

std::string tag_number(double v) {
    std::string s = format_number(v);
    for (char& ch : s) {
        if (ch == '-') ch = 'm';
    }
    return s;
}

std::string gamma_tag(double gamma) { return "g" + tag_number(gamma); }

// Analysis-layer input errors surface as analysis failures of the command.
template <typename F>
auto analysis_step(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const InvalidInput& e) {
        throw AnalysisError(e.what());
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Single-threaded cells in parallel across `threads` workers, otherwise one
// cell at a time with the integrator using every thread.
template <typename F>
void for_cells(std::size_t count, int threads, F&& fn) {
    if (count > 1 && threads > 1) {
        parallel_for(count, threads, [&](std::size_t i, std::size_t) { fn(i, 1); });
    } else {
        for (std::size_t i = 0; i < count; ++i) fn(i, threads);
    }
}

}  // namespace

std::string suffixed_path(const std::string& path, const std::string& tag) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "_" + tag;
    return path.substr(0, dot) + "_" + tag + path.substr(dot);
}

std::string sidecar_path(const std::string& path) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + ".fit.txt";
    return path.substr(0, dot) + ".fit.txt";
}

CommandResult cmd_quench(const RunConfig& c) {
    const int L = c.model.length;
    const double gamma = c.gamma_list.front();
    const EvolutionConfig evo = cell_evolution(c, gamma, c.threads);
    const StateVector psi0 = c.initial == "zero" ? basis_state(L, 0) : plus_x_state(L);
    ObservableRequest request;
    request.deviations = false;
    request.unitarity = false;
    const RunResult r = run(tfim_model(c.model), psi0, evo, request);

    CsvTable table;
    table.header.push_back("t");
    for (int s = 0; s < L; ++s) table.header.push_back("sx_" + std::to_string(s));
    for (int s = 0; s < L; ++s) table.header.push_back("sz_" + std::to_string(s));
    std::vector<StateVector> exact;
    if (c.exact) {
        for (int s = 0; s < L; ++s) table.header.push_back("sx_exact_" + std::to_string(s));
        for (int s = 0; s < L; ++s) table.header.push_back("sz_exact_" + std::to_string(s));
        const ExactPropagator prop = build_propagator(assemble_full_hamiltonian(c.model),
                                                      evo.dt * evo.sample_stride);
        exact = evolve_exact(prop, psi0, r.times);
    }
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        std::vector<double> row{r.times[k]};
        for (int s = 0; s < L; ++s) row.push_back(r.sx[static_cast<std::size_t>(s)][k]);
        for (int s = 0; s < L; ++s) row.push_back(r.sz[static_cast<std::size_t>(s)][k]);
        if (c.exact) {
            for (int s = 0; s < L; ++s) row.push_back(sigma_x_expectation(exact[k], s));
            for (int s = 0; s < L; ++s) row.push_back(sigma_z_expectation(exact[k], s));
        }
        table.rows.push_back(std::move(row));
    }
    return {{{c.output_path, std::move(table)}}, {}};
}

CommandResult cmd_deviation(const RunConfig& c) {
    const LocalHamiltonian model = tfim_model(c.model);
    const StateVector psi0 = plus_x_state(c.model.length);
    ObservableRequest request;
    request.site_fields = false;
    request.unitarity = false;

    std::vector<OutputFile> files(c.gamma_list.size());
    for_cells(c.gamma_list.size(), c.threads, [&](std::size_t g, int threads) {
        const double gamma = c.gamma_list[g];
        const RunResult r = run(model, psi0, cell_evolution(c, gamma, threads), request);
        CsvTable table;
        table.header.push_back("t");
        for (std::size_t q = 0; q < r.pairs.size(); ++q) table.header.push_back("s_pair_" + std::to_string(q));
        table.header.push_back("s_mean");
        for (std::size_t k = 0; k < r.times.size(); ++k) {
            std::vector<double> row{r.times[k]};
            for (const auto& series : r.s_pairs) row.push_back(series[k]);
            row.push_back(r.s_mean[k]);
            table.rows.push_back(std::move(row));
        }
        const std::string path =
            c.gamma_list.size() == 1 ? c.output_path : suffixed_path(c.output_path, gamma_tag(gamma));
        files[g] = {path, std::move(table)};
    });
    return {std::move(files), {}};
}

CommandResult cmd_sweep(const RunConfig& c) {
    struct Cell {
        double gamma;
        int length;
        double s = 0.0;
        double fluctuation = 0.0;
    };
    std::vector<Cell> cells;
    if (!c.input_path.empty()) {
        const CsvTable in = read_csv(c.input_path);
        const auto g = in.column_values("gamma");
        const auto l = in.column_values("L");
        const auto s = in.column_values("s_asymptote");
        std::optional<std::vector<double>> f;
        if (std::find(in.header.begin(), in.header.end(), "fluctuation") != in.header.end()) {
            f = in.column_values("fluctuation");
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double rounded = std::round(l[i]);
            if (rounded != l[i] || rounded < 1) throw InvalidInput("sweep input: L must be a positive integer");
            cells.push_back({g[i], static_cast<int>(rounded), s[i], f ? (*f)[i] : 0.0});
        }
    } else {
        for (double gamma : c.gamma_list) {
            for (int L : c.length_list) cells.push_back({gamma, L});
        }
        ObservableRequest request;
        request.site_fields = false;
        request.unitarity = false;
        for_cells(cells.size(), c.threads, [&](std::size_t i, int threads) {
            Cell& cell = cells[i];
            EvolutionConfig evo = cell_evolution(c, cell.gamma, threads);
            evo.t_max = c.t_eval;
            const RunResult r = run(cell_model(c, cell.length), evo, request);
            const Asymptote a = extract_asymptote({"s_mean", r.times, r.s_mean}, c.t_eval, c.window);
            cell.s = a.value;
            cell.fluctuation = a.fluctuation;
        });
    }

    CsvTable table;
    table.header = {"gamma", "L", "s_asymptote", "fluctuation", "included"};
    std::vector<ScalingPoint> points;
    std::ostringstream excluded;
    for (const Cell& cell : cells) {
        const bool ok = cell.s > 0.0 && std::isfinite(cell.s) && cell.fluctuation <= kCleanAsymptoteGate;
        table.rows.push_back({cell.gamma, static_cast<double>(cell.length), cell.s, cell.fluctuation,
                              ok ? 1.0 : 0.0});
        if (ok) {
            points.push_back({cell.gamma, cell.length, cell.s});
        } else {
            excluded << "  gamma=" << fmt(cell.gamma) << " L=" << cell.length << " S=" << fmt(cell.s)
                     << " fluctuation=" << fmt(cell.fluctuation) << '\n';
        }
    }
    if (points.empty()) throw AnalysisError("sweep: every point failed the clean-asymptote gate");
    const ScalingFit fit = analysis_step([&] { return fit_scaling(points); });

    std::ostringstream r;
    r << "scaling fit: ln(gamma^2 S) = a L + b + c / L\n"
      << "a = " << fmt(fit.a) << '\n'
      << "b = " << fmt(fit.b) << '\n'
      << "c = " << fmt(fit.c) << '\n'
      << "residual = " << fmt(fit.residual) << '\n'
      << "points = " << points.size() << '\n'
      << "convention = " << convention_name(c.evolution.x_convention) << '\n'
      << "excluded = " << (cells.size() - points.size()) << '\n'
      << excluded.str();
    return {{{c.output_path, std::move(table)}}, r.str()};
}

CommandResult cmd_squiggle(const RunConfig& c) {
    std::vector<double> gammas;
    std::vector<std::optional<double>> onsets;
    if (!c.input_path.empty()) {
        const CsvTable in = read_csv(c.input_path);
        gammas = in.column_values("gamma");
        for (double t : in.column_values("t_s")) {
            onsets.push_back(std::isnan(t) ? std::nullopt : std::optional<double>(t));
        }
    } else {
        gammas = c.gamma_list;
        onsets.resize(gammas.size());
        const LocalHamiltonian model = tfim_model(c.model);
        const StateVector psi0 = plus_x_state(c.model.length);
        ObservableRequest request;
        request.site_fields = false;
        request.unitarity = false;
        for_cells(gammas.size(), c.threads, [&](std::size_t i, int threads) {
            const RunResult r = run(model, psi0, cell_evolution(c, gammas[i], threads), request);
            onsets[i] = detect_onset({"s_mean", r.times, r.s_mean}, c.onset_t_min, c.onset_epsilon);
        });
    }

    CsvTable table;
    table.header = {"gamma", "t_s"};
    std::vector<std::pair<double, double>> points;
    std::ostringstream absent;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        table.rows.push_back({gammas[i], onsets[i] ? *onsets[i] : std::nan("")});
        if (onsets[i]) {
            points.emplace_back(gammas[i], *onsets[i]);
        } else {
            absent << "  gamma=" << fmt(gammas[i]) << " (no onset)\n";
        }
    }
    if (points.size() < 3) {
        throw AnalysisError("squiggle: only " + std::to_string(points.size()) +
                            " finite onsets; need 3 for the divergence fit");
    }
    const OnsetFit fit = analysis_step([&] { return fit_onset_divergence(points); });

    std::ostringstream r;
    r << "onset fit: t_s^-2 = |gamma - gamma0| / t0^2\n"
      << "gamma0 = " << fmt(fit.gamma0) << '\n'
      << "t0 = " << fmt(fit.t0) << '\n'
      << "slope = " << fmt(fit.slope) << (fit.slope < 0.0 ? " (diverges from below)" : " (diverges from above)") << '\n'
      << "residual = " << fmt(fit.residual) << '\n'
      << "r_squared = " << fmt(fit.r_squared) << '\n'
      << "points = " << points.size() << '\n'
      << "absent = " << (gammas.size() - points.size()) << '\n'
      << absent.str();
    return {{{c.output_path, std::move(table)}}, r.str()};
}

CommandResult cmd_chaos(const RunConfig& c) {
    const int L = c.model.length;
    const double t_max = c.evolution.t_max;
    const auto samples = static_cast<std::size_t>(std::llround(t_max / c.sample_interval));
    std::vector<double> times(samples + 1);
    for (std::size_t k = 0; k <= samples; ++k) times[k] = static_cast<double>(k) * c.sample_interval;

    const StateVector psi0 = plus_x_state(L);
    const ComplexMatrix h = assemble_full_hamiltonian(c.model);
    const auto exact = evolve_exact(build_propagator(h, c.sample_interval), psi0, times);
    const auto control = evolve_exact(build_propagator(h, 0.5 * c.sample_interval), psi0, times);
    std::vector<double> sx_exact, control_err;
    for (std::size_t k = 0; k < times.size(); ++k) {
        sx_exact.push_back(sigma_x_expectation(exact[k], 0));
        control_err.push_back(std::abs(sigma_x_expectation(control[k], 0) - sx_exact.back()));
    }

    struct Variant {
        double gamma;
        double dt;
        std::vector<double> sx;
    };
    std::vector<Variant> variants;
    for (double gamma : c.gamma_list) {
        for (double dt : c.dt_list) variants.push_back({gamma, dt, {}});
    }
    const LocalHamiltonian model = tfim_model(c.model);
    ObservableRequest request;
    request.deviations = false;
    request.unitarity = false;
    for_cells(variants.size(), c.threads, [&](std::size_t i, int threads) {
        Variant& v = variants[i];
        EvolutionConfig evo = cell_evolution(c, v.gamma, threads);
        evo.dt = v.dt;
        evo.sample_stride = static_cast<int>(std::llround(c.sample_interval / v.dt));
        v.sx = run(model, psi0, evo, request).sx[0];
        if (v.sx.size() != times.size()) throw InvalidInput("chaos: sample grid mismatch");
    });

    CsvTable table;
    table.header = {"t", "sx_exact"};
    for (const auto& v : variants) {
        const std::string tag = gamma_tag(v.gamma) + "_dt" + tag_number(v.dt);
        table.header.push_back("sx_" + tag);
        table.header.push_back("err_" + tag);
    }
    table.header.push_back("err_control");
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::vector<double> row{times[k], sx_exact[k]};
        for (const auto& v : variants) {
            row.push_back(v.sx[k]);
            row.push_back(std::abs(v.sx[k] - sx_exact[k]));
        }
        row.push_back(control_err[k]);
        table.rows.push_back(std::move(row));
    }

    auto describe = [&](const std::string& name, const std::vector<double>& err) {
        std::ostringstream r;
        double early = 0.0;
        std::optional<double> breakdown;
        for (std::size_t k = 0; k < times.size(); ++k) {
            if (times[k] <= 10.0 + 1e-9) early = std::max(early, err[k]);
            if (!breakdown && err[k] > 0.1) breakdown = times[k];
        }
        r << name << ":";
        try {
            const GrowthFit g = fit_growth({name, times, err}, c.growth_floor, c.growth_ceiling);
            r << " rate=" << fmt(g.rate) << " window=[" << fmt(g.t_lo) << "," << fmt(g.t_hi)
              << "] samples=" << g.samples;
        } catch (const InvalidInput& e) {
            r << " rate=none (" << e.what() << ")";
        }
        r << " max_err_t10=" << fmt(early) << " breakdown_t="
          << (breakdown ? fmt(*breakdown) : std::string("none")) << '\n';
        return r.str();
    };

    std::ostringstream report;
    report << "error growth: ln|sx_gauge - sx_exact| = rate t + intercept within ("
           << fmt(c.growth_floor) << ", " << fmt(c.growth_ceiling) << ")\n";
    for (std::size_t i = 0; i < variants.size(); ++i) {
        std::vector<double> err(times.size());
        for (std::size_t k = 0; k < times.size(); ++k) err[k] = table.rows[k][3 + 2 * i];
        report << describe("gamma=" + fmt(variants[i].gamma) + " dt=" + fmt(variants[i].dt), err);
    }
    report << describe("control exact(delta) vs exact(delta/2)", control_err);
    return {{{c.output_path, std::move(table)}}, report.str()};
}

CommandResult execute(const RunConfig& c) {
    validate(c);
    for (double g : c.gamma_list) {
        if (g < 0.0) std::cerr << "warning: gamma=" << g << " < 0 drives connections away from identity\n";
    }
    if (c.command == Command::sweep && c.tier == Tier::full && c.input_path.empty()) {
        std::cerr << "warning: full tier runs L up to 10; expect hours of runtime\n";
    }
    switch (c.command) {
        case Command::quench: return cmd_quench(c);
        case Command::deviation: return cmd_deviation(c);
        case Command::sweep: return cmd_sweep(c);
        case Command::squiggle: return cmd_squiggle(c);
        case Command::chaos: return cmd_chaos(c);
    }
    throw InvalidInput("unknown command");
}

void persist(const RunConfig& c, const CommandResult& result, std::ostream& report_out) {
    for (const auto& f : result.files) write_csv(f.path, f.table);
    if (!result.report.empty()) {
        report_out << result.report;
        std::ofstream side(sidecar_path(c.output_path));
        if (!side) throw InvalidInput("cannot write '" + sidecar_path(c.output_path) + "'");
        side << result.report;
    }
}

}  // namespace gauge
