#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gauge/commands.hpp"
#include "gauge/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Gauge-picture TFIM simulator and experiment harness"};
    app.set_version_flag("--version", "gaugesim 1.0");

    std::string command;
    std::string config_path;
    std::vector<std::string> overrides;
    std::vector<std::pair<std::string, std::string>> flags;
    bool print_config = false;

    app.add_option("command", command, "quench | deviation | sweep | squiggle | chaos")
        ->required()
        ->check(CLI::IsMember({"quench", "deviation", "sweep", "squiggle", "chaos"}));
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--set", overrides, "extra key=value override (repeatable)");
    app.add_flag("--print-config", print_config, "print the resolved configuration and exit");

    // options that map one-to-one onto config keys
    const std::vector<std::pair<std::string, std::string>> keyed = {
        {"--gamma", "gamma"},         {"--length", "length"},     {"--hz", "hz"},
        {"--hx", "hx"},               {"--coupling", "coupling"}, {"--dt", "dt"},
        {"--tmax", "t_max"},          {"--out", "output"},        {"--threads", "threads"},
        {"--convention", "convention"}, {"--tier", "tier"},       {"--input", "input"},
        {"--stride", "sample_stride"}, {"--t-eval", "t_eval"},    {"--window", "window"},
        {"--initial", "initial"},     {"--dt-list", "dt_list"},   {"--exact", "exact"},
    };
    std::vector<std::string> values(keyed.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        app.add_option(keyed[i].first, values[i], "sets config key '" + keyed[i].second + "'");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? gauge::kExitOk : gauge::kExitUsage;
    }

    gauge::RunConfig config;
    try {
        config = gauge::default_config(gauge::parse_command(command));
        if (!config_path.empty()) {
            for (const auto& [k, v] : gauge::parse_config_file(config_path)) {
                if (k == "command") continue;  // the positional command wins
                gauge::apply_setting(config, k, v);
            }
        }
        for (std::size_t i = 0; i < keyed.size(); ++i) {
            if (app.count(keyed[i].first) > 0) gauge::apply_setting(config, keyed[i].second, values[i]);
        }
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw gauge::InvalidInput("--set expects key=value, got '" + kv + "'");
            gauge::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (print_config) {
            gauge::validate(config);
            std::cout << gauge::to_text(config);
            return gauge::kExitOk;
        }
        const gauge::CommandResult result = gauge::execute(config);
        gauge::persist(config, result, std::cout);
        for (const auto& f : result.files) std::cerr << "wrote " << f.path << '\n';
    } catch (const gauge::IntegrationInstability& e) {
        std::cerr << "integration instability: " << e.what() << '\n';
        return gauge::kExitInstability;
    } catch (const gauge::AnalysisError& e) {
        std::cerr << "analysis error: " << e.what() << '\n';
        return gauge::kExitAnalysis;
    } catch (const gauge::InvalidInput& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return gauge::kExitUsage;
    } catch (const gauge::ResourceLimit& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return gauge::kExitUsage;
    }
    return gauge::kExitOk;
}
