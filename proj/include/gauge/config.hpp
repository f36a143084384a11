#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gauge/engine.hpp"
#include "gauge/model.hpp"

namespace gauge {

enum class Command { quench, deviation, sweep, squiggle, chaos };

enum class Tier { desk, full };

struct RunConfig {
    Command command = Command::quench;
    ModelSpec model;
    EvolutionConfig evolution;
    std::vector<double> gamma_list;
    std::vector<int> length_list;
    std::string output_path;
    int threads = 1;
    double t_eval = 5.0;
    double window = 0.5;
    Tier tier = Tier::desk;

    // quench
    std::string initial = "plusx";  // plusx | zero
    bool exact = false;

    // synthetic-injection input for sweep/squiggle (skips simulation)
    std::string input_path;

    // squiggle
    double onset_t_min = 1.0;
    double onset_epsilon = 1e-4;

    // chaos
    std::vector<double> dt_list = {0.005, 0.0005};
    double sample_interval = 0.05;
    double growth_floor = 1e-10;
    double growth_ceiling = 1e-2;
};

Command parse_command(const std::string& name);
std::string command_name(Command c);
XConvention parse_convention(const std::string& name);
std::string convention_name(XConvention c);

// Defaults that depend on the command (e.g. t_max = 60 for squiggle runs).
RunConfig default_config(Command command);

// Apply one key = value setting. Keys mirror the RunConfig field names;
// unknown keys and malformed values throw InvalidInput naming the key.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

// Parse `key = value` lines with `#` comments.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::istream& in);
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);

// Cross-field checks for the selected command.
void validate(const RunConfig& config);

// Canonical key = value dump, reparseable by parse_config_text.
std::string to_text(const RunConfig& config);

}  // namespace gauge
