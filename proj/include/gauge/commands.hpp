#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gauge/analysis.hpp"
#include "gauge/config.hpp"
#include "gauge/csv.hpp"

namespace gauge {

struct OutputFile {
    std::string path;
    CsvTable table;
};

struct CommandResult {
    std::vector<OutputFile> files;
    std::string report;  // fit summary; empty for commands without a fit
};

CommandResult cmd_quench(const RunConfig& config);
CommandResult cmd_deviation(const RunConfig& config);
CommandResult cmd_sweep(const RunConfig& config);
CommandResult cmd_squiggle(const RunConfig& config);
CommandResult cmd_chaos(const RunConfig& config);

// Dispatch on config.command (validating first).
CommandResult execute(const RunConfig& config);

// Write every table, and the report to stdout-equivalent `report_out` plus a
// `<output stem>.fit.txt` sidecar when non-empty.
void persist(const RunConfig& config, const CommandResult& result, std::ostream& report_out);

// "<stem>_<tag>.csv" for "<stem>.csv".
std::string suffixed_path(const std::string& path, const std::string& tag);
std::string sidecar_path(const std::string& path);

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAnalysis = 3;
inline constexpr int kExitInstability = 4;

}  // namespace gauge
