#pragma once

// Subcommands behind the command-line tool. Each returns its tables and a
// summary; write_output renders them as CSV or JSON lines with a header
// recording the configuration hash and the seed.

#include "eoread/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace eoread {

enum class OutputFormat { csv, jsonl };

struct CommandOptions {
    std::uint64_t seed = 1;
    std::string out_dir; ///< empty: everything goes to the summary stream
    OutputFormat format = OutputFormat::csv;
    unsigned workers = 0;
    SnrConvention convention = SnrConvention::power;
    bool exact_bandwidth = false;
    bool dump_model = false;
};

using Cell = std::variant<double, long long, std::string>;

struct OutputTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct CommandOutput {
    std::string command;
    std::vector<OutputTable> tables;
    std::vector<std::pair<std::string, Cell>> summary;
    std::string model_dump;
};

CommandOutput cmd_budget(const RunConfig& cfg, const CommandOptions& opt);
CommandOutput cmd_sweep(const RunConfig& cfg, const CommandOptions& opt);
CommandOutput cmd_shots(const RunConfig& cfg, const CommandOptions& opt);
CommandOutput cmd_calibrate(const RunConfig& cfg, const CommandOptions& opt);

/// Tables go to <out_dir>/<command>_<table>.{csv,jsonl}, the summary to
/// <out_dir>/<command>_summary.* and to `console`. Without out_dir all of it
/// is printed to `console`.
void write_output(const CommandOutput& out, const RunConfig& cfg, const CommandOptions& opt,
                  std::ostream& console);

/// Shortest round-trip decimal form.
std::string format_number(double v);

} // namespace eoread
