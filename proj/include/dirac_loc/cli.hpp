#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dirac_loc/model.hpp"

namespace dirac_loc {

inline constexpr const char* kVersion = "0.1.0";

/// Commands understood by `run`.
const std::vector<std::string>& command_names();

/// Raw key/value pairs in order of appearance. Accepts `key = value` lines with `#`
/// comments, or a flat JSON object with the same keys.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

struct ExperimentConfig {
  std::string command;
  ModelSpec model;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output_path = ".";
  std::map<std::string, std::string> params;  // command-specific, already checked
  std::vector<std::pair<std::string, std::string>> echo;
};

/// Builds and validates a config; throws ConfigError on unknown keys, bad values or
/// unsorted grids. The command must be one of command_names().
ExperimentConfig make_config(const std::string& command, const std::vector<std::pair<std::string, std::string>>& kv);

/// Output table: preformatted cells plus `#` metadata lines.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> meta;
};

/// Shortest round-trip decimal representation.
std::string format_number(double x);

/// CSV with `#` header metadata; the bytes depend only on the table.
std::string to_csv(const Table& table, const std::string& command, const std::string& manifest_name);

enum class PlotKind { GammaVsE, Ids, Decay, DimVsE };

/// Whitespace-separated columns for plotting; throws ConfigError if the table does not
/// carry the columns required by `kind`. An empty table yields a header-only file.
std::string plot_data(const Table& table, PlotKind kind);
void emit_plot_data(const Table& table, PlotKind kind, const std::string& path);

/// FNV-1a 64-bit hash, hex encoded.
std::string content_hash(const std::string& bytes);

struct RunResult {
  Table table;
  std::optional<PlotKind> plot;
};

/// Computes the command's table without touching the filesystem.
RunResult execute(const ExperimentConfig& config);

/// Full run: data file, optional plot file and manifest under config.output_path.
/// Returns 0 on success, 3 on numerical or data-quality errors.
int run(const ExperimentConfig& config, std::ostream& log);

/// Entry point used by the executable: 0 ok, 2 config error (nothing written), 3 numerical error.
int run_from_file(const std::string& command, const std::string& config_path, std::optional<std::uint64_t> seed,
                  std::optional<std::string> out_dir, std::ostream& log);

}  // namespace dirac_loc
