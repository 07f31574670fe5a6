#pragma once

// Command-line surface: a flat key=value run configuration with flag
// overrides, and the train / grid / eval / ensemble / score / neighbors /
// export subcommands.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaphrase/corpus.hpp"
#include "adaphrase/trainer.hpp"

namespace adaphrase {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

// Resolved key -> value text, after defaults, config file and flags.
using ConfigValues = std::map<std::string, std::string>;

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

// Every key a config file or flag may set.
std::span<const ConfigKey> config_keys();

// Parses "key = value" lines; '#' starts a comment line. ConfigError on an
// unknown key, a line without '=', or a repeated key.
ConfigValues parse_config_text(std::string_view text, std::string_view origin);
ConfigValues load_config_file(const std::filesystem::path& path);

// defaults < file < flags.
ConfigValues resolve_config(const ConfigValues& file, const ConfigValues& flags);

struct RunConfig {
  std::vector<std::filesystem::path> tuples;
  std::filesystem::path model;
  std::filesystem::path log;     // empty: "<model>.log"
  std::filesystem::path trace;   // empty: no alpha trace
  std::filesystem::path report;  // empty: standard output
  std::filesystem::path dump;    // empty: no per-item dump
  std::filesystem::path output;  // export target; empty: standard output
  std::vector<std::filesystem::path> comp;
  std::vector<std::filesystem::path> disambig;

  TrainConfig train;
  SplitRatios split;
  std::uint64_t split_seed = 1;
  std::uint64_t threshold = 10;
  CandidateRule rule = CandidateRule::Strict;
  std::vector<double> grid_learning_rates;
  std::vector<double> grid_l2;

  std::size_t bootstrap = 1000;
  double level = 0.95;
  std::uint64_t bootstrap_seed = 1;
  double rating_min = 1.0;
  double rating_max = 6.0;
  std::size_t k = 5;
  std::filesystem::path pool;  // neighbors pool; empty: candidate phrases
};

// Typed view of resolved values. ConfigError on unparsable values.
RunConfig parse_run_config(const ConfigValues& values);

// "key=value" lines for `keys`, in the given order.
std::string echo_config(const ConfigValues& values, std::span<const std::string_view> keys);

// crc32 of echo_config(values, keys), as 8 hex digits.
std::string config_hash(const ConfigValues& values, std::span<const std::string_view> keys);

// "# adaphrase <version>\tseed=<seed>\tconfig=<hash>" followed by the echoed
// config, each line '#'-prefixed.
std::string report_header(const ConfigValues& values, std::span<const std::string_view> keys,
                          std::uint64_t seed);

std::string_view version();

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace adaphrase
