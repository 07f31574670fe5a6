#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "adaphrase/cli.hpp"
#include "adaphrase/errors.hpp"
#include "adaphrase/util.hpp"

namespace adaphrase {

namespace {

constexpr std::array kKeys = {
    ConfigKey{"tuples", "", "tuple files, comma-separated"},
    ConfigKey{"model", "", "model file (written by train/grid, read otherwise)"},
    ConfigKey{"log", "", "training log path (default <model>.log)"},
    ConfigKey{"trace", "", "alpha trace path for every candidate"},
    ConfigKey{"report", "", "report path (default standard output)"},
    ConfigKey{"dump", "", "per-item score dump path"},
    ConfigKey{"output", "", "export path (default standard output)"},
    ConfigKey{"comp", "", "compositionality rating files, comma-separated"},
    ConfigKey{"disambig", "", "disambiguation rating files, comma-separated"},
    ConfigKey{"dim", "25", "embedding dimensionality"},
    ConfigKey{"batch_size", "100", "mini-batch size"},
    ConfigKey{"learning_rate", "0.05", "AdaGrad learning rate"},
    ConfigKey{"l2", "1e-06", "L2 coefficient on the scorer weights"},
    ConfigKey{"max_epochs", "20", "epoch limit"},
    ConfigKey{"seed", "1", "training seed"},
    ConfigKey{"negatives", "resample", "resample | fixed"},
    ConfigKey{"fix_alpha", "", "fix alpha for every candidate (e.g. 1.0 or 0.5)"},
    ConfigKey{"early_stopping", "true", "stop at the first dev score decrease"},
    ConfigKey{"split", "0.8,0.1,0.1", "train,dev,test ratios"},
    ConfigKey{"split_seed", "1", "split shuffle seed"},
    ConfigKey{"threshold", "10", "candidate threshold K"},
    ConfigKey{"candidate_rule", "strict", "strict (count > K) | inclusive (count >= K)"},
    ConfigKey{"grid_learning_rates", "0.01,0.02,0.03,0.04,0.05", "grid over learning rates"},
    ConfigKey{"grid_l2", "0.001,0.0001,1e-05,1e-06,0", "grid over L2 coefficients"},
    ConfigKey{"bootstrap", "1000", "bootstrap replicates"},
    ConfigKey{"level", "0.95", "confidence level"},
    ConfigKey{"bootstrap_seed", "1", "bootstrap seed"},
    ConfigKey{"rating_min", "1", "compositionality rating scale minimum"},
    ConfigKey{"rating_max", "6", "compositionality rating scale maximum"},
    ConfigKey{"k", "5", "neighbors to list"},
    ConfigKey{"pool", "", "neighbor pool file (default candidate phrases)"},
};

bool known_key(std::string_view key) {
  for (const auto& k : kKeys) {
    if (k.name == key) return true;
  }
  return false;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::uint64_t to_uint(const ConfigValues& values, const std::string& key) {
  const std::string& text = values.at(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return out;
}

double to_double(const ConfigValues& values, const std::string& key) {
  const std::string& text = values.at(key);
  double out = 0.0;
  if (!parse_double(text, out)) throw ConfigError(key + ": expected a number, got '" + text + "'");
  return out;
}

std::vector<double> to_doubles(const ConfigValues& values, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(values.at(key))) {
    double x = 0.0;
    if (!parse_double(item, x)) throw ConfigError(key + ": '" + item + "' is not a number");
    out.push_back(x);
  }
  return out;
}

bool to_bool(const ConfigValues& values, const std::string& key) {
  const std::string& text = values.at(key);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<std::filesystem::path> to_paths(const ConfigValues& values, const std::string& key) {
  std::vector<std::filesystem::path> out;
  for (const auto& item : split_list(values.at(key))) out.emplace_back(item);
  return out;
}

}  // namespace

std::span<const ConfigKey> config_keys() { return kKeys; }

std::string_view version() { return ADAPHRASE_VERSION; }

ConfigValues parse_config_text(std::string_view text, std::string_view origin) {
  ConfigValues out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto raw = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto where = std::string(origin) + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    if (!known_key(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!out.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
      throw ConfigError(where + ": key '" + key + "' set twice");
    }
  }
  return out;
}

ConfigValues load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

ConfigValues resolve_config(const ConfigValues& file, const ConfigValues& flags) {
  ConfigValues out;
  for (const auto& k : kKeys) out.emplace(std::string(k.name), std::string(k.default_value));
  for (const auto* layer : {&file, &flags}) {
    for (const auto& [key, value] : *layer) {
      if (!known_key(key)) throw ConfigError("unknown config key '" + key + "'");
      out[key] = value;
    }
  }
  return out;
}

RunConfig parse_run_config(const ConfigValues& values) {
  RunConfig c;
  c.tuples = to_paths(values, "tuples");
  c.model = values.at("model");
  c.log = values.at("log");
  c.trace = values.at("trace");
  c.report = values.at("report");
  c.dump = values.at("dump");
  c.output = values.at("output");
  c.comp = to_paths(values, "comp");
  c.disambig = to_paths(values, "disambig");

  c.train.dim = to_uint(values, "dim");
  c.train.batch_size = to_uint(values, "batch_size");
  c.train.learning_rate = to_double(values, "learning_rate");
  c.train.l2 = to_double(values, "l2");
  c.train.max_epochs = to_uint(values, "max_epochs");
  c.train.seed = to_uint(values, "seed");
  const std::string& negatives = values.at("negatives");
  if (negatives == "resample") {
    c.train.negatives = NegativePolicy::ResamplePerEpoch;
  } else if (negatives == "fixed") {
    c.train.negatives = NegativePolicy::FixedPerRun;
  } else {
    throw ConfigError("negatives: expected resample or fixed, got '" + negatives + "'");
  }
  if (!values.at("fix_alpha").empty()) c.train.fix_alpha = to_double(values, "fix_alpha");
  c.train.early_stopping = to_bool(values, "early_stopping");
  c.train.validate();

  const auto ratios = to_doubles(values, "split");
  if (ratios.size() != 3) throw ConfigError("split: expected three ratios train,dev,test");
  c.split = {ratios[0], ratios[1], ratios[2]};
  c.split_seed = to_uint(values, "split_seed");
  c.threshold = to_uint(values, "threshold");
  const std::string& rule = values.at("candidate_rule");
  if (rule == "strict") {
    c.rule = CandidateRule::Strict;
  } else if (rule == "inclusive") {
    c.rule = CandidateRule::Inclusive;
  } else {
    throw ConfigError("candidate_rule: expected strict or inclusive, got '" + rule + "'");
  }
  c.grid_learning_rates = to_doubles(values, "grid_learning_rates");
  c.grid_l2 = to_doubles(values, "grid_l2");

  c.bootstrap = to_uint(values, "bootstrap");
  c.level = to_double(values, "level");
  c.bootstrap_seed = to_uint(values, "bootstrap_seed");
  c.rating_min = to_double(values, "rating_min");
  c.rating_max = to_double(values, "rating_max");
  if (!(c.rating_min < c.rating_max)) throw ConfigError("rating_min must be below rating_max");
  c.k = to_uint(values, "k");
  c.pool = values.at("pool");
  return c;
}

std::string echo_config(const ConfigValues& values, std::span<const std::string_view> keys) {
  std::string out;
  for (const auto key : keys) {
    out += key;
    out += '=';
    out += values.at(std::string(key));
    out += '\n';
  }
  return out;
}

std::string config_hash(const ConfigValues& values, std::span<const std::string_view> keys) {
  char hex[9];
  std::snprintf(hex, sizeof hex, "%08x", crc32_text(echo_config(values, keys)));
  return hex;
}

std::string report_header(const ConfigValues& values, std::span<const std::string_view> keys,
                          std::uint64_t seed) {
  std::string out = "# adaphrase " + std::string(version()) + "\tseed=" + std::to_string(seed) +
                    "\tconfig=" + config_hash(values, keys) + "\n";
  std::istringstream lines(echo_config(values, keys));
  std::string line;
  while (std::getline(lines, line)) out += "# " + line + "\n";
  return out;
}

}  // namespace adaphrase
