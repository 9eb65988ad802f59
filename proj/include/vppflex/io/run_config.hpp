#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "vppflex/curve/supply_curve.hpp"

namespace vppflex::io {

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Value of one key in the TOML-style configuration text.
using ConfigValue = std::variant<bool, double, std::string, std::vector<double>>;

/// Flat "section.key" -> value map. Accepts [section] headers, key = value
/// lines, # comments, quoted strings, numbers, true/false and flat numeric
/// arrays; anything else is reported with its line number.
std::map<std::string, ConfigValue> parse_config_text(const std::string& text);

struct EmitFlags {
  bool histograms = false;
  bool svg = false;
  bool lp_dump = false;
};

struct RunConfig {
  std::filesystem::path instance_dir;  // optional in the file, the CLI supplies it
  model::ProductSpec product;
  scenario::UncertaintyModel uncertainty;
  ss::SsConfig ss;
  curve::SweepConfig sweep;
  std::optional<std::uint64_t> seed;  // required before a run starts
  std::size_t workers = 1;
  std::filesystem::path out_dir = "out";
  EmitFlags emit;

  /// Problems that block a run, including a missing seed.
  std::vector<std::string> check() const;
};

/// Builds a RunConfig from configuration text; unknown keys are errors.
/// Relative paths are resolved against `base`.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base = {});
RunConfig load_run_config(const std::filesystem::path& file);

/// Canonical text of a configuration; parse_run_config reads it back.
std::string to_text(const RunConfig& cfg);

}  // namespace vppflex::io
