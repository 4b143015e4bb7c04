// Run configuration for the waveqed tool.
//
// The file is INI-like: "[section]" headers and "key = value" lines, '#' or
// ';' comments. Keys are addressed as section.key. A "[case.NAME]" block
// holds overrides written as full section.key names, and a command runs once
// per case. Values given with --set win over both.
//
// Everything is dimensionless: lengths in w, times in w / v_g, rates in
// Omega = v_g / w.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "waveqed/model.hpp"

namespace waveqed::cli {

using KeyValues = std::map<std::string, std::string>;

struct ConfigFile {
  KeyValues base;
  std::vector<std::pair<std::string, KeyValues>> cases;
};

ConfigFile parse_config(const std::string& text, const std::string& origin = "<config>");
ConfigFile load_config(const std::string& path);

/// "section.key=value"
std::pair<std::string, std::string> parse_assignment(const std::string& text);

struct RunConfig {
  std::string name;  ///< case name, empty for the base run
  KeyValues resolved;

  ModelParams params;
  PulseSpec spec;

  std::optional<double> dt;
  std::optional<double> t_max;
  std::size_t stride = 1;
  double max_table_mb = 1024.0;
  unsigned threads = 0;

  std::optional<double> x_min;
  std::optional<double> x_max;
  std::size_t x_points = 401;
  double p_max = 8.0;
  std::size_t p_points = 256;
  double omega_max = 4.0;
  std::size_t omega_points = 201;
  std::optional<double> t_snapshot;
  std::vector<double> snapshots;
  std::string density_method = "both";

  std::vector<double> sweep_gamma{0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> sweep_L{0.0, 2.0, 5.0};

  bool oracle = true;
  std::size_t oracle_modes = 512;
  double oracle_p_max = 32.0;
  double oracle_dt = 0.005;

  std::string directory = "out";
  std::string prefix = "waveqed";
  std::string table_cache;
};

/// Applies case overrides and --set values to the base keys, then checks
/// every value. All problems are reported together in one ConfigError.
std::vector<RunConfig> resolve(const ConfigFile& file, const KeyValues& overrides);
RunConfig resolve_one(const KeyValues& keys, const std::string& name = "");

/// Known keys with their defaults, used for documentation and sidecars.
const KeyValues& default_keys();

}  // namespace waveqed::cli
