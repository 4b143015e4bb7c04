#include "config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace waveqed::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find_first_of("#;");
  return pos == std::string::npos ? line : line.substr(0, pos);
}

/// Collects conversion problems so they can be reported together.
class Reader {
 public:
  explicit Reader(const KeyValues& keys) : keys_(keys) {}

  const std::string& raw(const std::string& key) const { return keys_.at(key); }

  double number(const std::string& key) {
    const std::string& text = raw(key);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
      fail(key, "'" + text + "' is not a finite number");
      return 0.0;
    }
    return v;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (raw(key) == "auto") return std::nullopt;
    return number(key);
  }

  long integer(const std::string& key, long lo) {
    const std::string& text = raw(key);
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (text.empty() || *end != '\0' || errno == ERANGE) {
      fail(key, "'" + text + "' is not an integer");
      return lo;
    }
    if (v < lo) {
      fail(key, "must be at least " + std::to_string(lo));
      return lo;
    }
    return v;
  }

  bool boolean(const std::string& key) {
    const std::string& text = raw(key);
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    fail(key, "'" + text + "' is not a boolean");
    return false;
  }

  std::vector<double> list(const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(raw(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      char* end = nullptr;
      const double v = std::strtod(item.c_str(), &end);
      if (item.empty() || *end != '\0' || !std::isfinite(v)) {
        fail(key, "'" + item + "' in list is not a number");
        continue;
      }
      out.push_back(v);
    }
    return out;
  }

  void fail(const std::string& key, const std::string& message) { errors_.push_back(key + ": " + message); }
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  const KeyValues& keys_;
  std::vector<std::string> errors_;
};

}  // namespace

const KeyValues& default_keys() {
  static const KeyValues keys{
      {"model.gamma_over_omega", "1"},
      {"model.delta_over_omega", "0"},
      {"pulse.x0_over_w", "-10"},
      {"pulse.L_over_w", "0"},
      {"pulse.n_photons", "2"},
      {"grid.dt", "auto"},
      {"grid.t_max", "auto"},
      {"grid.stride", "1"},
      {"grid.max_table_mb", "1024"},
      {"grid.threads", "0"},
      {"grid.x_min", "auto"},
      {"grid.x_max", "auto"},
      {"grid.x_points", "401"},
      {"grid.p_max", "8"},
      {"grid.p_points", "256"},
      {"grid.omega_max", "4"},
      {"grid.omega_points", "201"},
      {"grid.t_snapshot", "auto"},
      {"grid.snapshots", "auto"},
      {"density.method", "both"},
      {"sweep.gamma_over_omega", "0.25, 0.5, 1, 2, 4"},
      {"sweep.L_over_w", "0, 2, 5"},
      {"validate.oracle", "true"},
      {"validate.oracle_modes", "512"},
      {"validate.oracle_p_max", "32"},
      {"validate.oracle_dt", "0.005"},
      {"output.directory", "out"},
      {"output.prefix", "waveqed"},
      {"output.table_cache", ""},
  };
  return keys;
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + text + "'");
  std::string key = trim(text.substr(0, eq));
  std::string value = trim(text.substr(eq + 1));
  if (key.empty()) throw ConfigError("empty key in '" + text + "'");
  return {key, value};
}

ConfigFile parse_config(const std::string& text, const std::string& origin) {
  ConfigFile file;
  std::vector<std::string> errors;
  std::istringstream in(text);
  std::string line;
  std::string section;
  KeyValues* target = &file.base;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = origin + ":" + std::to_string(number);
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + ": unterminated section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.rfind("case.", 0) == 0) {
        const std::string name = section.substr(5);
        if (name.empty()) errors.push_back(where + ": case without a name");
        file.cases.emplace_back(name, KeyValues{});
        target = &file.cases.back().second;
      } else {
        target = &file.base;
      }
      continue;
    }
    try {
      auto [key, value] = parse_assignment(line);
      const bool in_case = section.rfind("case.", 0) == 0;
      if (!in_case) {
        if (section.empty()) {
          errors.push_back(where + ": key '" + key + "' outside any section");
          continue;
        }
        key = section + "." + key;
      }
      (*target)[key] = value;
    } catch (const ConfigError& e) {
      errors.push_back(where + ": " + e.what());
    }
  }
  if (!errors.empty()) {
    std::string message = "configuration errors:";
    for (const auto& e : errors) message += "\n  " + e;
    throw ConfigError(message);
  }
  return file;
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

RunConfig resolve_one(const KeyValues& keys, const std::string& name) {
  KeyValues merged = default_keys();
  std::vector<std::string> errors;
  for (const auto& [key, value] : keys) {
    if (!merged.count(key)) {
      errors.push_back(key + ": unknown key");
      continue;
    }
    merged[key] = value;
  }

  Reader r(merged);
  RunConfig c;
  c.name = name;
  c.resolved = merged;
  c.params.v_g = 1.0;
  c.params.gamma = r.number("model.gamma_over_omega");
  c.params.delta = r.number("model.delta_over_omega");
  c.spec.w = 1.0;
  c.spec.x0 = r.number("pulse.x0_over_w");
  c.spec.L = r.number("pulse.L_over_w");
  c.spec.n_photons = static_cast<int>(r.integer("pulse.n_photons", 1));

  c.dt = r.optional_number("grid.dt");
  c.t_max = r.optional_number("grid.t_max");
  c.stride = static_cast<std::size_t>(r.integer("grid.stride", 1));
  c.max_table_mb = r.number("grid.max_table_mb");
  c.threads = static_cast<unsigned>(r.integer("grid.threads", 0));
  c.x_min = r.optional_number("grid.x_min");
  c.x_max = r.optional_number("grid.x_max");
  c.x_points = static_cast<std::size_t>(r.integer("grid.x_points", 3));
  c.p_max = r.number("grid.p_max");
  c.p_points = static_cast<std::size_t>(r.integer("grid.p_points", 3));
  c.omega_max = r.number("grid.omega_max");
  c.omega_points = static_cast<std::size_t>(r.integer("grid.omega_points", 3));
  c.t_snapshot = r.optional_number("grid.t_snapshot");
  if (merged["grid.snapshots"] != "auto") c.snapshots = r.list("grid.snapshots");
  c.density_method = merged["density.method"];
  if (c.density_method != "both" && c.density_method != "quadrature" && c.density_method != "closed") {
    r.fail("density.method", "must be one of both, quadrature, closed");
  }
  c.sweep_gamma = r.list("sweep.gamma_over_omega");
  c.sweep_L = r.list("sweep.L_over_w");
  c.oracle = r.boolean("validate.oracle");
  c.oracle_modes = static_cast<std::size_t>(r.integer("validate.oracle_modes", 2));
  c.oracle_p_max = r.number("validate.oracle_p_max");
  c.oracle_dt = r.number("validate.oracle_dt");
  c.directory = merged["output.directory"];
  c.prefix = merged["output.prefix"];
  c.table_cache = merged["output.table_cache"];

  errors.insert(errors.end(), r.errors().begin(), r.errors().end());
  auto check = [&](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  };
  check([&] { c.params.validate(); });
  check([&] { c.spec.validate(); });
  if (c.dt && !(*c.dt > 0.0)) errors.push_back("grid.dt: must be positive");
  if (c.dt && c.params.gamma >= 0.0 && *c.dt > TimeGrid::max_step(c.params, c.spec)) {
    errors.push_back("grid.dt: " + merged["grid.dt"] + " exceeds the stability limit " +
                     std::to_string(TimeGrid::max_step(c.params, c.spec)));
  }
  if (c.t_max && !(*c.t_max > 0.0)) errors.push_back("grid.t_max: must be positive");
  if (!(c.max_table_mb > 0.0)) errors.push_back("grid.max_table_mb: must be positive");
  if (c.x_min && c.x_max && !(*c.x_min < *c.x_max)) errors.push_back("grid.x_min must be below grid.x_max");
  if (!(c.p_max > 0.0)) errors.push_back("grid.p_max: must be positive");
  if (!(c.omega_max > 0.0)) errors.push_back("grid.omega_max: must be positive");
  if (c.t_snapshot && *c.t_snapshot < 0.0) errors.push_back("grid.t_snapshot: must be nonnegative");
  for (double t : c.snapshots) {
    if (t < 0.0) errors.push_back("grid.snapshots: times must be nonnegative");
  }
  for (double g : c.sweep_gamma) {
    if (g < 0.0) errors.push_back("sweep.gamma_over_omega: rates must be nonnegative");
  }
  for (double L : c.sweep_L) {
    if (L < 0.0) errors.push_back("sweep.L_over_w: separations must be nonnegative");
  }
  if (!(c.oracle_p_max > 0.0) || !(c.oracle_dt > 0.0)) {
    errors.push_back("validate: oracle_p_max and oracle_dt must be positive");
  }
  if (c.prefix.empty()) errors.push_back("output.prefix: must not be empty");

  if (!errors.empty()) {
    std::string message = name.empty() ? "invalid configuration:" : "invalid configuration for case " + name + ":";
    for (const auto& e : errors) message += "\n  " + e;
    throw ConfigError(message);
  }
  return c;
}

std::vector<RunConfig> resolve(const ConfigFile& file, const KeyValues& overrides) {
  std::vector<RunConfig> out;
  std::vector<std::string> errors;
  auto attempt = [&](KeyValues keys, const std::string& name) {
    for (const auto& [k, v] : overrides) keys[k] = v;
    try {
      out.push_back(resolve_one(keys, name));
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  };
  if (file.cases.empty()) {
    attempt(file.base, "");
  } else {
    for (const auto& [name, keys] : file.cases) {
      KeyValues merged = file.base;
      for (const auto& [k, v] : keys) merged[k] = v;
      attempt(merged, name);
    }
  }
  if (!errors.empty()) {
    std::string message;
    for (const auto& e : errors) message += (message.empty() ? "" : "\n") + e;
    throw ConfigError(message);
  }
  return out;
}

}  // namespace waveqed::cli
