#include "hgdg/config.hpp"

#include "hgdg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace hgdg {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

bool valid_key(const std::string& k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

std::vector<std::string> split_array(const std::string& body) {
  std::vector<std::string> items;
  std::string cur;
  bool in_string = false;
  for (char c : body) {
    if (c == '"') in_string = !in_string;
    if (c == ',' && !in_string) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_string) throw ConfigError("unterminated string in array");
  // A trailing comma is allowed.
  const std::string last = trim(cur);
  if (!last.empty()) items.push_back(last);
  for (const auto& it : items)
    if (it.empty()) throw ConfigError("empty array element");
  return items;
}

std::string type_name(const TomlValue& v) {
  switch (v.data.index()) {
    case 0: return "boolean";
    case 1: return "integer";
    case 2: return "float";
    case 3: return "string";
    default: return "array";
  }
}

[[noreturn]] void wrong_type(const std::string& key, const TomlValue& v, const char* want) {
  throw ConfigError("key '" + key + "': expected " + want + ", got " + type_name(v));
}

}  // namespace

double TomlValue::as_double(const std::string& key) const {
  if (const auto* i = std::get_if<long long>(&data)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&data)) return *d;
  wrong_type(key, *this, "a number");
}

long long TomlValue::as_int(const std::string& key) const {
  if (const auto* i = std::get_if<long long>(&data)) return *i;
  wrong_type(key, *this, "an integer");
}

bool TomlValue::as_bool(const std::string& key) const {
  if (const auto* b = std::get_if<bool>(&data)) return *b;
  wrong_type(key, *this, "a boolean");
}

const std::string& TomlValue::as_string(const std::string& key) const {
  if (const auto* s = std::get_if<std::string>(&data)) return *s;
  wrong_type(key, *this, "a string");
}

std::vector<double> TomlValue::as_double_list(const std::string& key) const {
  const auto* a = std::get_if<Array>(&data);
  if (!a) wrong_type(key, *this, "an array");
  std::vector<double> out;
  for (const auto& v : *a) out.push_back(v.as_double(key));
  return out;
}

TomlValue parse_toml_value(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw ConfigError("missing value");
  if (text == "true") return {true};
  if (text == "false") return {false};
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') throw ConfigError("unterminated string: " + text);
    return {text.substr(1, text.size() - 2)};
  }
  if (text.front() == '[') {
    if (text.back() != ']') throw ConfigError("unterminated array: " + text);
    TomlValue::Array arr;
    for (const auto& item : split_array(text.substr(1, text.size() - 2))) {
      auto v = parse_toml_value(item);
      if (std::holds_alternative<TomlValue::Array>(v.data)) throw ConfigError("nested arrays are not supported");
      arr.push_back(std::move(v));
    }
    return {std::move(arr)};
  }
  std::string num;
  for (char c : text)
    if (c != '_') num += c;
  const bool looks_float = num.find_first_of(".eE") != std::string::npos || num == "inf" || num == "nan";
  if (!looks_float) {
    long long i = 0;
    const auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), i);
    if (ec == std::errc() && p == num.data() + num.size()) return {i};
  } else {
    double d = 0.0;
    const auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), d);
    if (ec == std::errc() && p == num.data() + num.size()) return {d};
  }
  throw ConfigError("cannot parse value '" + text + "' (strings need double quotes)");
}

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    try {
      if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError("malformed section header");
        section = trim(s.substr(1, s.size() - 2));
        if (!valid_key(section)) throw ConfigError("invalid section name '" + section + "'");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value");
      const std::string key = trim(s.substr(0, eq));
      if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'");
      const std::string full = section.empty() ? key : section + "." + key;
      if (table.count(full)) throw ConfigError("duplicate key '" + full + "'");
      table[full] = parse_toml_value(s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return table;
}

TomlTable parse_toml_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_toml(ss.str());
}

void apply_override(TomlTable& table, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = trim(assignment.substr(0, eq));
  const auto dot = key.find('.');
  if (dot == std::string::npos || !valid_key(key.substr(0, dot)) || !valid_key(key.substr(dot + 1)))
    throw ConfigError("override key '" + key + "' must look like section.key");
  try {
    table[key] = parse_toml_value(assignment.substr(eq + 1));
  } catch (const ConfigError&) {
    // Bare words are accepted as strings on the command line.
    table[key] = TomlValue{trim(assignment.substr(eq + 1))};
  }
}

RunConfig run_config_from_table(const TomlTable& table) {
  RunConfig c;
  std::set<std::string> used;
  auto get = [&](const std::string& key) -> const TomlValue* {
    used.insert(key);
    auto it = table.find(key);
    return it == table.end() ? nullptr : &it->second;
  };
  auto num = [&](const std::string& key, double& out) {
    if (const auto* v = get(key)) out = v->as_double(key);
  };
  auto integer = [&](const std::string& key, auto& out) {
    if (const auto* v = get(key)) {
      const long long i = v->as_int(key);
      if (i < 0) throw ConfigError("key '" + key + "' must be non-negative");
      out = static_cast<std::remove_reference_t<decltype(out)>>(i);
    }
  };
  auto str = [&](const std::string& key, std::string& out) {
    if (const auto* v = get(key)) out = v->as_string(key);
  };
  auto flag = [&](const std::string& key, bool& out) {
    if (const auto* v = get(key)) out = v->as_bool(key);
  };

  str("experiment.name", c.experiment);
  if (c.experiment.empty()) throw ConfigError("experiment.name is required");

  integer("mesh.degree", c.degree);
  integer("mesh.initial_level", c.initial_level);
  flag("mesh.amr", c.amr);
  integer("mesh.amr_level_low", c.amr_policy.level_low);
  integer("mesh.amr_level_high", c.amr_policy.level_high);
  num("mesh.amr_threshold", c.amr_policy.threshold);
  integer("mesh.amr_interval", c.amr_policy.interval);
  integer("mesh.amr_initial_cycles", c.amr_initial_cycles);
  num("mesh.amr_alpha_max", c.amr_policy.indicator.alpha_max);
  num("mesh.amr_alpha_min", c.amr_policy.indicator.alpha_min);
  if (const auto* v = get("mesh.convergence_levels"))
    for (double l : v->as_double_list("mesh.convergence_levels")) {
      if (l < 0.0 || l != std::floor(l)) throw ConfigError("mesh.convergence_levels must be non-negative integers");
      c.convergence_levels.push_back(static_cast<int>(l));
    }

  num("solver.t_final", c.t_final);
  str("solver.euler_scheme", c.euler_scheme);
  str("solver.gravity_scheme", c.gravity_scheme);
  num("solver.cfl_euler", c.cfl_euler);
  num("solver.cfl_gravity", c.cfl_gravity);
  num("solver.tol", c.tol);
  str("solver.surface_flux", c.surface_flux);
  str("solver.volume_flux", c.volume_flux);
  str("solver.volume_form", c.volume_form);
  if (const auto* v = get("solver.shock_capturing")) c.shock_capturing = v->as_bool("solver.shock_capturing") ? 1 : 0;
  num("solver.sedov_h_initial", c.sedov_h_initial);
  if (const auto* v = get("solver.gravity_initial_state")) {
    const auto g = v->as_double_list("solver.gravity_initial_state");
    if (g.size() != 3) throw ConfigError("solver.gravity_initial_state needs three values (phi, q1, q2)");
    c.gravity_initial_state = std::array<double, 3>{g[0], g[1], g[2]};
  }
  integer("solver.max_steps", c.max_steps);

  if (const auto* v = get("coupling.strategy")) {
    try {
      c.coupling = parse_coupling_strategy(v->as_string("coupling.strategy"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  integer("coupling.min_subcycles", c.min_subcycles);
  integer("coupling.max_subcycles", c.max_subcycles);
  if (const auto* v = get("coupling.residual_monitor")) {
    try {
      c.residual_monitor = parse_residual_monitor(v->as_string("coupling.residual_monitor"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }

  str("output.dir", c.output_dir);
  integer("output.energy_every", c.energy_every);
  if (const auto* v = get("output.snapshot_times")) c.snapshot_times = v->as_double_list("output.snapshot_times");
  integer("output.threads", c.threads);

  for (const auto& [key, value] : table)
    if (!used.count(key)) throw ConfigError("unknown config key '" + key + "'");

  // Semantic checks.
  try {
    (void)make_case(c.experiment, c.sedov_h_initial);
    (void)scheme_by_name(c.euler_scheme);
    (void)scheme_by_name(c.gravity_scheme);
    if (!c.surface_flux.empty()) (void)parse_flux_kind(c.surface_flux);
    if (!c.volume_flux.empty()) (void)parse_flux_kind(c.volume_flux);
    c.amr_policy.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (!c.volume_form.empty() && c.volume_form != "weak" && c.volume_form != "split")
    throw ConfigError("solver.volume_form must be \"weak\" or \"split\"");
  if (c.degree < 1 || c.degree > 15) throw ConfigError("mesh.degree must be in [1, 15]");
  if (c.initial_level > Quadtree::kDefaultMaxLevel) throw ConfigError("mesh.initial_level is too large");
  if (c.amr && c.amr_policy.level_high > Quadtree::kDefaultMaxLevel) throw ConfigError("mesh.amr_level_high is too large");
  if (!(c.t_final > 0.0)) throw ConfigError("solver.t_final must be positive");
  if (!(c.cfl_euler > 0.0) || !(c.cfl_gravity > 0.0)) throw ConfigError("CFL numbers must be positive");
  if (!(c.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (c.energy_every < 1) throw ConfigError("output.energy_every must be at least 1");
  if (c.amr_initial_cycles < 1) throw ConfigError("mesh.amr_initial_cycles must be at least 1");
  if (c.min_subcycles > c.max_subcycles) throw ConfigError("coupling.min_subcycles exceeds max_subcycles");
  if (!std::is_sorted(c.snapshot_times.begin(), c.snapshot_times.end()))
    throw ConfigError("output.snapshot_times must be increasing");
  for (double t : c.snapshot_times)
    if (!(t > 0.0) || t > c.t_final) throw ConfigError("snapshot times must lie in (0, t_final]");
  return c;
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
  TomlTable table = parse_toml_file(path);
  for (const auto& o : overrides) apply_override(table, o);
  return run_config_from_table(table);
}

}  // namespace hgdg
