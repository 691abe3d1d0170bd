#pragma once

#include "hgdg/amr.hpp"
#include "hgdg/coupling.hpp"
#include "hgdg/errors.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hgdg {

/// A value from the TOML subset: booleans, integers, floats, strings and
/// flat arrays of those.
struct TomlValue {
  using Array = std::vector<TomlValue>;
  std::variant<bool, long long, double, std::string, Array> data;

  bool is_number() const { return std::holds_alternative<long long>(data) || std::holds_alternative<double>(data); }
  double as_double(const std::string& key) const;
  long long as_int(const std::string& key) const;
  bool as_bool(const std::string& key) const;
  const std::string& as_string(const std::string& key) const;
  std::vector<double> as_double_list(const std::string& key) const;
};

/// Flat "section.key" -> value map.
using TomlTable = std::map<std::string, TomlValue>;

/// Parses the subset used by run configs: [section] headers, key = value
/// pairs, # comments. Throws ConfigError with the line number on bad input.
TomlTable parse_toml(const std::string& text);
TomlTable parse_toml_file(const std::string& path);
/// Parses the right-hand side of one assignment.
TomlValue parse_toml_value(const std::string& text);

/// Applies "section.key=value" on top of `table`.
void apply_override(TomlTable& table, const std::string& assignment);

struct RunConfig {
  std::string experiment;

  int degree = 3;
  int initial_level = 2;
  bool amr = false;
  AMRPolicy amr_policy;
  int amr_initial_cycles = 10;

  double t_final = 1.0;
  std::string euler_scheme = "ck45";
  std::string gravity_scheme = "ck45";
  double cfl_euler = 0.5;
  double cfl_gravity = 0.5;
  double tol = 1e-10;
  /// Empty means the experiment default.
  std::string surface_flux;
  std::string volume_flux;
  std::string volume_form;
  int shock_capturing = -1;  // -1: experiment default
  double sedov_h_initial = 0.03125;
  /// Constant pseudotime initial guess (phi, q1, q2) for steady gravity runs.
  std::optional<std::array<double, 3>> gravity_initial_state;
  std::size_t max_steps = 10000000;

  CouplingStrategy coupling = CouplingStrategy::PerStage;
  std::size_t min_subcycles = 0;
  std::size_t max_subcycles = 1000000;
  ResidualMonitor residual_monitor = ResidualMonitor::LastStage;

  std::string output_dir = "out";
  int energy_every = 1;
  std::vector<double> snapshot_times;
  std::vector<int> convergence_levels;
  int threads = 0;
};

/// Validates and converts a parsed table. Unknown keys are rejected.
RunConfig run_config_from_table(const TomlTable& table);

/// Reads a config file and applies overrides in order.
RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace hgdg
