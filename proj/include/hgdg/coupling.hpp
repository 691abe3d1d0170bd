#pragma once

#include "hgdg/semidisc.hpp"
#include "hgdg/timeint.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>

namespace hgdg {

enum class CouplingStrategy { PerStage, PerStep };

CouplingStrategy parse_coupling_strategy(const std::string& name);
std::string to_string(CouplingStrategy s);

struct CouplingConfig {
  CouplingStrategy strategy = CouplingStrategy::PerStage;
  double G = 1.0;
  /// Forcing is -4 pi G (rho - rho_background).
  double rho_background = 0.0;
  double tol = 1e-10;
  double cfl_euler = 0.5;
  double cfl_gravity = 0.5;
  const RKScheme* euler_scheme = nullptr;    // defaults to CK45
  const RKScheme* gravity_scheme = nullptr;  // defaults to CK45
  std::size_t min_subcycles = 0;
  std::size_t max_subcycles = 1000000;
  ResidualMonitor monitor = ResidualMonitor::LastStage;
};

struct CouplingStats {
  std::size_t gravity_solves = 0;
  std::size_t total_subcycles = 0;
  /// sub-cycle count -> number of solves that needed it
  std::map<std::size_t, std::size_t> histogram;
  double gravity_seconds = 0.0;
  double euler_seconds = 0.0;
};

/// Euler and gravity solvers on one mesh, exchanging data through sources.
///
/// The constructor registers the gravity source on the Euler operator and
/// the density forcing on the gravity operator, so the object must outlive
/// both operators' use and is neither copyable nor movable. The gravity
/// state persists between solves and serves as the warm start.
class CoupledSystem {
 public:
  CoupledSystem(EulerSemi& euler, GravitySemi& gravity, Field euler_state, Field gravity_state,
                CouplingConfig config);
  CoupledSystem(const CoupledSystem&) = delete;
  CoupledSystem& operator=(const CoupledSystem&) = delete;

  /// Converges gravity for the density held in `euler_u`. Returns sub-cycles.
  std::size_t converge_gravity(std::span<const double> euler_u, double t);

  /// Gravity converged for the current Euler state, computed on a copy so
  /// neither the warm start nor the statistics change. Used for diagnostics.
  Field diagnostic_gravity(double t);

  /// One Euler step of size dt with the configured strategy.
  void advance(double t, double dt);

  double stable_dt() const;

  Field& euler_state() { return euler_state_; }
  const Field& euler_state() const { return euler_state_; }
  Field& gravity_state() { return gravity_state_; }
  const Field& gravity_state() const { return gravity_state_; }
  const CouplingConfig& config() const { return config_; }
  const CouplingStats& stats() const { return stats_; }
  const EulerSemi& euler() const { return euler_; }
  const GravitySemi& gravity() const { return gravity_; }

 private:
  EulerSemi& euler_;
  GravitySemi& gravity_;
  Field euler_state_;
  Field gravity_state_;
  CouplingConfig config_;
  CouplingStats stats_;
  std::span<const double> density_;
  RKWorkspace euler_ws_;
  RKWorkspace gravity_ws_;
  RKWorkspace diagnostic_ws_;
};

}  // namespace hgdg
