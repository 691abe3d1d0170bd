#pragma once

#include "hgdg/semidisc.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace hgdg {

/// du = f(t, u)
using RhsFn = std::function<void(double t, std::span<const double> u, std::span<double> du)>;

enum class SchemeKind { LowStorage2N, ThreeSStar };

/// Coefficients of an explicit low-storage Runge-Kutta method.
struct RKScheme {
  std::string name;
  SchemeKind kind = SchemeKind::LowStorage2N;
  std::vector<double> a, b;                    // 2N registers
  std::vector<double> gamma1, gamma2, gamma3;  // 3S* registers
  std::vector<double> beta, delta;
  std::vector<double> c;

  int stages() const { return static_cast<int>(c.size()); }
};

/// Five-stage fourth-order 2N scheme of Carpenter and Kennedy.
const RKScheme& ck45();
/// Five-stage second-order 3S* scheme optimized for hyperbolic diffusion.
const RKScheme& rk3sstar();
/// "ck45" or "rk3s*" (also "rk3sstar"); throws InvalidArgument otherwise.
const RKScheme& scheme_by_name(const std::string& name);

/// Scratch registers reused across steps.
struct RKWorkspace {
  std::vector<double> r1, r2, r3;
  void resize(std::size_t n) {
    r1.resize(n);
    r2.resize(n);
    r3.resize(n);
  }
};

/// One step of either scheme kind. If `first_rhs` is non-empty it must hold
/// f(t, u) and replaces the first stage evaluation.
void rk_step(const RKScheme& scheme, const RhsFn& rhs, std::span<double> u, double t, double dt, RKWorkspace& ws,
             std::span<const double> first_rhs = {});

void step_lowstorage_2n(const RKScheme& scheme, const RhsFn& rhs, std::span<double> u, double t, double dt,
                        RKWorkspace& ws, std::span<const double> first_rhs = {});
void step_3sstar(const RKScheme& scheme, const RhsFn& rhs, std::span<double> u, double t, double dt,
                 RKWorkspace& ws, std::span<const double> first_rhs = {});

/// dt = cfl / (N + 1) * min_e h_e / Lambda_e. Throws InvalidArgument for
/// cfl <= 0 or a vanishing wave speed.
template <class Eq>
double stable_dt(const Semidiscretization<Eq>& semi, std::span<const double> u, double cfl) {
  if (!(cfl > 0.0)) throw InvalidArgument("cfl must be positive");
  const auto lambda = semi.max_wave_speeds(u);
  double ratio = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < lambda.size(); ++e) {
    if (!(lambda[e] > 0.0)) throw InvalidArgument("stable_dt: wave speed vanishes in element " + std::to_string(e));
    ratio = std::min(ratio, semi.mesh().element(e).h / lambda[e]);
  }
  return cfl / (semi.mesh().degree() + 1) * ratio;
}

/// Where the steady-state residual max |d phi / d tau| is read.
enum class ResidualMonitor {
  /// RHS of the current state; doubles as the first stage of the next step.
  CurrentState,
  /// RHS of the final stage of the step just taken; at least one step is always taken.
  LastStage,
};

ResidualMonitor parse_residual_monitor(const std::string& name);
std::string to_string(ResidualMonitor m);

struct PseudotimeOptions {
  double tol = 1e-10;
  double cfl = 0.5;
  const RKScheme* scheme = nullptr;  // defaults to CK45
  std::size_t max_steps = 1000000;
  /// Steps taken even when the initial residual is already below tol.
  std::size_t min_steps = 0;
  ResidualMonitor monitor = ResidualMonitor::LastStage;
};

struct PseudotimeResult {
  std::size_t steps = 0;
  double residual = 0.0;
};

/// Marches the gravity system in pseudotime until max |d phi / d tau| < tol.
///
/// The residual is read from an RHS the step computes anyway (see
/// ResidualMonitor), so convergence costs no extra evaluations. `t` is the
/// physical time passed to sources.
/// Throws DivergenceError when max_steps is exceeded or the residual is not finite.
PseudotimeResult pseudotime_steady_state(const GravitySemi& semi, std::span<double> state, double t,
                                         const PseudotimeOptions& options, RKWorkspace& ws);

/// Max |du[0]| over all nodes, reading every nvars-th entry.
double max_abs_component(std::span<const double> du, int nvars, int component);

}  // namespace hgdg
