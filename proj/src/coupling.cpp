#include "hgdg/coupling.hpp"

#include <chrono>
#include <numbers>

namespace hgdg {

namespace {
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}
}  // namespace

CouplingStrategy parse_coupling_strategy(const std::string& name) {
  if (name == "per_stage") return CouplingStrategy::PerStage;
  if (name == "per_step") return CouplingStrategy::PerStep;
  throw InvalidArgument("unknown coupling strategy '" + name + "'");
}

std::string to_string(CouplingStrategy s) { return s == CouplingStrategy::PerStage ? "per_stage" : "per_step"; }

CoupledSystem::CoupledSystem(EulerSemi& euler, GravitySemi& gravity, Field euler_state, Field gravity_state,
                             CouplingConfig config)
    : euler_(euler),
      gravity_(gravity),
      euler_state_(std::move(euler_state)),
      gravity_state_(std::move(gravity_state)),
      config_(config) {
  if (&euler.mesh() != &gravity.mesh()) throw InvalidArgument("coupled solvers must share one mesh");
  if (euler_state_.values().size() != euler.state_size() || gravity_state_.values().size() != gravity.state_size())
    throw InvalidArgument("coupled states do not match the mesh");
  if (!config_.euler_scheme) config_.euler_scheme = &ck45();
  if (!config_.gravity_scheme) config_.gravity_scheme = &ck45();

  euler_.add_source([this](std::span<const double> u, double, std::span<double> du) {
    const std::span<const double> g = gravity_state_.span();
    const std::size_t nodes = u.size() / 4;
    for (std::size_t q = 0; q < nodes; ++q) {
      const double q1 = g[3 * q + 1];
      const double q2 = g[3 * q + 2];
      du[4 * q + 1] -= u[4 * q] * q1;
      du[4 * q + 2] -= u[4 * q] * q2;
      du[4 * q + 3] -= u[4 * q + 1] * q1 + u[4 * q + 2] * q2;
    }
  });
  gravity_.add_source([this](std::span<const double> u, double, std::span<double> du) {
    const double scale = -4.0 * std::numbers::pi * config_.G;
    const std::size_t nodes = u.size() / 3;
    for (std::size_t q = 0; q < nodes; ++q) du[3 * q] += scale * (density_[4 * q] - config_.rho_background);
  });
}

std::size_t CoupledSystem::converge_gravity(std::span<const double> euler_u, double t) {
  const auto start = Clock::now();
  density_ = euler_u;
  PseudotimeOptions opt;
  opt.tol = config_.tol;
  opt.cfl = config_.cfl_gravity;
  opt.scheme = config_.gravity_scheme;
  opt.min_steps = config_.min_subcycles;
  opt.max_steps = config_.max_subcycles;
  opt.monitor = config_.monitor;
  const auto res = pseudotime_steady_state(gravity_, gravity_state_.span(), t, opt, gravity_ws_);
  stats_.gravity_solves += 1;
  stats_.total_subcycles += res.steps;
  stats_.histogram[res.steps] += 1;
  stats_.gravity_seconds += seconds_since(start);
  return res.steps;
}

Field CoupledSystem::diagnostic_gravity(double t) {
  Field copy = gravity_state_;
  density_ = euler_state_.span();
  PseudotimeOptions opt;
  opt.tol = config_.tol;
  opt.cfl = config_.cfl_gravity;
  opt.scheme = config_.gravity_scheme;
  opt.max_steps = config_.max_subcycles;
  opt.monitor = config_.monitor;
  pseudotime_steady_state(gravity_, copy.span(), t, opt, diagnostic_ws_);
  return copy;
}

void CoupledSystem::advance(double t, double dt) {
  const auto start = Clock::now();
  const double gravity_before = stats_.gravity_seconds;
  int stage = 0;
  RhsFn rhs;
  if (config_.strategy == CouplingStrategy::PerStage) {
    rhs = [&](double tt, std::span<const double> u, std::span<double> du) {
      try {
        converge_gravity(u, tt);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " (Euler stage " + std::to_string(stage + 1) + ")");
      }
      ++stage;
      euler_.rhs(u, du, tt);
    };
  } else {
    converge_gravity(euler_state_.span(), t);
    rhs = [&](double tt, std::span<const double> u, std::span<double> du) { euler_.rhs(u, du, tt); };
  }
  rk_step(*config_.euler_scheme, rhs, euler_state_.span(), t, dt, euler_ws_);
  stats_.euler_seconds += seconds_since(start) - (stats_.gravity_seconds - gravity_before);
}

double CoupledSystem::stable_dt() const { return hgdg::stable_dt(euler_, euler_state_.span(), config_.cfl_euler); }

}  // namespace hgdg
