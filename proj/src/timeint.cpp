#include "hgdg/timeint.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace hgdg {

const RKScheme& ck45() {
  static const RKScheme s = [] {
    RKScheme r;
    r.name = "ck45";
    r.kind = SchemeKind::LowStorage2N;
    r.a = {0.0, -567301805773.0 / 1357537059087.0, -2404267990393.0 / 2016746695238.0,
           -3550918686646.0 / 2091501179385.0, -1275806237668.0 / 842570457699.0};
    r.b = {1432997174477.0 / 9575080441755.0, 5161836677717.0 / 13612068292357.0,
           1720146321549.0 / 2090206949498.0, 3134564353537.0 / 4481467310338.0,
           2277821191437.0 / 14882151754819.0};
    r.c = {0.0, 1432997174477.0 / 9575080441755.0, 2526269341429.0 / 6820363183730.0,
           2006345519317.0 / 3224310063776.0, 2802321613138.0 / 2924317926251.0};
    return r;
  }();
  return s;
}

const RKScheme& rk3sstar() {
  static const RKScheme s = [] {
    RKScheme r;
    r.name = "rk3s*";
    r.kind = SchemeKind::ThreeSStar;
    r.gamma1 = {0.0000000000000000E+00, 5.2656474556752575E-01, 1.0385212774098265E+00, 3.6859755007388034E-01,
                -6.3350615190506088E-01};
    r.gamma2 = {1.0000000000000000E+00, 4.1892580153419307E-01, -2.7595818152587825E-02, 9.1271323651988631E-02,
                6.8495995159465062E-01};
    r.gamma3 = {0.0000000000000000E+00, 0.0000000000000000E+00, 0.0000000000000000E+00, 4.1301005663300466E-01,
                -5.4537881202277507E-03};
    r.delta = {1.0000000000000000E+00, 1.3011720142005145E-01, 2.6579275844515687E-01, 9.9687218193685878E-01,
               0.0000000000000000E+00};
    r.beta = {4.5158640252832094E-01, 7.5974836561844006E-01, 3.7561630338850771E-01, 2.9356700007428856E-02,
              2.5205285143494666E-01};
    r.c = {0.0000000000000000E+00, 4.5158640252832094E-01, 1.0221535725056414E+00, 1.4280257701954349E+00,
           7.1581334196229851E-01};
    return r;
  }();
  return s;
}

ResidualMonitor parse_residual_monitor(const std::string& name) {
  if (name == "current_state") return ResidualMonitor::CurrentState;
  if (name == "last_stage") return ResidualMonitor::LastStage;
  throw InvalidArgument("unknown residual monitor '" + name + "'");
}

std::string to_string(ResidualMonitor m) {
  return m == ResidualMonitor::CurrentState ? "current_state" : "last_stage";
}

const RKScheme& scheme_by_name(const std::string& name) {
  if (name == "ck45") return ck45();
  if (name == "rk3s*" || name == "rk3sstar") return rk3sstar();
  throw InvalidArgument("unknown time integrator '" + name + "'");
}

void step_lowstorage_2n(const RKScheme& scheme, const RhsFn& rhs, std::span<double> u, double t, double dt,
                        RKWorkspace& ws, std::span<const double> first_rhs) {
  if (scheme.kind != SchemeKind::LowStorage2N) throw InvalidArgument("scheme is not a 2N scheme");
  const std::size_t n = u.size();
  ws.resize(n);
  std::span<double> acc(ws.r1.data(), n);
  std::span<double> k(ws.r2.data(), n);
  for (int i = 0; i < scheme.stages(); ++i) {
    std::span<const double> f;
    if (i == 0 && !first_rhs.empty()) {
      f = first_rhs;
    } else {
      rhs(t + scheme.c[i] * dt, u, k);
      f = k;
    }
    const double a = scheme.a[i];
    const double b = scheme.b[i];
    for (std::size_t q = 0; q < n; ++q) {
      acc[q] = (i == 0 ? 0.0 : a * acc[q]) + dt * f[q];
      u[q] += b * acc[q];
    }
  }
}

void step_3sstar(const RKScheme& scheme, const RhsFn& rhs, std::span<double> u, double t, double dt,
                 RKWorkspace& ws, std::span<const double> first_rhs) {
  if (scheme.kind != SchemeKind::ThreeSStar) throw InvalidArgument("scheme is not a 3S* scheme");
  const std::size_t n = u.size();
  ws.resize(n);
  std::span<double> s2(ws.r1.data(), n);
  std::span<double> s3(ws.r2.data(), n);
  std::span<double> k(ws.r3.data(), n);
  std::fill(s2.begin(), s2.end(), 0.0);
  std::copy(u.begin(), u.end(), s3.begin());
  for (int i = 0; i < scheme.stages(); ++i) {
    std::span<const double> f;
    if (i == 0 && !first_rhs.empty()) {
      f = first_rhs;
    } else {
      rhs(t + scheme.c[i] * dt, u, k);
      f = k;
    }
    const double g1 = scheme.gamma1[i], g2 = scheme.gamma2[i], g3 = scheme.gamma3[i];
    const double bdt = scheme.beta[i] * dt;
    const double d = scheme.delta[i];
    for (std::size_t q = 0; q < n; ++q) {
      s2[q] += d * u[q];
      u[q] = g1 * u[q] + g2 * s2[q] + g3 * s3[q] + bdt * f[q];
    }
  }
}

void rk_step(const RKScheme& scheme, const RhsFn& rhs, std::span<double> u, double t, double dt, RKWorkspace& ws,
             std::span<const double> first_rhs) {
  if (scheme.kind == SchemeKind::LowStorage2N) step_lowstorage_2n(scheme, rhs, u, t, dt, ws, first_rhs);
  else step_3sstar(scheme, rhs, u, t, dt, ws, first_rhs);
}

double max_abs_component(std::span<const double> du, int nvars, int component) {
  double m = 0.0;
  for (std::size_t q = static_cast<std::size_t>(component); q < du.size(); q += static_cast<std::size_t>(nvars)) {
    const double a = std::abs(du[q]);
    if (!(a <= m)) m = a;  // propagates NaN
  }
  return m;
}

PseudotimeResult pseudotime_steady_state(const GravitySemi& semi, std::span<double> state, double t,
                                         const PseudotimeOptions& options, RKWorkspace& ws) {
  if (!(options.tol > 0.0)) throw InvalidArgument("pseudotime tolerance must be positive");
  const RKScheme& scheme = options.scheme ? *options.scheme : ck45();
  const double dtau = stable_dt(semi, state, options.cfl);
  std::vector<double> residual(state.size());
  const RhsFn f = [&semi, t](double, std::span<const double> u, std::span<double> du) { semi.rhs(u, du, t); };

  PseudotimeResult result;
  double tau = 0.0;
  if (options.monitor == ResidualMonitor::LastStage) {
    const int last = scheme.stages();
    while (true) {
      if (result.steps >= options.max_steps)
        throw DivergenceError(fmt::format("pseudotime iteration did not reach tol {:.3e} within {} steps (residual {:.3e})",
                                          options.tol, options.max_steps, result.residual));
      int stage = 0;
      const RhsFn g = [&](double, std::span<const double> u, std::span<double> du) {
        semi.rhs(u, du, t);
        if (++stage == last) result.residual = max_abs_component(du, GravitySemi::nvars, 0);
      };
      rk_step(scheme, g, state, tau, dtau, ws);
      tau += dtau;
      ++result.steps;
      if (!std::isfinite(result.residual))
        throw DivergenceError("pseudotime residual is not finite after " + std::to_string(result.steps) + " steps");
      if (result.residual < options.tol && result.steps >= options.min_steps) return result;
    }
  }
  while (true) {
    semi.rhs(state, residual, t);
    result.residual = max_abs_component(residual, GravitySemi::nvars, 0);
    if (!std::isfinite(result.residual))
      throw DivergenceError("pseudotime residual is not finite after " + std::to_string(result.steps) + " steps");
    if (result.residual < options.tol && result.steps >= options.min_steps) return result;
    if (result.steps >= options.max_steps)
      throw DivergenceError(fmt::format("pseudotime iteration did not reach tol {:.3e} within {} steps (residual {:.3e})",
                                        options.tol, options.max_steps, result.residual));
    rk_step(scheme, f, state, tau, dtau, ws, residual);
    tau += dtau;
    ++result.steps;
  }
}

}  // namespace hgdg
