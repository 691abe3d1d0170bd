#include "hgdg/coupling.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hgdg;
using std::numbers::pi;

namespace {

Field smooth_euler(const DGMesh& mesh, const CompressibleEuler& eq, double amp = 0.1) {
  return sample(mesh, 4, [&](double x, double y, double* out) {
    const auto u = eq.prim2cons({1.0 + amp * std::sin(2 * pi * x) * std::cos(2 * pi * y), 0.2, -0.1,
                                 1.0 + 0.5 * amp * std::cos(2 * pi * (x - y))});
    for (int v = 0; v < 4; ++v) out[v] = u[v];
  });
}

double domain_integral(const DGMesh& mesh, const Field& f, int var) { return integrate(mesh, f)[var]; }

}  // namespace

TEST_CASE("zero gravity reproduces the uncoupled Euler solver") {
  const auto mesh = testutil::uniform_mesh(2, 3);
  const CompressibleEuler eq(1.4);
  const Field u0 = smooth_euler(mesh, eq);

  EulerSemi plain(mesh, eq, FluxKind::Hll);
  Field reference = u0;
  RKWorkspace ws;
  const RhsFn f = [&](double t, std::span<const double> u, std::span<double> du) { plain.rhs(u, du, t); };
  const double dt = stable_dt(plain, u0.span(), 0.5);
  for (int k = 0; k < 4; ++k) rk_step(ck45(), f, reference.span(), k * dt, dt, ws);

  for (auto strategy : {CouplingStrategy::PerStage, CouplingStrategy::PerStep}) {
    EulerSemi euler(mesh, eq, FluxKind::Hll);
    GravitySemi gravity(mesh, HyperbolicDiffusion{}, FluxKind::Llf);
    CouplingConfig cfg;
    cfg.G = 0.0;
    cfg.strategy = strategy;
    CoupledSystem sys(euler, gravity, u0, Field(mesh.n_elements(), mesh.n_nodes(), 3), cfg);
    for (int k = 0; k < 4; ++k) sys.advance(k * dt, dt);
    CHECK(sys.euler_state().values() == reference.values());
    CHECK(testutil::max_abs(sys.gravity_state().values()) == 0.0);
  }
}

TEST_CASE("uniform background density is an equilibrium") {
  const auto mesh = testutil::uniform_mesh(2, 3);
  const CompressibleEuler eq(5.0 / 3.0);
  const auto c = eq.prim2cons({2.0, 0.0, 0.0, 1.0});
  const Field u0 = sample(mesh, 4, [&](double, double, double* out) {
    for (int v = 0; v < 4; ++v) out[v] = c[v];
  });
  for (auto strategy : {CouplingStrategy::PerStage, CouplingStrategy::PerStep}) {
    EulerSemi euler(mesh, eq, FluxKind::Hll);
    GravitySemi gravity(mesh, HyperbolicDiffusion{}, FluxKind::Llf);
    CouplingConfig cfg;
    cfg.G = 1.0;
    cfg.rho_background = 2.0;
    cfg.strategy = strategy;
    cfg.monitor = ResidualMonitor::CurrentState;
    CoupledSystem sys(euler, gravity, u0, Field(mesh.n_elements(), mesh.n_nodes(), 3), cfg);
    const double dt = sys.stable_dt();
    for (int k = 0; k < 3; ++k) sys.advance(k * dt, dt);
    CHECK(sys.stats().total_subcycles == 0);
    CHECK(testutil::max_abs(sys.gravity_state().values()) == 0.0);
    double drift = 0.0;
    for (std::size_t k = 0; k < u0.values().size(); ++k)
      drift = std::max(drift, std::abs(sys.euler_state().values()[k] - u0.values()[k]));
    CHECK(drift < 1e-13);
  }
}

TEST_CASE("source wiring is nodewise") {
  const auto mesh = testutil::uniform_mesh(1, 3);
  const CompressibleEuler eq(1.4);
  const Field u = smooth_euler(mesh, eq, 0.3);
  EulerSemi euler(mesh, eq, FluxKind::Hll);
  GravitySemi gravity(mesh, HyperbolicDiffusion{}, FluxKind::Llf);
  EulerSemi plain_e(mesh, eq, FluxKind::Hll);
  GravitySemi plain_g(mesh, HyperbolicDiffusion{}, FluxKind::Llf);

  Field g(mesh.n_elements(), mesh.n_nodes(), 3);
  for (std::size_t k = 0; k < g.values().size(); ++k) g.values()[k] = std::sin(0.37 * static_cast<double>(k));
  // background = mean density, so the periodic Poisson problem is solvable
  const double rho_bg = integrate(mesh, u)[0] / mesh.area();
  CouplingConfig cfg;
  cfg.G = 0.5;
  cfg.rho_background = rho_bg;
  CoupledSystem sys(euler, gravity, u, g, cfg);

  Field a(u), b(u);
  euler.rhs(u, a, 0.0);
  plain_e.rhs(u, b, 0.0);
  for (std::size_t e = 0; e < mesh.n_elements(); ++e)
    for (int j = 0; j < mesh.n_nodes(); ++j)
      for (int i = 0; i < mesh.n_nodes(); ++i) {
        const double* uu = u.node(e, i, j);
        const double* gg = g.node(e, i, j);
        const auto s = CompressibleEuler::gravity_source({uu[0], uu[1], uu[2], uu[3]}, gg[1], gg[2]);
        for (int v = 0; v < 4; ++v) CHECK(a.node(e, i, j)[v] - b.node(e, i, j)[v] == doctest::Approx(s[v]));
      }

  // The forcing reads the density handed to the last solve.
  sys.converge_gravity(u.span(), 0.0);
  const Field gs = sys.gravity_state();
  Field c(gs), d(gs);
  gravity.rhs(gs, c, 0.0);
  plain_g.rhs(gs, d, 0.0);
  for (std::size_t e = 0; e < mesh.n_elements(); ++e)
    for (int j = 0; j < mesh.n_nodes(); ++j)
      for (int i = 0; i < mesh.n_nodes(); ++i)
        CHECK(c.node(e, i, j)[0] - d.node(e, i, j)[0] ==
              doctest::Approx(-4.0 * pi * 0.5 * (u.node(e, i, j)[0] - rho_bg)));
}

TEST_CASE("coupled periodic run conserves mass and counts solves per strategy") {
  const auto mesh = testutil::uniform_mesh(2, 3);
  const CompressibleEuler eq(1.4);
  const Field u0 = smooth_euler(mesh, eq, 0.2);
  const double mass0 = domain_integral(mesh, u0, 0);
  double rho_mean = mass0 / mesh.area();
  for (auto strategy : {CouplingStrategy::PerStage, CouplingStrategy::PerStep}) {
    EulerSemi euler(mesh, eq, FluxKind::Hll);
    GravitySemi gravity(mesh, HyperbolicDiffusion{}, FluxKind::Llf);
    CouplingConfig cfg;
    cfg.G = 0.1;
    cfg.rho_background = rho_mean;
    cfg.tol = 1e-8;
    cfg.strategy = strategy;
    cfg.gravity_scheme = &rk3sstar();
    cfg.cfl_gravity = 1.0;
    CoupledSystem sys(euler, gravity, u0, Field(mesh.n_elements(), mesh.n_nodes(), 3), cfg);
    const int steps = 3;
    double t = 0.0;
    for (int k = 0; k < steps; ++k) {
      const double dt = sys.stable_dt();
      sys.advance(t, dt);
      t += dt;
    }
    CHECK(domain_integral(mesh, sys.euler_state(), 0) == doctest::Approx(mass0).epsilon(1e-13));
    const std::size_t expect = strategy == CouplingStrategy::PerStage ? 5 * steps : steps;
    CHECK(sys.stats().gravity_solves == expect);
    std::size_t hist_solves = 0, hist_cycles = 0;
    for (auto [cycles, freq] : sys.stats().histogram) {
      hist_solves += freq;
      hist_cycles += cycles * freq;
    }
    CHECK(hist_solves == expect);
    CHECK(hist_cycles == sys.stats().total_subcycles);
    // the warm start makes later solves much cheaper than the first one
    CHECK(sys.stats().histogram.rbegin()->second == 1);
  }
}

TEST_CASE("coupling validation") {
  const auto a = testutil::uniform_mesh(1, 3);
  const auto b = testutil::uniform_mesh(1, 3);
  const CompressibleEuler eq(1.4);
  EulerSemi euler(a, eq, FluxKind::Hll);
  GravitySemi gravity(b, HyperbolicDiffusion{}, FluxKind::Llf);
  const Field u = smooth_euler(a, eq);
  CHECK_THROWS_AS(CoupledSystem(euler, gravity, u, Field(a.n_elements(), a.n_nodes(), 3), CouplingConfig{}),
                  InvalidArgument);
  GravitySemi same(a, HyperbolicDiffusion{}, FluxKind::Llf);
  CHECK_THROWS_AS(CoupledSystem(euler, same, u, Field(1, a.n_nodes(), 3), CouplingConfig{}), InvalidArgument);
  CHECK(parse_coupling_strategy("per_step") == CouplingStrategy::PerStep);
  CHECK(to_string(CouplingStrategy::PerStage) == "per_stage");
  CHECK_THROWS_AS(parse_coupling_strategy("sometimes"), InvalidArgument);
}
