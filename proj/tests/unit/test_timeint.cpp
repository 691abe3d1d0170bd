#include "hgdg/harness.hpp"
#include "hgdg/timeint.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

using namespace hgdg;

namespace {

/// Integrates u' = lambda u to t_end with n equal steps.
double integrate_linear(const RKScheme& s, double lambda, double t_end, int n) {
  std::vector<double> u{1.0};
  RKWorkspace ws;
  const RhsFn f = [lambda](double, std::span<const double> x, std::span<double> dx) { dx[0] = lambda * x[0]; };
  const double dt = t_end / n;
  for (int k = 0; k < n; ++k) rk_step(s, f, u, k * dt, dt, ws);
  return u[0];
}

double observed_order(const RKScheme& s, double lambda, double t_end, int n) {
  const double exact = std::exp(lambda * t_end);
  const double e1 = std::abs(integrate_linear(s, lambda, t_end, n) - exact);
  const double e2 = std::abs(integrate_linear(s, lambda, t_end, 2 * n) - exact);
  return std::log2(e1 / e2);
}

/// Hypdiff manufactured problem on a uniform level-2 mesh, ready for pseudotime.
struct PoissonSetup {
  TestCase tc = hypdiff_manufactured();
  DGMesh mesh{Quadtree::create_uniform({0, 0}, {1, 1}, 2, {false, true}), 3};
  GravitySemi semi{mesh, HyperbolicDiffusion{}, FluxKind::Llf};

  PoissonSetup() {
    semi.set_boundary_all([this](double x, double y, double t) { return tc.gravity_exact(x, y, t); });
    const DGMesh* m = &mesh;
    semi.add_source([m, this](std::span<const double>, double t, std::span<double> du) {
      const int n = m->n_nodes();
      for (std::size_t e = 0; e < m->n_elements(); ++e)
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) du[((e * n + j) * n + i) * 3] += tc.gravity_forcing(m->node_x(e, i), m->node_y(e, j), t);
    });
  }
  Field constant(double v) const { return Field(mesh.n_elements(), mesh.n_nodes(), 3, v); }
};

}  // namespace

TEST_CASE("RK3S* coefficients match the published table") {
  const auto& s = rk3sstar();
  REQUIRE(s.stages() == 5);
  CHECK(s.gamma1[1] == std::stod("5.2656474556752575E-01"));
  CHECK(s.gamma2[2] == std::stod("-2.7595818152587825E-02"));
  CHECK(s.gamma3[4] == std::stod("-5.4537881202277507E-03"));
  CHECK(s.delta[3] == std::stod("9.9687218193685878E-01"));
  CHECK(s.beta[0] == std::stod("4.5158640252832094E-01"));
  CHECK(s.c[4] == std::stod("7.1581334196229851E-01"));
  CHECK(&scheme_by_name("rk3s*") == &s);
  CHECK(&scheme_by_name("rk3sstar") == &s);
  CHECK(&scheme_by_name("ck45") == &ck45());
  CHECK_THROWS_AS(scheme_by_name("rk4"), InvalidArgument);
}

TEST_CASE("zero right-hand side is a fixed point and u' = 1 advances by dt") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> d(-10, 10);
  for (const RKScheme* s : {&ck45(), &rk3sstar()}) {
    CAPTURE(s->name);
    std::vector<double> u(64), u0;
    for (auto& x : u) x = d(rng);
    u0 = u;
    RKWorkspace ws;
    const RhsFn zero = [](double, std::span<const double>, std::span<double> du) {
      for (auto& x : du) x = 0.0;
    };
    rk_step(*s, zero, u, 0.0, 0.37, ws);
    for (std::size_t k = 0; k < u.size(); ++k) CHECK(std::abs(u[k] - u0[k]) <= 1e-14 * std::abs(u0[k]));

    const RhsFn one = [](double, std::span<const double>, std::span<double> du) {
      for (auto& x : du) x = 1.0;
    };
    rk_step(*s, one, u, 0.0, 0.37, ws);
    for (std::size_t k = 0; k < u.size(); ++k) CHECK(u[k] == doctest::Approx(u0[k] + 0.37).epsilon(1e-14));

    // u' = t checks the stage times. The published CK45 c_3 is off its row
    // sum by 4.2e-8, which shows up at the 1e-9 level here.
    std::vector<double> v{0.0};
    const RhsFn time = [](double t, std::span<const double>, std::span<double> du) { du[0] = t; };
    rk_step(*s, time, v, 1.0, 0.5, ws);
    CHECK(std::abs(v[0] - 0.625) < (s == &ck45() ? 1e-9 : 1e-14));
  }
  CHECK_THROWS_AS(step_3sstar(ck45(), {}, std::span<double>{}, 0, 1, *std::make_unique<RKWorkspace>()), InvalidArgument);
}

TEST_CASE("CK45 single step accuracy and fourth order") {
  CHECK(std::abs(integrate_linear(ck45(), -1.0, 0.1, 1) - std::exp(-0.1)) < 1e-7);
  const double p = observed_order(ck45(), -1.0, 1.0, 10);
  CHECK(p > 3.8);
  CHECK(p < 4.3);
}

TEST_CASE("RK3S* is second order") {
  const double p = observed_order(rk3sstar(), -2.0, 1.0, 20);
  CHECK(p > 1.9);
  CHECK(p < 2.2);
}

TEST_CASE("linear stability along the negative real axis") {
  for (const RKScheme* s : {&ck45(), &rk3sstar()}) {
    // well inside both stability intervals
    const double z = -2.0;
    std::vector<double> u{1.0};
    RKWorkspace ws;
    const RhsFn f = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; };
    double prev = 1.0;
    for (int k = 0; k < 500; ++k) {
      rk_step(*s, f, u, 0.0, -z, ws);
      CHECK(std::abs(u[0]) <= prev);
      prev = std::abs(u[0]);
    }
  }
}

TEST_CASE("stable time step") {
  const auto mesh = testutil::uniform_mesh(2, 3);
  const GravitySemi grav(mesh, HyperbolicDiffusion{}, FluxKind::Llf);
  const Field g(mesh.n_elements(), mesh.n_nodes(), 3);
  CHECK(stable_dt(grav, g.span(), 0.5) == doctest::Approx(4.9736e-3).epsilon(1e-4));
  CHECK_THROWS_AS(stable_dt(grav, g.span(), 0.0), InvalidArgument);

  const CompressibleEuler eq(1.4);
  const auto one = testutil::uniform_mesh(0, 3);
  const EulerSemi euler(one, eq, FluxKind::Hll);
  const auto c = eq.prim2cons({1, 0, 0, 1});
  Field u = sample(one, 4, [&](double, double, double* out) {
    for (int v = 0; v < 4; ++v) out[v] = c[v];
  });
  CHECK(stable_dt(euler, u.span(), 1.0) == doctest::Approx(0.2113).epsilon(1e-4));

  const auto fine = testutil::uniform_mesh(1, 3);
  const EulerSemi euler_fine(fine, eq, FluxKind::Hll);
  Field uf = sample(fine, 4, [&](double, double, double* out) {
    for (int v = 0; v < 4; ++v) out[v] = c[v];
  });
  CHECK(stable_dt(euler_fine, uf.span(), 1.0) == doctest::Approx(0.5 * stable_dt(euler, u.span(), 1.0)));

  const GravitySemi frozen(mesh, HyperbolicDiffusion(RelaxationParams{1.0, 1.0, 1.0, 0.0}), FluxKind::Llf);
  CHECK_THROWS_AS(stable_dt(frozen, g.span(), 0.5), InvalidArgument);
}

TEST_CASE("pseudotime steady state") {
  PoissonSetup p;
  RKWorkspace ws;
  PseudotimeOptions opt;
  opt.tol = 1e-10;

  SUBCASE("published step counts on the coarsest mesh, unit initial guess") {
    Field u = p.constant(1.0);
    opt.scheme = &ck45();
    opt.cfl = 0.5;
    CHECK(pseudotime_steady_state(p.semi, u.span(), 0.0, opt, ws).steps == 793);
    Field w = p.constant(1.0);
    opt.scheme = &rk3sstar();
    opt.cfl = 1.0;
    const auto r = pseudotime_steady_state(p.semi, w.span(), 0.0, opt, ws);
    CHECK(r.steps == 397);
    CHECK(r.residual < 1e-10);
    // both schemes reach the same discrete steady state
    double diff = 0.0;
    for (std::size_t k = 0; k < u.values().size(); ++k) diff = std::max(diff, std::abs(u.values()[k] - w.values()[k]));
    CHECK(diff < 1e-9);
  }

  SUBCASE("converged input: zero steps with the current-state monitor") {
    Field u = p.constant(0.0);
    pseudotime_steady_state(p.semi, u.span(), 0.0, opt, ws);
    const Field before = u;
    opt.monitor = ResidualMonitor::CurrentState;
    auto r = pseudotime_steady_state(p.semi, u.span(), 0.0, opt, ws);
    CHECK(r.steps == 0);
    CHECK(u.values() == before.values());
    opt.monitor = ResidualMonitor::LastStage;
    r = pseudotime_steady_state(p.semi, u.span(), 0.0, opt, ws);
    CHECK(r.steps == 1);
    CHECK(r.residual < 1e-10);
  }

  SUBCASE("iteration cap") {
    Field u = p.constant(0.0);
    opt.max_steps = 5;
    CHECK_THROWS_AS(pseudotime_steady_state(p.semi, u.span(), 0.0, opt, ws), DivergenceError);
  }

  SUBCASE("monitor names") {
    CHECK(parse_residual_monitor("current_state") == ResidualMonitor::CurrentState);
    CHECK(to_string(ResidualMonitor::LastStage) == "last_stage");
    CHECK_THROWS_AS(parse_residual_monitor("first"), InvalidArgument);
  }
}
