#include "hgdg/harness.hpp"

#include "hgdg/errors.hpp"

#include <cmath>
#include <numbers>

namespace hgdg {

namespace {
constexpr double kPi = std::numbers::pi;
}

double JeansParams::sound_speed() const { return std::sqrt(gamma * p0 / rho0); }

double JeansParams::jeans_wavenumber() const { return std::sqrt(4.0 * kPi * G * rho0) / sound_speed(); }

double JeansParams::omega() const {
  const double c0 = sound_speed();
  const double w2 = c0 * c0 * k * k - 4.0 * kPi * G * rho0;
  if (!(w2 > 0.0)) throw InvalidArgument("Jeans perturbation is unstable (k <= k_J)");
  return std::sqrt(w2);
}

JeansEnergies jeans_analytic_energies(double t, const JeansParams& p, double phi_mean) {
  const double w = p.omega();
  const double s = std::sin(w * t);
  const double c = std::cos(w * t);
  const double amp = p.delta0 * p.rho0;
  const double kinetic = p.area * p.rho0 * p.delta0 * p.delta0 * w * w * s * s / (4.0 * p.k * p.k);
  const double field = p.area * kPi * p.G * amp * amp / (p.k * p.k);
  return {kinetic, -kinetic - field * s * s, p.area * p.rho0 * phi_mean - 2.0 * field * c * c};
}

double logistic_blend(double r, double r0, double inner, double outer, double k) {
  return inner + (outer - inner) / (1.0 + std::exp(-2.0 * k * (r - r0)));
}

TestCase euler_manufactured() {
  TestCase tc;
  tc.name = "euler_manufactured";
  tc.domain_min = 0.0;
  tc.domain_max = 2.0;
  tc.periodic = {true, true};
  tc.gamma = 2.0;
  tc.has_euler = true;
  const CompressibleEuler eq(tc.gamma);
  tc.euler_exact = [eq](double x, double y, double t) {
    const double rho = 2.0 + 0.1 * std::sin(kPi * (x + y - t));
    return eq.prim2cons({rho, 1.0, 1.0, rho * rho / kPi});
  };
  tc.euler_initial = [f = tc.euler_exact](double x, double y, double) { return f(x, y, 0.0); };
  tc.euler_source = [](double x, double y, double t) {
    const double rho = 2.0 + 0.1 * std::sin(kPi * (x + y - t));
    const double c = 0.1 * kPi * std::cos(kPi * (x + y - t));
    const double m = c * (1.0 + 2.0 * rho / kPi);
    return EulerState{c, m, m, c * (1.0 + 6.0 * rho / kPi)};
  };
  return tc;
}

TestCase hypdiff_manufactured() {
  TestCase tc;
  tc.name = "hypdiff_manufactured";
  tc.domain_min = 0.0;
  tc.domain_max = 1.0;
  tc.periodic = {false, true};
  tc.has_gravity = true;
  tc.gravity_exact = [](double x, double y, double) {
    return HypDiffState{2.0 + 2.0 * std::cos(kPi * x) * std::sin(2.0 * kPi * y),
                        -2.0 * kPi * std::sin(kPi * x) * std::sin(2.0 * kPi * y),
                        4.0 * kPi * std::cos(kPi * x) * std::cos(2.0 * kPi * y)};
  };
  tc.gravity_boundary = tc.gravity_exact;
  // Unit initial guess for all three variables.
  tc.gravity_initial = [](double, double, double) { return HypDiffState{1.0, 1.0, 1.0}; };
  tc.gravity_forcing = [](double x, double y, double) {
    return 10.0 * kPi * kPi * std::cos(kPi * x) * std::sin(2.0 * kPi * y);
  };
  return tc;
}

TestCase coupled_manufactured() {
  TestCase tc = euler_manufactured();
  tc.name = "coupled_manufactured";
  tc.has_gravity = true;
  tc.G = 1.0;
  tc.rho_background = 0.0;
  tc.euler_source = [](double x, double y, double t) {
    const double rho = 2.0 + 0.1 * std::sin(kPi * (x + y - t));
    const double c = 0.1 * kPi * std::cos(kPi * (x + y - t));
    return EulerState{c, c, c, c * (1.0 + 2.0 * rho / kPi)};
  };
  tc.gravity_exact = [](double x, double y, double t) {
    const double arg = kPi * (x + y - t);
    const double q = -0.2 * std::cos(arg);
    return HypDiffState{-(2.0 / kPi) * 0.1 * std::sin(arg), q, q};
  };
  tc.gravity_initial = [f = tc.gravity_exact](double x, double y, double) { return f(x, y, 0.0); };
  tc.gravity_forcing = [](double, double, double) { return 8.0 * kPi; };
  return tc;
}

TestCase jeans_case() {
  TestCase tc;
  tc.name = "jeans";
  tc.domain_min = 0.0;
  tc.domain_max = 1.0;
  tc.periodic = {true, true};
  JeansParams jp;
  tc.gamma = jp.gamma;
  tc.has_euler = true;
  tc.has_gravity = true;
  tc.G = jp.G;
  tc.rho_background = jp.rho0;
  tc.jeans = jp;
  const CompressibleEuler eq(tc.gamma);
  tc.euler_initial = [eq, jp](double x, double, double) {
    const double c = std::cos(jp.k * x);
    return eq.prim2cons({jp.rho0 * (1.0 + jp.delta0 * c), 0.0, 0.0, jp.p0 * (1.0 + jp.gamma * jp.delta0 * c)});
  };
  tc.gravity_initial = [jp](double, double, double) { return HypDiffState{jp.delta0 * jp.rho0, 0.0, 0.0}; };
  return tc;
}

TestCase sedov_selfgrav_case(double h_initial, const SedovParams& sp) {
  if (!(h_initial > 0.0)) throw InvalidArgument("sedov: h_initial must be positive");
  TestCase tc;
  tc.name = "sedov";
  tc.domain_min = -4.0;
  tc.domain_max = 4.0;
  tc.periodic = {false, false};
  tc.gamma = sp.gamma;
  tc.has_euler = true;
  tc.has_gravity = true;
  tc.G = sp.G;
  const CompressibleEuler eq(tc.gamma);
  const double r_ini = sp.r_ini_factor * h_initial;
  const double p_ini = (sp.gamma - 1.0) * sp.energy / (kPi * r_ini);
  tc.euler_initial = [eq, sp, r_ini, p_ini](double x, double y, double) {
    const double r = std::hypot(x, y);
    const double rho = logistic_blend(r, sp.r_rho, sp.rho_inner, sp.rho_ambient, sp.steepness);
    const double p = logistic_blend(r, r_ini, p_ini, sp.p_ambient, sp.steepness);
    return eq.prim2cons({rho, 0.0, 0.0, p});
  };
  const EulerState ambient = eq.prim2cons({sp.rho_ambient, 0.0, 0.0, sp.p_ambient});
  tc.euler_boundary = [ambient](double, double, double) { return ambient; };
  tc.gravity_initial = [](double, double, double) { return HypDiffState{0.0, 0.0, 0.0}; };
  tc.gravity_boundary = tc.gravity_initial;
  return tc;
}

TestCase make_case(const std::string& name, double sedov_h_initial) {
  if (name == "euler_manufactured") return euler_manufactured();
  if (name == "hypdiff_manufactured") return hypdiff_manufactured();
  if (name == "coupled_manufactured") return coupled_manufactured();
  if (name == "jeans") return jeans_case();
  if (name == "sedov") return sedov_selfgrav_case(sedov_h_initial);
  throw InvalidArgument("unknown experiment '" + name + "'");
}

std::vector<double> l2_error(const DGMesh& mesh, const Field& state,
                             const std::function<void(double x, double y, double* out)>& exact) {
  if (state.n_elements() != mesh.n_elements() || state.n_nodes() != mesh.n_nodes())
    throw InvalidArgument("l2_error: field does not match mesh");
  const int nv = state.nvars();
  const int n = mesh.n_nodes();
  const auto& w = mesh.basis().weights;
  std::vector<double> sum(static_cast<std::size_t>(nv), 0.0);
  std::vector<double> ref(static_cast<std::size_t>(nv));
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const double jac2 = mesh.jacobian(e) * mesh.jacobian(e);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        exact(mesh.node_x(e, i), mesh.node_y(e, j), ref.data());
        const double* u = state.node(e, i, j);
        for (int v = 0; v < nv; ++v) sum[v] += w[i] * w[j] * jac2 * (u[v] - ref[v]) * (u[v] - ref[v]);
      }
  }
  for (auto& s : sum) s = std::sqrt(s / mesh.area());
  return sum;
}

EocReport eoc(const std::vector<std::vector<double>>& errors, const std::vector<double>& h) {
  if (errors.size() != h.size()) throw InvalidArgument("eoc: need one error row per resolution");
  if (h.size() < 2) throw InvalidArgument("eoc: need at least two resolutions");
  for (std::size_t r = 1; r < h.size(); ++r)
    if (!(h[r] < h[r - 1])) throw InvalidArgument("eoc: resolutions must be strictly refining");
  const std::size_t nv = errors.front().size();
  EocReport rep;
  rep.average.assign(nv, 0.0);
  for (std::size_t r = 1; r < h.size(); ++r) {
    if (errors[r].size() != nv || errors[r - 1].size() != nv)
      throw InvalidArgument("eoc: inconsistent variable count");
    std::vector<double> row(nv);
    for (std::size_t v = 0; v < nv; ++v) {
      row[v] = std::log(errors[r - 1][v] / errors[r][v]) / std::log(h[r - 1] / h[r]);
      rep.average[v] += row[v];
    }
    rep.pairs.push_back(std::move(row));
  }
  for (auto& a : rep.average) a /= static_cast<double>(rep.pairs.size());
  return rep;
}

BulkEnergies bulk_energies(const DGMesh& mesh, const Field& euler, const Field& gravity, double gamma) {
  if (euler.n_elements() != mesh.n_elements() || gravity.n_elements() != mesh.n_elements() ||
      euler.nvars() != 4 || gravity.nvars() != 3)
    throw InvalidArgument("bulk_energies: fields do not match mesh");
  const CompressibleEuler eq(gamma);
  const int n = mesh.n_nodes();
  const auto& w = mesh.basis().weights;
  BulkEnergies b{0.0, 0.0, 0.0};
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const double jac2 = mesh.jacobian(e) * mesh.jacobian(e);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double* u = euler.node(e, i, j);
        const EulerState s{u[0], u[1], u[2], u[3]};
        const double wq = w[i] * w[j] * jac2;
        const double kin = 0.5 * (s[1] * s[1] + s[2] * s[2]) / s[0];
        b.kinetic += wq * kin;
        b.internal += wq * eq.pressure(s) / (gamma - 1.0);
        b.potential += wq * s[0] * gravity.node(e, i, j)[0];
      }
  }
  return b;
}

}  // namespace hgdg
