#pragma once

#include "hgdg/dgmesh.hpp"
#include "hgdg/euler.hpp"
#include "hgdg/hypdiff.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hgdg {

using EulerFn = std::function<EulerState(double x, double y, double t)>;
using GravityFn = std::function<HypDiffState(double x, double y, double t)>;
using ScalarFn = std::function<double(double x, double y, double t)>;

/// Parameters of the linear Jeans perturbation.
struct JeansParams {
  double rho0 = 1.5e7;
  double p0 = 1.5e7;
  double delta0 = 1e-3;
  double k = 4.0 * 3.14159265358979323846;
  double gamma = 5.0 / 3.0;
  double G = 6.674e-8;
  double area = 1.0;

  double sound_speed() const;
  /// Jeans wave number sqrt(4 pi G rho0) / c0.
  double jeans_wavenumber() const;
  /// Oscillation frequency from omega^2 = c0^2 k^2 - 4 pi G rho0.
  /// Throws InvalidArgument in the unstable regime k <= k_J.
  double omega() const;
};

/// Linear-theory bulk energies of the Jeans oscillation.
struct JeansEnergies {
  double kinetic;
  /// E_int(t) - E_int(0)
  double internal_deviation;
  double potential;
};
JeansEnergies jeans_analytic_energies(double t, const JeansParams& params, double phi_mean);

/// One experiment: domain, physics, initial/exact data and extra sources.
///
/// Empty functions mean "not present". Boundary functions are only used on
/// non-periodic axes.
struct TestCase {
  std::string name;
  double domain_min = 0.0;
  double domain_max = 1.0;
  std::array<bool, 2> periodic{true, true};
  double gamma = 1.4;

  bool has_euler = false;
  bool has_gravity = false;

  EulerFn euler_initial;
  EulerFn euler_exact;
  EulerFn euler_boundary;
  /// Analytic residual added to the Euler right-hand side.
  EulerFn euler_source;

  GravityFn gravity_initial;
  GravityFn gravity_exact;
  GravityFn gravity_boundary;
  /// Analytic forcing added to the first gravity equation.
  ScalarFn gravity_forcing;

  double G = 0.0;
  double rho_background = 0.0;
  double nu = 1.0;
  double relaxation_length = 1.0 / (2.0 * 3.14159265358979323846);

  std::optional<JeansParams> jeans;
};

TestCase euler_manufactured();
TestCase hypdiff_manufactured();
TestCase coupled_manufactured();
TestCase jeans_case();

struct SedovParams {
  double energy = 1.0;
  double p_ambient = 1e-5;
  double rho_inner = 1.0;
  double rho_ambient = 1e-5;
  double r_rho = 1.0;
  double steepness = 150.0;
  double gamma = 1.4;
  double G = 6.674e-8;
  /// r_ini = factor * h_initial
  double r_ini_factor = 4.0;
};

/// Throws InvalidArgument for h_initial <= 0.
TestCase sedov_selfgrav_case(double h_initial, const SedovParams& params = {});
/// inner + (outer - inner) / (1 + exp(-2 k (r - r0)))
double logistic_blend(double r, double r0, double inner, double outer, double k);

/// Looks up a case by name: euler_manufactured, hypdiff_manufactured,
/// coupled_manufactured, jeans, sedov (with h_initial).
TestCase make_case(const std::string& name, double sedov_h_initial = 0.03125);

/// sqrt(sum_e sum_ij w_i w_j J^2 (U - u)^2 / |Omega|) per variable.
std::vector<double> l2_error(const DGMesh& mesh, const Field& state,
                             const std::function<void(double x, double y, double* out)>& exact);

struct EocReport {
  /// pairs[p][v]: order between resolution p and p + 1
  std::vector<std::vector<double>> pairs;
  std::vector<double> average;
};

/// errors[r][v] at mesh sizes h[r]. Throws InvalidArgument unless h is
/// strictly decreasing with at least two entries.
EocReport eoc(const std::vector<std::vector<double>>& errors, const std::vector<double>& h);

struct BulkEnergies {
  double kinetic;
  double internal;
  double potential;
};
BulkEnergies bulk_energies(const DGMesh& mesh, const Field& euler, const Field& gravity, double gamma);

}  // namespace hgdg
