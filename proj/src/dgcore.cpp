#include "hgdg/dgcore.hpp"

#include "hgdg/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace hgdg {

namespace {

struct Legendre {
  double value;
  double derivative;
};

Legendre legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p_prev = 1.0, p = x;
  double dp_prev = 0.0, dp = 1.0;
  for (int k = 1; k < n; ++k) {
    const double p_next = ((2 * k + 1) * x * p - k * p_prev) / (k + 1);
    const double dp_next = dp_prev + (2 * k + 1) * p;
    p_prev = p;
    p = p_next;
    dp_prev = dp;
    dp = dp_next;
  }
  return {p, dp};
}

Vector barycentric_weights(const Vector& nodes) {
  const auto n = nodes.size();
  Vector lambda(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double prod = 1.0;
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != j) prod *= nodes[j] - nodes[k];
    lambda[j] = 1.0 / prod;
  }
  return lambda;
}

Vector lagrange_row_raw(const Vector& nodes, const Vector& lambda, double x) {
  const auto n = nodes.size();
  Vector row = Vector::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (x == nodes[j]) {
      row[j] = 1.0;
      return row;
    }
  }
  double denom = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    row[j] = lambda[j] / (x - nodes[j]);
    denom += row[j];
  }
  return row / denom;
}

}  // namespace

Basis lgl_basis(int degree) {
  if (degree < 1) throw InvalidArgument("LGL basis needs degree >= 1, got " + std::to_string(degree));
  const int n = degree + 1;
  Basis b;
  b.degree = degree;
  b.nodes.resize(n);
  b.weights.resize(n);

  b.nodes[0] = -1.0;
  b.nodes[n - 1] = 1.0;
  // Interior nodes: roots of P_N', Newton from Chebyshev-Lobatto points.
  for (int i = 1; i < n - 1; ++i) {
    double x = -std::cos(std::numbers::pi * i / degree);
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(degree, x);
      const double d2p = (2.0 * x * dp - degree * (degree + 1) * p) / (1.0 - x * x);
      const double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    b.nodes[i] = x;
  }
  // Symmetrize to remove round-off asymmetry.
  for (int i = 0; i < n / 2; ++i) {
    const double s = 0.5 * (b.nodes[n - 1 - i] - b.nodes[i]);
    b.nodes[i] = -s;
    b.nodes[n - 1 - i] = s;
  }
  if (n % 2 == 1) b.nodes[n / 2] = 0.0;

  for (int i = 0; i < n; ++i) {
    const double p = legendre(degree, b.nodes[i]).value;
    b.weights[i] = 2.0 / (degree * (degree + 1) * p * p);
  }

  b.barycentric = barycentric_weights(b.nodes);
  b.derivative = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      b.derivative(i, j) = (b.barycentric[j] / b.barycentric[i]) / (b.nodes[i] - b.nodes[j]);
      diag -= b.derivative(i, j);
    }
    b.derivative(i, i) = diag;
  }

  b.derivative_weak.resize(n, n);
  b.derivative_split.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      b.derivative_weak(i, k) = b.weights[k] * b.derivative(k, i) / b.weights[i];
      b.derivative_split(i, k) = 2.0 * b.derivative(i, k);
    }
  }
  // M^{-1} B with B = diag(-1, 0, ..., 0, 1)
  b.derivative_split(0, 0) += 1.0 / b.weights[0];
  b.derivative_split(n - 1, n - 1) -= 1.0 / b.weights[n - 1];

  Matrix vandermonde(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      vandermonde(i, j) = std::sqrt((2.0 * j + 1.0) / 2.0) * legendre(j, b.nodes[i]).value;
  b.inverse_vandermonde = vandermonde.partialPivLu().inverse();
  return b;
}

void gauss_legendre(int n, Vector& nodes, Vector& weights) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre needs at least one point");
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    Legendre p{};
    for (int it = 0; it < 100; ++it) {
      p = legendre(n, x);
      const double dx = p.value / p.derivative;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    p = legendre(n, x);
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * p.derivative * p.derivative);
  }
}

Vector lagrange_row(const Basis& basis, double x) {
  return lagrange_row_raw(basis.nodes, basis.barycentric, x);
}

std::vector<double> interpolate_nodal(const Basis& basis, std::span<const double> values,
                                      std::span<const double> targets) {
  if (targets.empty()) throw InvalidArgument("interpolate_nodal: no target points");
  if (static_cast<int>(values.size()) != basis.n_nodes())
    throw InvalidArgument("interpolate_nodal: expected " + std::to_string(basis.n_nodes()) + " values");
  std::vector<double> out;
  out.reserve(targets.size());
  for (double x : targets) {
    if (!(x >= -1.0 && x <= 1.0))
      throw InvalidArgument("interpolate_nodal: target " + std::to_string(x) + " outside [-1, 1]");
    const Vector row = lagrange_row(basis, x);
    double acc = 0.0;
    for (int j = 0; j < basis.n_nodes(); ++j) acc += row[j] * values[j];
    out.push_back(acc);
  }
  return out;
}

TransferOperators transfer_operators(const Basis& basis) {
  const int n = basis.n_nodes();
  TransferOperators t;
  t.forward_lower.resize(n, n);
  t.forward_upper.resize(n, n);
  for (int i = 0; i < n; ++i) {
    t.forward_lower.row(i) = lagrange_row(basis, 0.5 * (basis.nodes[i] - 1.0)).transpose();
    t.forward_upper.row(i) = lagrange_row(basis, 0.5 * (basis.nodes[i] + 1.0)).transpose();
  }

  Vector gx, gw;
  gauss_legendre(n, gx, gw);
  Matrix mass = Matrix::Zero(n, n);
  Matrix mixed_lower = Matrix::Zero(n, n);
  Matrix mixed_upper = Matrix::Zero(n, n);
  for (int g = 0; g < n; ++g) {
    const Vector full = lagrange_row(basis, gx[g]);
    const Vector lower = lagrange_row(basis, 0.5 * (gx[g] - 1.0));
    const Vector upper = lagrange_row(basis, 0.5 * (gx[g] + 1.0));
    mass += gw[g] * full * full.transpose();
    mixed_lower += gw[g] * lower * full.transpose();
    mixed_upper += gw[g] * upper * full.transpose();
  }
  const auto lu = mass.partialPivLu();
  t.reverse_lower = 0.5 * lu.solve(mixed_lower);
  t.reverse_upper = 0.5 * lu.solve(mixed_upper);
  return t;
}

std::shared_ptr<const DGOperators> dg_operators(int degree) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const DGOperators>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[degree];
  if (!slot) {
    auto ops = std::make_shared<DGOperators>();
    ops->basis = lgl_basis(degree);
    ops->transfer = transfer_operators(ops->basis);
    slot = std::move(ops);
  }
  return slot;
}

void apply_tensor(const Matrix& op_x, const Matrix& op_y, std::span<const double> in,
                  std::span<double> out, int nvars) {
  const int n = static_cast<int>(op_x.rows());
  std::vector<double> tmp(static_cast<std::size_t>(n * n * nvars), 0.0);
  // x-direction
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const double a = op_x(i, k);
        for (int v = 0; v < nvars; ++v) tmp[(j * n + i) * nvars + v] += a * in[(j * n + k) * nvars + v];
      }
  // y-direction
  for (std::size_t q = 0; q < out.size(); ++q) out[q] = 0.0;
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      const double a = op_y(j, l);
      for (int i = 0; i < n; ++i)
        for (int v = 0; v < nvars; ++v) out[(j * n + i) * nvars + v] += a * tmp[(l * n + i) * nvars + v];
    }
}

void refine_element(const TransferOperators& ops, int child, std::span<const double> parent,
                    std::span<double> out, int nvars) {
  apply_tensor(ops.forward(child & 1), ops.forward((child >> 1) & 1), parent, out, nvars);
}

void coarsen_element(const TransferOperators& ops, std::span<const std::span<const double>, 4> children,
                     std::span<double> out, int nvars) {
  std::vector<double> part(out.size());
  for (auto& v : out) v = 0.0;
  for (int c = 0; c < 4; ++c) {
    apply_tensor(ops.reverse(c & 1), ops.reverse((c >> 1) & 1), children[c], part, nvars);
    for (std::size_t q = 0; q < out.size(); ++q) out[q] += part[q];
  }
}

}  // namespace hgdg
