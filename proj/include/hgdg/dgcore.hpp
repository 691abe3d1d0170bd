#pragma once

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

namespace hgdg {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Nodal Lagrange basis on the Legendre-Gauss-Lobatto points of degree N.
///
/// All operators refer to the reference interval [-1, 1]. Interpolation and
/// quadrature nodes coincide, so the mass matrix is diag(weights).
struct Basis {
  int degree = 0;
  Vector nodes;
  Vector weights;
  Vector barycentric;
  /// D(i, j) = l_j'(xi_i)
  Matrix derivative;
  /// Weak-form volume operator: Dhat(i, k) = w_k D(k, i) / w_i.
  Matrix derivative_weak;
  /// Flux-differencing operator: 2 D - M^{-1} B.
  Matrix derivative_split;
  /// Nodal values -> coefficients of the orthonormal Legendre expansion.
  Matrix inverse_vandermonde;

  int n_nodes() const { return degree + 1; }
};

/// Builds the LGL basis. Throws InvalidArgument for degree < 1.
Basis lgl_basis(int degree);

/// Gauss-Legendre nodes and weights with n points (exact to degree 2n-1).
void gauss_legendre(int n, Vector& nodes, Vector& weights);

/// Lagrange interpolation of nodal `values` to every point in `targets`.
/// Throws InvalidArgument for an empty target list or targets outside [-1, 1].
std::vector<double> interpolate_nodal(const Basis& basis, std::span<const double> values,
                                      std::span<const double> targets);

/// Row vector of Lagrange basis values at one point.
Vector lagrange_row(const Basis& basis, double x);

/// Mortar and AMR transfer operators for one basis.
///
/// Forward operators interpolate onto the lower [-1, 0] and upper [0, 1]
/// halves of the reference interval. Reverse operators are the exact L2
/// projections back onto the full interval; they are evaluated with Gauss
/// quadrature so that reverse * forward reproduces polynomials of degree N.
struct TransferOperators {
  Matrix forward_lower;
  Matrix forward_upper;
  Matrix reverse_lower;
  Matrix reverse_upper;

  const Matrix& forward(int half) const { return half == 0 ? forward_lower : forward_upper; }
  const Matrix& reverse(int half) const { return half == 0 ? reverse_lower : reverse_upper; }
};

TransferOperators transfer_operators(const Basis& basis);

/// Basis plus transfer operators, shared by all solvers of one degree.
struct DGOperators {
  Basis basis;
  TransferOperators transfer;
};

/// Cached operator set per degree. Thread-safe.
std::shared_ptr<const DGOperators> dg_operators(int degree);

/// Applies a tensor-product operator (rows: x then y) to nvars interleaved
/// nodal values laid out as ((j * n + i) * nvars + v).
void apply_tensor(const Matrix& op_x, const Matrix& op_y, std::span<const double> in,
                  std::span<double> out, int nvars);

/// Coefficient vector of the child with index `child` (bit 0: upper x half,
/// bit 1: upper y half) obtained by interpolating the parent element.
void refine_element(const TransferOperators& ops, int child, std::span<const double> parent,
                    std::span<double> out, int nvars);

/// Projects four children (ordered as in refine_element) onto the parent.
void coarsen_element(const TransferOperators& ops, std::span<const std::span<const double>, 4> children,
                     std::span<double> out, int nvars);

}  // namespace hgdg
