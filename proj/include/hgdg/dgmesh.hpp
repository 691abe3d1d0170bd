#pragma once

#include "hgdg/dgcore.hpp"
#include "hgdg/mesh.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace hgdg {

/// Nodal values of all elements, laid out as ((e * n + j) * n + i) * nvars + v.
class Field {
 public:
  Field() = default;
  Field(std::size_t n_elements, int n_nodes, int nvars, double value = 0.0)
      : n_elements_(n_elements), n_(n_nodes), nvars_(nvars),
        data_(n_elements * static_cast<std::size_t>(n_nodes * n_nodes * nvars), value) {}

  std::size_t n_elements() const { return n_elements_; }
  int n_nodes() const { return n_; }
  int nvars() const { return nvars_; }
  std::size_t element_size() const { return static_cast<std::size_t>(n_ * n_ * nvars_); }

  std::size_t offset(std::size_t e, int i, int j) const {
    return ((e * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)) * n_ + i) * nvars_;
  }
  double* node(std::size_t e, int i, int j) { return data_.data() + offset(e, i, j); }
  const double* node(std::size_t e, int i, int j) const { return data_.data() + offset(e, i, j); }

  std::span<double> element(std::size_t e) { return {data_.data() + e * element_size(), element_size()}; }
  std::span<const double> element(std::size_t e) const {
    return {data_.data() + e * element_size(), element_size()};
  }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }

  bool same_shape(const Field& o) const {
    return n_elements_ == o.n_elements_ && n_ == o.n_ && nvars_ == o.nvars_;
  }

 private:
  std::size_t n_elements_ = 0;
  int n_ = 0;
  int nvars_ = 0;
  std::vector<double> data_;
};

struct ElementGeometry {
  CellId cell;
  int level;
  double x0;
  double y0;
  double h;
};

struct ElementInterface {
  std::size_t left;
  std::size_t right;
  int axis;
};

struct ElementMortar {
  std::size_t large;
  std::array<std::size_t, 2> small;
  int axis;
  bool large_is_left;
};

struct ElementBoundary {
  std::size_t element;
  int face;
};

/// Quadtree leaves turned into DG elements of one polynomial degree.
///
/// Elements are numbered in depth-first leaf order. Call rebuild() after
/// every change to the tree.
class DGMesh {
 public:
  DGMesh(Quadtree tree, int degree);

  const Quadtree& tree() const { return tree_; }
  Quadtree& tree() { return tree_; }
  void rebuild();

  int degree() const { return ops_->basis.degree; }
  int n_nodes() const { return ops_->basis.n_nodes(); }
  const DGOperators& ops() const { return *ops_; }
  const Basis& basis() const { return ops_->basis; }

  std::size_t n_elements() const { return elements_.size(); }
  const std::vector<ElementGeometry>& elements() const { return elements_; }
  const ElementGeometry& element(std::size_t e) const { return elements_[e]; }
  const std::vector<ElementInterface>& interfaces() const { return interfaces_; }
  const std::vector<ElementMortar>& mortars() const { return mortars_; }
  const std::vector<ElementBoundary>& boundaries() const { return boundaries_; }
  /// Face neighbors of every element (conforming and mortar), without duplicates.
  const std::vector<std::vector<std::size_t>>& neighbors() const { return neighbors_; }

  /// Element index of a leaf cell; -1 for cells that are not leaves.
  std::ptrdiff_t element_of_cell(CellId id) const;

  double node_x(std::size_t e, int i) const;
  double node_y(std::size_t e, int j) const;
  double jacobian(std::size_t e) const { return 0.5 * elements_[e].h; }
  double area() const { return tree_.domain_length() * tree_.domain_length(); }
  double min_h() const;

 private:
  Quadtree tree_;
  std::shared_ptr<const DGOperators> ops_;
  std::vector<ElementGeometry> elements_;
  std::vector<ElementInterface> interfaces_;
  std::vector<ElementMortar> mortars_;
  std::vector<ElementBoundary> boundaries_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::vector<std::ptrdiff_t> cell_to_element_;
};

/// Samples `fn(x, y, out)` at every node.
template <class Fn>
Field sample(const DGMesh& mesh, int nvars, Fn&& fn) {
  Field f(mesh.n_elements(), mesh.n_nodes(), nvars);
  const int n = mesh.n_nodes();
  for (std::size_t e = 0; e < mesh.n_elements(); ++e)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) fn(mesh.node_x(e, i), mesh.node_y(e, j), f.node(e, i, j));
  return f;
}

/// LGL-quadrature integral of each variable over the domain.
std::vector<double> integrate(const DGMesh& mesh, const Field& f);

}  // namespace hgdg
