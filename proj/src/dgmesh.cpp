#include "hgdg/dgmesh.hpp"

#include "hgdg/errors.hpp"

#include <algorithm>
#include <limits>

namespace hgdg {

DGMesh::DGMesh(Quadtree tree, int degree) : tree_(std::move(tree)), ops_(dg_operators(degree)) {
  rebuild();
}

void DGMesh::rebuild() {
  const auto leaves = tree_.leaves();
  elements_.clear();
  elements_.reserve(leaves.size());
  cell_to_element_.assign(tree_.capacity(), -1);
  for (std::size_t e = 0; e < leaves.size(); ++e) {
    const CellId id = leaves[e];
    const auto m = tree_.cell_min(id);
    elements_.push_back({id, tree_.cell(id).level, m[0], m[1], tree_.cell_size(id)});
    cell_to_element_[static_cast<std::size_t>(id)] = static_cast<std::ptrdiff_t>(e);
  }

  const Connectivity conn = tree_.leaf_connectivity();
  auto idx = [&](CellId c) { return static_cast<std::size_t>(cell_to_element_[static_cast<std::size_t>(c)]); };
  interfaces_.clear();
  mortars_.clear();
  boundaries_.clear();
  neighbors_.assign(elements_.size(), {});
  auto link = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    auto& na = neighbors_[a];
    if (std::find(na.begin(), na.end(), b) == na.end()) na.push_back(b);
    auto& nb = neighbors_[b];
    if (std::find(nb.begin(), nb.end(), a) == nb.end()) nb.push_back(a);
  };
  for (const auto& f : conn.interfaces) {
    interfaces_.push_back({idx(f.left), idx(f.right), f.axis});
    link(idx(f.left), idx(f.right));
  }
  for (const auto& m : conn.mortars) {
    mortars_.push_back({idx(m.large), {idx(m.small[0]), idx(m.small[1])}, m.axis, m.large_is_left});
    link(idx(m.large), idx(m.small[0]));
    link(idx(m.large), idx(m.small[1]));
  }
  for (const auto& b : conn.boundaries) boundaries_.push_back({idx(b.cell), b.face});
}

std::ptrdiff_t DGMesh::element_of_cell(CellId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= cell_to_element_.size()) return -1;
  return cell_to_element_[static_cast<std::size_t>(id)];
}

double DGMesh::node_x(std::size_t e, int i) const {
  const auto& g = elements_[e];
  return g.x0 + 0.5 * g.h * (ops_->basis.nodes[i] + 1.0);
}

double DGMesh::node_y(std::size_t e, int j) const {
  const auto& g = elements_[e];
  return g.y0 + 0.5 * g.h * (ops_->basis.nodes[j] + 1.0);
}

double DGMesh::min_h() const {
  double h = std::numeric_limits<double>::infinity();
  for (const auto& g : elements_) h = std::min(h, g.h);
  return h;
}

std::vector<double> integrate(const DGMesh& mesh, const Field& f) {
  if (f.n_elements() != mesh.n_elements() || f.n_nodes() != mesh.n_nodes())
    throw InvalidArgument("integrate: field does not match mesh");
  const auto& w = mesh.basis().weights;
  const int n = mesh.n_nodes();
  std::vector<double> total(static_cast<std::size_t>(f.nvars()), 0.0);
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const double jac2 = mesh.jacobian(e) * mesh.jacobian(e);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double* u = f.node(e, i, j);
        for (int v = 0; v < f.nvars(); ++v) total[v] += w[i] * w[j] * jac2 * u[v];
      }
  }
  return total;
}

}  // namespace hgdg
