#pragma once

#include "hgdg/dgmesh.hpp"
#include "hgdg/euler.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testutil {

inline hgdg::DGMesh uniform_mesh(int level, int degree, double lo = 0.0, double hi = 1.0, bool periodic = true) {
  return hgdg::DGMesh(hgdg::Quadtree::create_uniform({lo, lo}, {hi, hi}, level, {periodic, periodic}), degree);
}

/// Uniform level-2 periodic mesh with two leaves refined once, which leaves
/// mortars on every coarse-fine face.
inline hgdg::DGMesh nonconforming_mesh(int degree, double lo = 0.0, double hi = 1.0) {
  auto tree = hgdg::Quadtree::create_uniform({lo, lo}, {hi, hi}, 2, {true, true});
  const auto leaves = tree.leaves();
  const std::vector<hgdg::CellId> pick{leaves[0], leaves[5]};
  tree.refine_cells(pick);
  const auto fine = tree.leaves();
  const std::vector<hgdg::CellId> again{fine[3]};
  tree.refine_cells(again);
  return hgdg::DGMesh(std::move(tree), degree);
}

inline hgdg::EulerState random_euler_state(std::mt19937_64& rng, const hgdg::CompressibleEuler& eq) {
  std::uniform_real_distribution<double> pos(0.2, 3.0), vel(-1.5, 1.5);
  return eq.prim2cons({pos(rng), vel(rng), vel(rng), pos(rng)});
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace testutil
