#include "hgdg/mesh.hpp"

#include "hgdg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>
#include <unordered_set>

namespace hgdg {

namespace {

constexpr std::array<std::array<int, 2>, 4> kFaceOffset{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

bool is_plus_face(int face) { return face == kFaceXPlus || face == kFaceYPlus; }
int face_axis(int face) { return face / 2; }

/// Children of the neighbor that touch the face, seen from the cell across `face`.
std::array<int, 2> touching_children(int face) {
  switch (face) {
    case kFaceXPlus: return {0, 2};
    case kFaceXMinus: return {1, 3};
    case kFaceYPlus: return {0, 1};
    default: return {2, 3};
  }
}

}  // namespace

std::uint64_t Quadtree::key(int level, std::int64_t ix, std::int64_t iy) {
  return (static_cast<std::uint64_t>(level) << 58) | (static_cast<std::uint64_t>(ix) << 29) |
         static_cast<std::uint64_t>(iy);
}

Quadtree Quadtree::create_uniform(std::array<double, 2> domain_min, std::array<double, 2> domain_max,
                                  int level, std::array<bool, 2> periodic, int max_level) {
  const double lx = domain_max[0] - domain_min[0];
  const double ly = domain_max[1] - domain_min[1];
  if (!(lx > 0.0) || !(ly > 0.0)) throw InvalidArgument("domain must have positive extent");
  if (std::abs(lx - ly) > 1e-12 * std::max(lx, ly) || domain_min[0] != domain_min[1])
    throw InvalidArgument("domain must be a square [a, b]^2");
  if (max_level < 0 || max_level > 28) throw InvalidArgument("max_level must lie in [0, 28]");
  if (level < 0 || level > max_level)
    throw InvalidArgument("initial level " + std::to_string(level) + " outside [0, max_level]");

  Quadtree tree;
  tree.lo_ = domain_min[0];
  tree.hi_ = domain_max[0];
  tree.periodic_ = periodic;
  tree.max_level_ = max_level;
  tree.add_cell(0, 0, 0, -1);
  for (int l = 0; l < level; ++l) {
    for (CellId id : tree.leaves()) tree.split(id);
  }
  return tree;
}

CellId Quadtree::add_cell(int level, std::int64_t ix, std::int64_t iy, CellId parent) {
  Cell c;
  c.level = level;
  c.ix = ix;
  c.iy = iy;
  c.parent = parent;
  CellId id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
    cells_[static_cast<std::size_t>(id)] = c;
  } else {
    id = static_cast<CellId>(cells_.size());
    cells_.push_back(c);
  }
  index_[key(level, ix, iy)] = id;
  return id;
}

void Quadtree::remove_cell(CellId id) {
  Cell& c = cells_[static_cast<std::size_t>(id)];
  index_.erase(key(c.level, c.ix, c.iy));
  c.alive = false;
  c.children = {-1, -1, -1, -1};
  free_.push_back(id);
}

void Quadtree::split(CellId id) {
  const Cell parent = cells_[static_cast<std::size_t>(id)];
  std::array<CellId, 4> kids{};
  for (int k = 0; k < 4; ++k)
    kids[k] = add_cell(parent.level + 1, 2 * parent.ix + (k & 1), 2 * parent.iy + (k >> 1), id);
  cells_[static_cast<std::size_t>(id)].children = kids;
}

std::optional<CellId> Quadtree::find(int level, std::int64_t ix, std::int64_t iy) const {
  auto it = index_.find(key(level, ix, iy));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::array<std::int64_t, 2>> Quadtree::neighbor_position(const Cell& c, int face) const {
  const std::int64_t n = std::int64_t{1} << c.level;
  std::int64_t nx = c.ix + kFaceOffset[face][0];
  std::int64_t ny = c.iy + kFaceOffset[face][1];
  const int axis = face_axis(face);
  std::int64_t& coord = axis == 0 ? nx : ny;
  if (coord < 0 || coord >= n) {
    if (!periodic_[axis]) return std::nullopt;
    coord = (coord + n) % n;
  }
  return std::array<std::int64_t, 2>{nx, ny};
}

std::optional<CellId> Quadtree::coarser_or_equal_neighbor(const Cell& c, int face) const {
  const Cell* cur = &c;
  while (true) {
    auto pos = neighbor_position(*cur, face);
    if (!pos) return std::nullopt;
    if (auto nb = find(cur->level, (*pos)[0], (*pos)[1])) return nb;
    if (cur->parent < 0) return std::nullopt;
    cur = &cells_[static_cast<std::size_t>(cur->parent)];
  }
}

double Quadtree::cell_size(CellId id) const {
  return domain_length() / static_cast<double>(std::int64_t{1} << cell(id).level);
}

std::array<double, 2> Quadtree::cell_min(CellId id) const {
  const Cell& c = cell(id);
  const double h = cell_size(id);
  return {lo_ + static_cast<double>(c.ix) * h, lo_ + static_cast<double>(c.iy) * h};
}

std::array<double, 2> Quadtree::cell_center(CellId id) const {
  const auto m = cell_min(id);
  const double h = cell_size(id);
  return {m[0] + 0.5 * h, m[1] + 0.5 * h};
}

std::vector<CellId> Quadtree::leaves() const {
  std::vector<CellId> out;
  if (cells_.empty()) return out;
  std::vector<CellId> stack{root()};
  while (!stack.empty()) {
    const CellId id = stack.back();
    stack.pop_back();
    const Cell& c = cells_[static_cast<std::size_t>(id)];
    if (c.leaf()) {
      out.push_back(id);
    } else {
      for (int k = 3; k >= 0; --k) stack.push_back(c.children[k]);
    }
  }
  return out;
}

std::size_t Quadtree::leaf_count() const {
  std::size_t n = 0;
  for (const Cell& c : cells_)
    if (c.alive && c.leaf()) ++n;
  return n;
}

int Quadtree::min_leaf_level() const {
  int l = max_level_;
  for (const Cell& c : cells_)
    if (c.alive && c.leaf()) l = std::min(l, c.level);
  return l;
}

int Quadtree::max_leaf_level() const {
  int l = 0;
  for (const Cell& c : cells_)
    if (c.alive && c.leaf()) l = std::max(l, c.level);
  return l;
}

std::vector<CellId> Quadtree::refine_cells(std::span<const CellId> ids) {
  for (CellId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= cells_.size() || !cells_[id].alive)
      throw InvalidArgument("refine_cells: unknown cell " + std::to_string(id));
    if (!cells_[id].leaf()) throw InvalidArgument("refine_cells: cell " + std::to_string(id) + " is not a leaf");
    if (cells_[id].level >= max_level_)
      throw InvalidArgument("refine_cells: cell " + std::to_string(id) + " is at the maximum level " +
                            std::to_string(max_level_));
  }
  std::vector<CellId> refined;
  std::deque<CellId> queue(ids.begin(), ids.end());
  while (!queue.empty()) {
    const CellId id = queue.front();
    queue.pop_front();
    if (!cells_[id].leaf()) continue;
    split(id);
    refined.push_back(id);
    const Cell c = cells_[id];
    for (int face = 0; face < 4; ++face) {
      auto pos = neighbor_position(c, face);
      if (!pos || find(c.level, (*pos)[0], (*pos)[1])) continue;
      auto coarse = coarser_or_equal_neighbor(c, face);
      if (coarse && cells_[*coarse].leaf() && cells_[*coarse].level < c.level) queue.push_back(*coarse);
    }
  }
  return refined;
}

std::vector<CellId> Quadtree::coarsen_cells(std::span<const CellId> ids,
                                            std::span<const CellId> refined_this_pass) {
  std::unordered_set<CellId> flagged;
  for (CellId id : ids) {
    if (id >= 0 && static_cast<std::size_t>(id) < cells_.size() && cells_[id].alive && cells_[id].leaf())
      flagged.insert(id);
  }
  const std::unordered_set<CellId> blocked(refined_this_pass.begin(), refined_this_pass.end());

  std::set<CellId> parents;
  for (CellId id : flagged)
    if (cells_[id].parent >= 0) parents.insert(cells_[id].parent);

  std::vector<CellId> coarsened;
  for (CellId p : parents) {
    if (blocked.contains(p)) continue;
    const Cell parent = cells_[p];
    bool ok = true;
    for (CellId k : parent.children) {
      if (!cells_[k].leaf() || !flagged.contains(k) || blocked.contains(k)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (int face = 0; face < 4 && ok; ++face) {
      auto pos = neighbor_position(parent, face);
      if (!pos) continue;
      auto nb = find(parent.level, (*pos)[0], (*pos)[1]);
      if (!nb || cells_[*nb].leaf()) continue;
      for (int k : touching_children(face)) {
        if (!cells_[cells_[*nb].children[k]].leaf()) ok = false;
      }
    }
    if (!ok) continue;
    for (CellId k : parent.children) remove_cell(k);
    cells_[p].children = {-1, -1, -1, -1};
    coarsened.push_back(p);
  }
  return coarsened;
}

Connectivity Quadtree::leaf_connectivity() const {
  Connectivity conn;
  for (CellId id : leaves()) {
    const Cell& c = cells_[id];
    for (int face = 0; face < 4; ++face) {
      auto pos = neighbor_position(c, face);
      if (!pos) {
        conn.boundaries.push_back({id, face});
        continue;
      }
      auto nb = find(c.level, (*pos)[0], (*pos)[1]);
      if (nb) {
        const Cell& n = cells_[*nb];
        if (n.leaf()) {
          if (is_plus_face(face)) conn.interfaces.push_back({id, *nb, face_axis(face)});
          continue;
        }
        const auto tc = touching_children(face);
        const CellId lower = n.children[tc[0]];
        const CellId upper = n.children[tc[1]];
        if (!cells_[lower].leaf() || !cells_[upper].leaf())
          throw InvalidArgument("leaf_connectivity: tree is not 2:1 balanced at cell " + std::to_string(id));
        conn.mortars.push_back({id, {lower, upper}, face_axis(face), is_plus_face(face)});
        continue;
      }
      // No same-level neighbor: a coarser leaf one level up must cover the face.
      const Cell& parent = cells_[c.parent];
      auto ppos = neighbor_position(parent, face);
      auto coarse = ppos ? find(parent.level, (*ppos)[0], (*ppos)[1]) : std::nullopt;
      if (!coarse || !cells_[*coarse].leaf())
        throw InvalidArgument("leaf_connectivity: tree is not 2:1 balanced at cell " + std::to_string(id));
    }
  }
  return conn;
}

bool Quadtree::is_balanced() const {
  for (CellId id : leaves()) {
    const Cell& c = cells_[id];
    for (int face = 0; face < 4; ++face) {
      auto pos = neighbor_position(c, face);
      if (!pos) continue;
      auto nb = find(c.level, (*pos)[0], (*pos)[1]);
      if (nb) {
        const Cell& n = cells_[*nb];
        if (n.leaf()) continue;
        for (int k : touching_children(face))
          if (!cells_[n.children[k]].leaf()) return false;
        continue;
      }
      const Cell& parent = cells_[c.parent];
      auto ppos = neighbor_position(parent, face);
      auto coarse = ppos ? find(parent.level, (*ppos)[0], (*ppos)[1]) : std::nullopt;
      if (!coarse || !cells_[*coarse].leaf()) return false;
    }
  }
  return true;
}

}  // namespace hgdg
