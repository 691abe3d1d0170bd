#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace hgdg {

using CellId = int;

/// Face numbering shared by mesh, solver and I/O: 0 = -x, 1 = +x, 2 = -y, 3 = +y.
enum Face : int { kFaceXMinus = 0, kFaceXPlus = 1, kFaceYMinus = 2, kFaceYPlus = 3 };

struct Cell {
  int level = 0;
  /// Integer position at this level, in [0, 2^level).
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  CellId parent = -1;
  /// Child order: bit 0 selects the upper x half, bit 1 the upper y half.
  std::array<CellId, 4> children{-1, -1, -1, -1};
  bool alive = true;

  bool leaf() const { return children[0] < 0; }
};

struct Interface {
  CellId left;
  CellId right;
  int axis;  // 0: normal along x, 1: normal along y
};

struct MortarConnection {
  CellId large;
  std::array<CellId, 2> small;  // ordered by increasing tangential coordinate
  int axis;
  bool large_is_left;  // large cell lies on the negative side of the face
};

struct BoundaryFace {
  CellId cell;
  int face;  // Face value; doubles as the boundary tag
};

struct Connectivity {
  std::vector<Interface> interfaces;
  std::vector<MortarConnection> mortars;
  std::vector<BoundaryFace> boundaries;
};

/// Square-domain quadtree with 2:1 face balance.
///
/// Cells live in a flat array with explicit parent/child ids. Lookup of a
/// cell by (level, ix, iy) goes through a hash map so neighbor queries are O(1).
class Quadtree {
 public:
  static constexpr int kDefaultMaxLevel = 16;

  /// Uniform tree with 4^level leaves. Throws InvalidArgument for a
  /// non-square domain or a level outside [0, max_level].
  static Quadtree create_uniform(std::array<double, 2> domain_min, std::array<double, 2> domain_max,
                                 int level, std::array<bool, 2> periodic = {false, false},
                                 int max_level = kDefaultMaxLevel);

  /// Refines the given leaves plus whatever is needed to restore balance.
  /// Returns every cell that was refined. Throws InvalidArgument if a cell
  /// is not a leaf or is already at the maximum level.
  std::vector<CellId> refine_cells(std::span<const CellId> ids);

  /// Coarsens parents whose four children are all listed, are leaves, were
  /// not produced by refinement in this pass, and whose removal keeps the
  /// tree balanced. Other requests are dropped. Returns the coarsened parents.
  std::vector<CellId> coarsen_cells(std::span<const CellId> ids,
                                    std::span<const CellId> refined_this_pass = {});

  /// Classifies every leaf face. Throws InvalidArgument on an unbalanced tree.
  Connectivity leaf_connectivity() const;

  /// Leaves in depth-first order (children visited in index order).
  std::vector<CellId> leaves() const;
  std::size_t leaf_count() const;

  const Cell& cell(CellId id) const { return cells_.at(static_cast<std::size_t>(id)); }
  std::size_t capacity() const { return cells_.size(); }
  CellId root() const { return 0; }

  double domain_min() const { return lo_; }
  double domain_max() const { return hi_; }
  double domain_length() const { return hi_ - lo_; }
  std::array<bool, 2> periodic() const { return periodic_; }
  int max_level() const { return max_level_; }

  double cell_size(CellId id) const;
  std::array<double, 2> cell_min(CellId id) const;
  std::array<double, 2> cell_center(CellId id) const;

  std::optional<CellId> find(int level, std::int64_t ix, std::int64_t iy) const;

  /// Same-level face neighbor position; nullopt at a non-periodic boundary.
  std::optional<std::array<std::int64_t, 2>> neighbor_position(const Cell& c, int face) const;

  /// True when every pair of face-adjacent leaves differs by at most one level.
  bool is_balanced() const;

  int min_leaf_level() const;
  int max_leaf_level() const;

 private:
  CellId add_cell(int level, std::int64_t ix, std::int64_t iy, CellId parent);
  void remove_cell(CellId id);
  void split(CellId id);
  /// Leaf covering the neighbor region of `c` across `face`, at level <= c.level.
  std::optional<CellId> coarser_or_equal_neighbor(const Cell& c, int face) const;

  static std::uint64_t key(int level, std::int64_t ix, std::int64_t iy);

  std::vector<Cell> cells_;
  std::vector<CellId> free_;
  std::unordered_map<std::uint64_t, CellId> index_;
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::array<bool, 2> periodic_{false, false};
  int max_level_ = kDefaultMaxLevel;
};

}  // namespace hgdg
