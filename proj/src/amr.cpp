#include "hgdg/amr.hpp"

#include <unordered_map>

namespace hgdg {

namespace {

std::uint64_t position_key(int level, std::int64_t ix, std::int64_t iy) {
  return (static_cast<std::uint64_t>(level) << 58) | (static_cast<std::uint64_t>(ix) << 29) |
         static_cast<std::uint64_t>(iy);
}

}  // namespace

void AMRPolicy::validate() const {
  if (level_low < 0 || level_low > level_high) throw InvalidArgument("AMR levels must satisfy 0 <= low <= high");
  if (!(threshold > 0.0)) throw InvalidArgument("AMR threshold must be positive");
  if (interval < 1) throw InvalidArgument("AMR interval must be at least 1");
}

std::vector<int> compute_lambda(const AMRPolicy& policy, const DGMesh& mesh, std::span<const double> euler_state,
                                const CompressibleEuler& eq) {
  policy.validate();
  const auto alpha = blending_alpha(mesh, euler_state, eq, policy.indicator);
  std::vector<int> lambda(mesh.n_elements(), 0);
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const int target = alpha[e] > policy.threshold ? policy.level_high : policy.level_low;
    const int level = mesh.element(e).level;
    lambda[e] = target > level ? 1 : (target < level ? -1 : 0);
  }
  return lambda;
}

AdaptResult adapt(DGMesh& mesh, std::span<Field* const> fields, std::span<const int> lambda) {
  if (lambda.size() != mesh.n_elements()) throw InvalidArgument("adapt: one lambda value per element required");
  for (const Field* f : fields)
    if (f->n_elements() != mesh.n_elements() || f->n_nodes() != mesh.n_nodes())
      throw InvalidArgument("adapt: field does not match mesh");

  Quadtree& tree = mesh.tree();
  std::vector<CellId> up, down;
  for (std::size_t e = 0; e < lambda.size(); ++e) {
    if (lambda[e] > 0) up.push_back(mesh.element(e).cell);
    else if (lambda[e] < 0) down.push_back(mesh.element(e).cell);
  }
  if (up.empty() && down.empty()) return {};

  // Old leaves are keyed by position because cell ids get recycled.
  std::unordered_map<std::uint64_t, std::size_t> old_index;
  old_index.reserve(mesh.n_elements());
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const Cell& c = tree.cell(mesh.element(e).cell);
    old_index[position_key(c.level, c.ix, c.iy)] = e;
  }
  std::vector<Field> old;
  old.reserve(fields.size());
  for (const Field* f : fields) old.push_back(*f);

  AdaptResult result;
  const auto refined = tree.refine_cells(up);
  result.refined = refined.size();
  std::vector<CellId> candidates;
  for (CellId c : down)
    if (tree.cell(c).alive && tree.cell(c).leaf()) candidates.push_back(c);
  result.coarsened = tree.coarsen_cells(candidates, refined).size();
  if (!result.changed()) return result;
  mesh.rebuild();

  const auto& ops = mesh.ops().transfer;
  for (std::size_t fi = 0; fi < fields.size(); ++fi) {
    const Field& src = old[fi];
    Field dst(mesh.n_elements(), mesh.n_nodes(), src.nvars());
    const int nv = src.nvars();
    std::vector<double> chain_a(src.element_size()), chain_b(src.element_size());
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
      const Cell& c = tree.cell(mesh.element(e).cell);
      auto out = dst.element(e);
      if (auto it = old_index.find(position_key(c.level, c.ix, c.iy)); it != old_index.end()) {
        const auto in = src.element(it->second);
        std::copy(in.begin(), in.end(), out.begin());
        continue;
      }
      // Refined: find the old ancestor and interpolate down the chain.
      std::vector<int> path;
      int level = c.level;
      std::int64_t ix = c.ix, iy = c.iy;
      auto anc = old_index.end();
      while (level > 0) {
        path.push_back(static_cast<int>((ix & 1) | ((iy & 1) << 1)));
        --level;
        ix >>= 1;
        iy >>= 1;
        anc = old_index.find(position_key(level, ix, iy));
        if (anc != old_index.end()) break;
      }
      if (anc != old_index.end()) {
        const auto in = src.element(anc->second);
        std::copy(in.begin(), in.end(), chain_a.begin());
        for (auto p = path.rbegin(); p != path.rend(); ++p) {
          refine_element(ops, *p, chain_a, chain_b, nv);
          std::swap(chain_a, chain_b);
        }
        std::copy(chain_a.begin(), chain_a.end(), out.begin());
        continue;
      }
      // Coarsened: project the four old children.
      std::array<std::span<const double>, 4> kids;
      for (int k = 0; k < 4; ++k) {
        auto it = old_index.find(position_key(c.level + 1, 2 * c.ix + (k & 1), 2 * c.iy + (k >> 1)));
        if (it == old_index.end()) throw InvalidArgument("adapt: no source data for a new element");
        kids[k] = src.element(it->second);
      }
      coarsen_element(ops, std::span<const std::span<const double>, 4>(kids), out, nv);
    }
    *fields[fi] = std::move(dst);
  }
  return result;
}

AdaptResult adapt(DGMesh& mesh, Field& euler, Field& gravity, std::span<const int> lambda) {
  std::array<Field*, 2> f{&euler, &gravity};
  return adapt(mesh, f, lambda);
}

Field sample_euler(const DGMesh& mesh, const EulerFn& fn, double t) {
  return sample(mesh, 4, [&](double x, double y, double* out) {
    const auto s = fn(x, y, t);
    for (int v = 0; v < 4; ++v) out[v] = s[v];
  });
}

Field sample_gravity(const DGMesh& mesh, const GravityFn& fn, double t) {
  return sample(mesh, 3, [&](double x, double y, double* out) {
    const auto s = fn(x, y, t);
    for (int v = 0; v < 3; ++v) out[v] = s[v];
  });
}

InitialAdaptResult initial_adapt_cycle(const AMRPolicy& policy, DGMesh& mesh, const CompressibleEuler& eq,
                                       const EulerFn& euler_init, const GravityFn& gravity_init, Field& euler,
                                       Field& gravity, int max_cycles) {
  if (max_cycles < 1) throw InvalidArgument("initial_adapt_cycle: max_cycles must be at least 1");
  InitialAdaptResult res;
  while (true) {
    euler = sample_euler(mesh, euler_init);
    gravity = sample_gravity(mesh, gravity_init);
    if (res.cycles >= max_cycles) break;
    const auto lambda = compute_lambda(policy, mesh, euler.span(), eq);
    const auto r = adapt(mesh, euler, gravity, lambda);
    if (!r.changed()) {
      res.fixed_point = true;
      break;
    }
    ++res.cycles;
  }
  return res;
}

}  // namespace hgdg
