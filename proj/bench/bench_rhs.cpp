// Parallel RHS kernels against the serial reference on a mesh with mortars.
#include "hgdg/harness.hpp"
#include "hgdg/reference.hpp"
#include "hgdg/semidisc.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace hgdg;

namespace {

/// Uniform mesh at `level` with the lower-left quarter refined once more.
DGMesh bench_mesh(int level, int degree) {
  auto tree = Quadtree::create_uniform({0, 0}, {1, 1}, level, {true, true});
  std::vector<CellId> pick;
  for (CellId id : tree.leaves()) {
    const auto c = tree.cell_center(id);
    if (c[0] < 0.5 && c[1] < 0.5) pick.push_back(id);
  }
  tree.refine_cells(pick);
  return DGMesh(std::move(tree), degree);
}

Field smooth_euler(const DGMesh& mesh, const CompressibleEuler& eq) {
  using std::numbers::pi;
  return sample(mesh, 4, [&](double x, double y, double* out) {
    const auto u = eq.prim2cons({1.0 + 0.2 * std::sin(2 * pi * x) * std::cos(2 * pi * y), 0.3, -0.2,
                                 1.0 + 0.1 * std::cos(2 * pi * (x + y))});
    for (int v = 0; v < 4; ++v) out[v] = u[v];
  });
}

enum class Kind { Weak, Split, Gravity };

void rhs_bench(benchmark::State& state, Kind kind, bool parallel) {
  const auto mesh = bench_mesh(static_cast<int>(state.range(0)), 3);
  const CompressibleEuler eq(1.4);
  auto run = [&](const auto& semi, const Field& u) {
    Field du(u);
    for (auto _ : state) {
      if (parallel) semi.rhs(u.span(), du.span(), 0.0);
      else reference::rhs_serial(semi, u.span(), du.span(), 0.0);
      benchmark::DoNotOptimize(du.values().data());
    }
  };
  if (kind == Kind::Gravity) {
    const GravitySemi semi(mesh, HyperbolicDiffusion{}, FluxKind::Llf);
    Field g(mesh.n_elements(), mesh.n_nodes(), 3);
    for (std::size_t k = 0; k < g.values().size(); ++k) g.values()[k] = std::sin(0.01 * static_cast<double>(k));
    run(semi, g);
  } else if (kind == Kind::Split) {
    const EulerSemi semi(mesh, eq, FluxKind::Hll, VolumeForm::Split, FluxKind::Chandrashekar);
    run(semi, smooth_euler(mesh, eq));
  } else {
    const EulerSemi semi(mesh, eq, FluxKind::Hll);
    run(semi, smooth_euler(mesh, eq));
  }
  state.counters["elements"] = static_cast<double>(mesh.n_elements());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mesh.n_elements()));
}

}  // namespace

BENCHMARK_CAPTURE(rhs_bench, euler_weak_parallel, Kind::Weak, true)->Arg(4)->Arg(5)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(rhs_bench, euler_weak_serial, Kind::Weak, false)->Arg(4)->Arg(5)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(rhs_bench, euler_split_parallel, Kind::Split, true)->Arg(4)->Arg(5)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(rhs_bench, euler_split_serial, Kind::Split, false)->Arg(4)->Arg(5)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(rhs_bench, gravity_parallel, Kind::Gravity, true)->Arg(4)->Arg(5)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(rhs_bench, gravity_serial, Kind::Gravity, false)->Arg(4)->Arg(5)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
