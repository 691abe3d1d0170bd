#pragma once

#include "hgdg/harness.hpp"
#include "hgdg/semidisc.hpp"

#include <span>
#include <vector>

namespace hgdg {

/// Indicator-driven target levels. The indicator reuses the shock-capturing
/// modal energy with its own clipping parameters.
struct AMRPolicy {
  BlendParams indicator{1.0, 1e-4, std::log(9999.0), 0.5, 1.8, 0.0};
  double threshold = 0.0003;
  int level_low = 2;
  int level_high = 8;
  /// Adapt after every `interval` Euler steps.
  int interval = 1;

  /// Throws InvalidArgument for inconsistent bounds or threshold.
  void validate() const;
};

/// +1 / 0 / -1 per element: sign of (target level - current level).
std::vector<int> compute_lambda(const AMRPolicy& policy, const DGMesh& mesh, std::span<const double> euler_state,
                                const CompressibleEuler& eq);

struct AdaptResult {
  std::size_t refined = 0;
  std::size_t coarsened = 0;
  bool changed() const { return refined + coarsened > 0; }
};

/// Refines (with balance smoothing), then coarsens, and transfers every
/// field: interpolation onto new children, L2 projection onto new parents.
/// Coarsening requests are dropped for families touched by refinement.
AdaptResult adapt(DGMesh& mesh, std::span<Field* const> fields, std::span<const int> lambda);
AdaptResult adapt(DGMesh& mesh, Field& euler, Field& gravity, std::span<const int> lambda);

struct InitialAdaptResult {
  int cycles = 0;
  /// True when the mesh stopped changing before the cycle cap.
  bool fixed_point = false;
};

/// Alternates sampling the initial condition and adapting until lambda is
/// zero everywhere or max_cycles adaptations have run. Leaves both fields
/// sampled from the initial condition on the final mesh.
InitialAdaptResult initial_adapt_cycle(const AMRPolicy& policy, DGMesh& mesh, const CompressibleEuler& eq,
                                       const EulerFn& euler_init, const GravityFn& gravity_init, Field& euler,
                                       Field& gravity, int max_cycles);

/// Samples an Euler / gravity initial condition at t = 0.
Field sample_euler(const DGMesh& mesh, const EulerFn& fn, double t = 0.0);
Field sample_gravity(const DGMesh& mesh, const GravityFn& fn, double t = 0.0);

}  // namespace hgdg
