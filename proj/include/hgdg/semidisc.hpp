#pragma once

#include "hgdg/dgmesh.hpp"
#include "hgdg/euler.hpp"
#include "hgdg/hypdiff.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hgdg {

enum class FluxKind { Hll, Llf, Chandrashekar, Central };
enum class VolumeForm { Weak, Split };

FluxKind parse_flux_kind(const std::string& name);
std::string to_string(FluxKind kind);

/// Parameters of the modal-energy shock indicator and the DG/FV blend.
struct BlendParams {
  double alpha_max = 0.5;
  double alpha_min = 0.001;
  double sharpness = std::log(9999.0);
  double threshold_scale = 0.5;
  double threshold_exponent = 1.8;
  /// Neighbor smoothing factor; 0 switches smoothing off.
  double smoothing = 0.5;

  /// T(N) = scale * 10^(-exponent * (N + 1)^0.25)
  double threshold(int degree) const {
    return threshold_scale * std::pow(10.0, -threshold_exponent * std::pow(degree + 1.0, 0.25));
  }
};

/// Modal energy fraction of rho * p in the highest modes of one element.
double indicator_energy(std::span<const double> element_state, const Basis& basis, const CompressibleEuler& eq);

/// Element blending factor before neighbor smoothing, in [0, alpha_max].
double blending_indicator(std::span<const double> element_state, const Basis& basis,
                          const CompressibleEuler& eq, const BlendParams& params);

/// Blending factors of all elements, including the neighbor smoothing pass.
std::vector<double> blending_alpha(const DGMesh& mesh, std::span<const double> state,
                                   const CompressibleEuler& eq, const BlendParams& params);

/// Semi-discrete DG operator du/dt = R(u, t) for one equation system.
///
/// The mesh is held by reference and may be rebuilt between calls (AMR).
/// RHS evaluation allocates no shared mutable state, so two evaluations with
/// different output buffers may run concurrently.
template <class Eq>
class Semidiscretization {
 public:
  using State = typename Eq::State;
  static constexpr int nvars = Eq::nvars;
  /// External state for weakly imposed Dirichlet data.
  using BoundaryFn = std::function<State(double x, double y, double t)>;
  /// Adds a source contribution to du for the whole field.
  using SourceFn = std::function<void(std::span<const double> u, double t, std::span<double> du)>;

  /// Throws InvalidArgument if a flux kind does not apply to Eq or if the
  /// split form is requested with a non-symmetric volume flux.
  Semidiscretization(const DGMesh& mesh, Eq eq, FluxKind surface_flux, VolumeForm form = VolumeForm::Weak,
                     FluxKind volume_flux = FluxKind::Central);

  const DGMesh& mesh() const { return *mesh_; }
  const Eq& equations() const { return eq_; }
  FluxKind surface_flux() const { return surface_; }
  FluxKind volume_flux() const { return volume_; }
  VolumeForm form() const { return form_; }

  void set_boundary(int face, BoundaryFn fn);
  /// Same external state on every face.
  void set_boundary_all(const BoundaryFn& fn);
  const BoundaryFn& boundary(int face) const { return boundary_.at(static_cast<std::size_t>(face)); }
  void add_source(SourceFn fn) { sources_.push_back(std::move(fn)); }
  const std::vector<SourceFn>& sources() const { return sources_; }
  void clear_sources() { sources_.clear(); }

  /// Enables subcell FV blending (split form with Euler only).
  void set_shock_capturing(std::optional<BlendParams> params);
  const std::optional<BlendParams>& shock_capturing() const { return blend_; }
  /// Overrides the indicator with a fixed alpha on every element (testing).
  void force_alpha(std::optional<double> alpha);

  std::size_t state_size() const {
    return mesh_->n_elements() * static_cast<std::size_t>(mesh_->n_nodes() * mesh_->n_nodes() * nvars);
  }
  Field make_field(double value = 0.0) const { return Field(mesh_->n_elements(), mesh_->n_nodes(), nvars, value); }

  /// Evaluates du = R(u, t). If alpha_out is given it receives the blend factors.
  /// Throws InvalidArgument on shape mismatch and InadmissibleState for a bad
  /// Euler state.
  void rhs(std::span<const double> u, std::span<double> du, double t,
           std::vector<double>* alpha_out = nullptr) const;
  void rhs(const Field& u, Field& du, double t) const { rhs(u.span(), du.span(), t); }

  /// Largest wave speed per element.
  std::vector<double> max_wave_speeds(std::span<const double> u) const;

  /// Throws InadmissibleState naming the first element with an invalid state.
  void check_admissible(std::span<const double> u) const;

 private:
  template <FluxKind S, FluxKind V>
  void rhs_impl(std::span<const double> u, std::span<double> du, double t, const std::vector<double>& alpha) const;

  const DGMesh* mesh_;
  Eq eq_;
  FluxKind surface_;
  VolumeForm form_;
  FluxKind volume_;
  std::array<BoundaryFn, 4> boundary_{};
  std::vector<SourceFn> sources_;
  std::optional<BlendParams> blend_;
  std::optional<double> forced_alpha_;
};

using EulerSemi = Semidiscretization<CompressibleEuler>;
using GravitySemi = Semidiscretization<HyperbolicDiffusion>;

extern template class Semidiscretization<CompressibleEuler>;
extern template class Semidiscretization<HyperbolicDiffusion>;

/// Two-point flux of the given kind, or InvalidArgument if unsupported by Eq.
template <FluxKind K, class Eq>
inline typename Eq::State numerical_flux(const Eq& eq, const typename Eq::State& ul,
                                         const typename Eq::State& ur, int axis) {
  if constexpr (K == FluxKind::Central) {
    return eq.flux_central(ul, ur, axis);
  } else if constexpr (K == FluxKind::Hll) {
    if constexpr (requires { eq.flux_hll(ul, ur, axis); }) return eq.flux_hll(ul, ur, axis);
    else throw InvalidArgument("HLL flux is not defined for this equation");
  } else if constexpr (K == FluxKind::Chandrashekar) {
    if constexpr (requires { eq.flux_chandrashekar(ul, ur, axis); }) return eq.flux_chandrashekar(ul, ur, axis);
    else throw InvalidArgument("Chandrashekar flux is not defined for this equation");
  } else {
    if constexpr (requires { eq.flux_llf(ul, ur, axis); }) return eq.flux_llf(ul, ur, axis);
    else throw InvalidArgument("LLF flux is not defined for this equation");
  }
}

/// Runtime-selected flux, for tests and the reference implementation.
template <class Eq>
typename Eq::State numerical_flux(FluxKind kind, const Eq& eq, const typename Eq::State& ul,
                                  const typename Eq::State& ur, int axis) {
  switch (kind) {
    case FluxKind::Hll: return numerical_flux<FluxKind::Hll>(eq, ul, ur, axis);
    case FluxKind::Llf: return numerical_flux<FluxKind::Llf>(eq, ul, ur, axis);
    case FluxKind::Chandrashekar: return numerical_flux<FluxKind::Chandrashekar>(eq, ul, ur, axis);
    default: return numerical_flux<FluxKind::Central>(eq, ul, ur, axis);
  }
}

/// Nodal index of the k-th trace node on a face.
inline std::array<int, 2> face_node(int face, int k, int n) {
  switch (face) {
    case kFaceXMinus: return {0, k};
    case kFaceXPlus: return {n - 1, k};
    case kFaceYMinus: return {k, 0};
    default: return {k, n - 1};
  }
}

}  // namespace hgdg
