#include "hgdg/semidisc.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <type_traits>

namespace hgdg {

namespace {

template <FluxKind K>
using FluxTag = std::integral_constant<FluxKind, K>;

template <class F>
void with_flux(FluxKind kind, F&& f) {
  switch (kind) {
    case FluxKind::Hll: f(FluxTag<FluxKind::Hll>{}); break;
    case FluxKind::Llf: f(FluxTag<FluxKind::Llf>{}); break;
    case FluxKind::Chandrashekar: f(FluxTag<FluxKind::Chandrashekar>{}); break;
    case FluxKind::Central: f(FluxTag<FluxKind::Central>{}); break;
  }
}

template <class Eq>
bool supports(FluxKind kind) {
  if constexpr (std::is_same_v<Eq, CompressibleEuler>) {
    return kind == FluxKind::Hll || kind == FluxKind::Chandrashekar || kind == FluxKind::Central;
  } else {
    return kind == FluxKind::Llf || kind == FluxKind::Central;
  }
}

bool is_plus(int face) { return face == kFaceXPlus || face == kFaceYPlus; }

}  // namespace

FluxKind parse_flux_kind(const std::string& name) {
  if (name == "hll") return FluxKind::Hll;
  if (name == "llf") return FluxKind::Llf;
  if (name == "chandrashekar") return FluxKind::Chandrashekar;
  if (name == "central") return FluxKind::Central;
  throw InvalidArgument("unknown flux '" + name + "'");
}

std::string to_string(FluxKind kind) {
  switch (kind) {
    case FluxKind::Hll: return "hll";
    case FluxKind::Llf: return "llf";
    case FluxKind::Chandrashekar: return "chandrashekar";
    default: return "central";
  }
}

double indicator_energy(std::span<const double> element_state, const Basis& basis, const CompressibleEuler& eq) {
  const int n = basis.n_nodes();
  if (element_state.size() != static_cast<std::size_t>(n * n * 4))
    throw InvalidArgument("indicator_energy: element state has the wrong size");
  std::vector<double> ind(static_cast<std::size_t>(n * n));
  for (int q = 0; q < n * n; ++q) {
    const EulerState u{element_state[4 * q], element_state[4 * q + 1], element_state[4 * q + 2],
                       element_state[4 * q + 3]};
    ind[q] = u[0] * eq.pressure(u);
  }
  const Matrix& vinv = basis.inverse_vandermonde;
  std::vector<double> tmp(ind.size(), 0.0);
  std::vector<double> modal(ind.size(), 0.0);
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i) tmp[j * n + a] += vinv(a, i) * ind[j * n + i];
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a)
      for (int j = 0; j < n; ++j) modal[b * n + a] += vinv(b, j) * tmp[j * n + a];

  double total = 0.0, clip1 = 0.0, clip2 = 0.0;
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) {
      const double m2 = modal[b * n + a] * modal[b * n + a];
      total += m2;
      if (a < n - 1 && b < n - 1) clip1 += m2;
      if (a < n - 2 && b < n - 2) clip2 += m2;
    }
  const double frac1 = total > 0.0 ? (total - clip1) / total : 0.0;
  const double frac2 = clip1 > 0.0 ? (clip1 - clip2) / clip1 : 0.0;
  return std::max(frac1, frac2);
}

double blending_indicator(std::span<const double> element_state, const Basis& basis,
                          const CompressibleEuler& eq, const BlendParams& params) {
  const double energy = indicator_energy(element_state, basis, eq);
  const double threshold = params.threshold(basis.degree);
  double alpha = 1.0 / (1.0 + std::exp(-params.sharpness / threshold * (energy - threshold)));
  if (alpha < params.alpha_min) alpha = 0.0;
  else if (alpha > 1.0 - params.alpha_min) alpha = 1.0;
  return std::min(alpha, params.alpha_max);
}

std::vector<double> blending_alpha(const DGMesh& mesh, std::span<const double> state,
                                   const CompressibleEuler& eq, const BlendParams& params) {
  const std::size_t ne = mesh.n_elements();
  const std::size_t esize = static_cast<std::size_t>(mesh.n_nodes() * mesh.n_nodes() * 4);
  if (state.size() != ne * esize) throw InvalidArgument("blending_alpha: state does not match mesh");
  std::vector<double> raw(ne, 0.0);
  detail::ErrorSlot err;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t e = 0; e < static_cast<std::ptrdiff_t>(ne); ++e) {
    err.run([&] { raw[e] = blending_indicator(state.subspan(e * esize, esize), mesh.basis(), eq, params); });
  }
  err.rethrow();
  if (params.smoothing <= 0.0) return raw;
  std::vector<double> alpha = raw;
  for (std::size_t e = 0; e < ne; ++e)
    for (std::size_t nb : mesh.neighbors()[e]) alpha[e] = std::max(alpha[e], params.smoothing * raw[nb]);
  return alpha;
}

template <class Eq>
Semidiscretization<Eq>::Semidiscretization(const DGMesh& mesh, Eq eq, FluxKind surface_flux, VolumeForm form,
                                           FluxKind volume_flux)
    : mesh_(&mesh), eq_(eq), surface_(surface_flux), form_(form), volume_(volume_flux) {
  if (!supports<Eq>(surface_flux))
    throw InvalidArgument("surface flux '" + to_string(surface_flux) + "' does not apply to these equations");
  if (form == VolumeForm::Split) {
    if (!supports<Eq>(volume_flux))
      throw InvalidArgument("volume flux '" + to_string(volume_flux) + "' does not apply to these equations");
    if (volume_flux != FluxKind::Central && volume_flux != FluxKind::Chandrashekar)
      throw InvalidArgument("split form needs a symmetric volume flux (central or chandrashekar)");
  }
}

template <class Eq>
void Semidiscretization<Eq>::set_boundary(int face, BoundaryFn fn) {
  if (face < 0 || face > 3) throw InvalidArgument("boundary face must lie in [0, 3]");
  boundary_[face] = std::move(fn);
}

template <class Eq>
void Semidiscretization<Eq>::set_boundary_all(const BoundaryFn& fn) {
  for (int f = 0; f < 4; ++f) boundary_[f] = fn;
}

template <class Eq>
void Semidiscretization<Eq>::set_shock_capturing(std::optional<BlendParams> params) {
  if (params) {
    if constexpr (!std::is_same_v<Eq, CompressibleEuler>) {
      throw InvalidArgument("shock capturing is only available for the Euler equations");
    }
    if (form_ != VolumeForm::Split) throw InvalidArgument("shock capturing requires the split form");
    if (!(params->alpha_max >= 0.0 && params->alpha_max <= 1.0))
      throw InvalidArgument("alpha_max must lie in [0, 1]");
  }
  blend_ = params;
}

template <class Eq>
void Semidiscretization<Eq>::force_alpha(std::optional<double> alpha) {
  if (alpha) {
    if (form_ != VolumeForm::Split) throw InvalidArgument("blending requires the split form");
    if (!(*alpha >= 0.0 && *alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  }
  forced_alpha_ = alpha;
}

template <class Eq>
void Semidiscretization<Eq>::check_admissible(std::span<const double> u) const {
  if constexpr (std::is_same_v<Eq, CompressibleEuler>) {
    const std::size_t nodes = static_cast<std::size_t>(mesh_->n_nodes() * mesh_->n_nodes());
    const std::ptrdiff_t ne = static_cast<std::ptrdiff_t>(mesh_->n_elements());
    std::ptrdiff_t bad = std::numeric_limits<std::ptrdiff_t>::max();
#pragma omp parallel for schedule(static) reduction(min : bad)
    for (std::ptrdiff_t e = 0; e < ne; ++e) {
      for (std::size_t q = 0; q < nodes; ++q) {
        const double* p = u.data() + (e * nodes + q) * 4;
        if (!eq_.admissible({p[0], p[1], p[2], p[3]})) {
          bad = std::min(bad, e);
          break;
        }
      }
    }
    if (bad != std::numeric_limits<std::ptrdiff_t>::max()) {
      const double* p = u.data() + static_cast<std::size_t>(bad) * nodes * 4;
      for (std::size_t q = 0; q < nodes; ++q, p += 4) {
        const EulerState s{p[0], p[1], p[2], p[3]};
        if (!eq_.admissible(s))
          throw InadmissibleState(static_cast<std::size_t>(bad),
                                  "inadmissible Euler state: rho = " + std::to_string(s[0]) +
                                      ", p = " + std::to_string(eq_.pressure(s)));
      }
    }
  } else {
    (void)u;
  }
}

template <class Eq>
std::vector<double> Semidiscretization<Eq>::max_wave_speeds(std::span<const double> u) const {
  if (u.size() != state_size()) throw InvalidArgument("max_wave_speeds: state does not match mesh");
  const std::size_t nodes = static_cast<std::size_t>(mesh_->n_nodes() * mesh_->n_nodes());
  std::vector<double> out(mesh_->n_elements(), 0.0);
  detail::ErrorSlot err;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t e = 0; e < static_cast<std::ptrdiff_t>(out.size()); ++e) {
    err.run([&] {
      double lam = 0.0;
      for (std::size_t q = 0; q < nodes; ++q) {
        State s;
        const double* p = u.data() + (e * nodes + q) * nvars;
        for (int v = 0; v < nvars; ++v) s[v] = p[v];
        lam = std::max(lam, eq_.max_wave_speed(s));
      }
      out[e] = lam;
    });
  }
  err.rethrow();
  return out;
}

template <class Eq>
void Semidiscretization<Eq>::rhs(std::span<const double> u, std::span<double> du, double t,
                                 std::vector<double>* alpha_out) const {
  if (u.size() != state_size() || du.size() != state_size())
    throw InvalidArgument("rhs: state has " + std::to_string(u.size()) + " values, mesh expects " +
                          std::to_string(state_size()));
  for (const auto& b : mesh_->boundaries())
    if (!boundary_[b.face])
      throw InvalidArgument("rhs: no boundary condition registered for face " + std::to_string(b.face));
  check_admissible(u);

  std::vector<double> alpha;
  if constexpr (std::is_same_v<Eq, CompressibleEuler>) {
    if (forced_alpha_) alpha.assign(mesh_->n_elements(), *forced_alpha_);
    else if (blend_) alpha = blending_alpha(*mesh_, u, eq_, *blend_);
  }
  with_flux(surface_, [&](auto s) {
    with_flux(volume_, [&](auto v) {
      if constexpr (std::is_same_v<Eq, CompressibleEuler>) {
        if constexpr ((std::remove_cvref_t<decltype(s)>::value == FluxKind::Hll || std::remove_cvref_t<decltype(s)>::value == FluxKind::Chandrashekar ||
                       std::remove_cvref_t<decltype(s)>::value == FluxKind::Central) &&
                      (std::remove_cvref_t<decltype(v)>::value == FluxKind::Chandrashekar || std::remove_cvref_t<decltype(v)>::value == FluxKind::Central))
          rhs_impl<std::remove_cvref_t<decltype(s)>::value, std::remove_cvref_t<decltype(v)>::value>(u, du, t, alpha);
      } else {
        if constexpr ((std::remove_cvref_t<decltype(s)>::value == FluxKind::Llf || std::remove_cvref_t<decltype(s)>::value == FluxKind::Central) && std::remove_cvref_t<decltype(v)>::value == FluxKind::Central)
          rhs_impl<std::remove_cvref_t<decltype(s)>::value, std::remove_cvref_t<decltype(v)>::value>(u, du, t, alpha);
      }
    });
  });
  for (const auto& src : sources_) src(u, t, du);
  if (alpha_out) *alpha_out = alpha.empty() ? std::vector<double>(mesh_->n_elements(), 0.0) : std::move(alpha);
}

template <class Eq>
template <FluxKind S, FluxKind V>
void Semidiscretization<Eq>::rhs_impl(std::span<const double> u, std::span<double> du, double t,
                                      const std::vector<double>& alpha) const {
  constexpr int NV = nvars;
  const DGMesh& mesh = *mesh_;
  const Basis& basis = mesh.basis();
  const TransferOperators& transfer = mesh.ops().transfer;
  const int n = basis.n_nodes();
  const std::size_t nn = static_cast<std::size_t>(n * n);
  const std::size_t ne = mesh.n_elements();

  auto at = [n](std::size_t e, int i, int j) {
    return ((e * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)) * n + i) * NV;
  };
  auto load = [&u](std::size_t off) {
    State s;
    for (int v = 0; v < NV; ++v) s[v] = u[off + v];
    return s;
  };
  std::vector<double> surf(ne * 4 * static_cast<std::size_t>(n) * NV, 0.0);
  auto sidx = [n](std::size_t e, int face, int k) {
    return ((e * 4 + static_cast<std::size_t>(face)) * n + k) * NV;
  };
  auto store = [&surf](std::size_t off, const State& f) {
    for (int v = 0; v < NV; ++v) surf[off + v] = f[v];
  };

  detail::ErrorSlot err;

  const auto& ifaces = mesh.interfaces();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(ifaces.size()); ++q) {
    err.run([&] {
      const auto& f = ifaces[q];
      const int fp = 2 * f.axis + 1;
      const int fm = 2 * f.axis;
      for (int k = 0; k < n; ++k) {
        const auto nl = face_node(fp, k, n);
        const auto nr = face_node(fm, k, n);
        const State flux = numerical_flux<S>(eq_, load(at(f.left, nl[0], nl[1])), load(at(f.right, nr[0], nr[1])), f.axis);
        store(sidx(f.left, fp, k), flux);
        store(sidx(f.right, fm, k), flux);
      }
    });
  }
  err.rethrow();

  const auto& mortars = mesh.mortars();
#pragma omp parallel
  {
    std::vector<State> trace(n), proj(n);
    std::array<std::vector<State>, 2> fm{std::vector<State>(n), std::vector<State>(n)};
#pragma omp for schedule(static)
    for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(mortars.size()); ++q) {
      err.run([&] {
        const auto& m = mortars[q];
        const int large_face = m.large_is_left ? 2 * m.axis + 1 : 2 * m.axis;
        const int small_face = m.large_is_left ? 2 * m.axis : 2 * m.axis + 1;
        for (int k = 0; k < n; ++k) {
          const auto nd = face_node(large_face, k, n);
          trace[k] = load(at(m.large, nd[0], nd[1]));
        }
        for (int half = 0; half < 2; ++half) {
          const Matrix& p = transfer.forward(half);
          for (int k = 0; k < n; ++k) {
            State s{};
            for (int l = 0; l < n; ++l)
              for (int v = 0; v < NV; ++v) s[v] += p(k, l) * trace[l][v];
            proj[k] = s;
          }
          const std::size_t se = m.small[half];
          for (int k = 0; k < n; ++k) {
            const auto nd = face_node(small_face, k, n);
            const State us = load(at(se, nd[0], nd[1]));
            const State flux = m.large_is_left ? numerical_flux<S>(eq_, proj[k], us, m.axis)
                                               : numerical_flux<S>(eq_, us, proj[k], m.axis);
            fm[half][k] = flux;
            store(sidx(se, small_face, k), flux);
          }
        }
        for (int k = 0; k < n; ++k) {
          State s{};
          for (int half = 0; half < 2; ++half) {
            const Matrix& r = transfer.reverse(half);
            for (int l = 0; l < n; ++l)
              for (int v = 0; v < NV; ++v) s[v] += r(k, l) * fm[half][l][v];
          }
          store(sidx(m.large, large_face, k), s);
        }
      });
    }
  }
  err.rethrow();

  const auto& bounds = mesh.boundaries();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(bounds.size()); ++q) {
    err.run([&] {
      const auto& b = bounds[q];
      const auto& g = mesh.element(b.element);
      for (int k = 0; k < n; ++k) {
        double x, y;
        if (b.face < 2) {
          x = b.face == kFaceXMinus ? g.x0 : g.x0 + g.h;
          y = mesh.node_y(b.element, k);
        } else {
          x = mesh.node_x(b.element, k);
          y = b.face == kFaceYMinus ? g.y0 : g.y0 + g.h;
        }
        const auto nd = face_node(b.face, k, n);
        const State ui = load(at(b.element, nd[0], nd[1]));
        const State ue = boundary_[b.face](x, y, t);
        const int axis = b.face / 2;
        const State flux = is_plus(b.face) ? numerical_flux<S>(eq_, ui, ue, axis) : numerical_flux<S>(eq_, ue, ui, axis);
        store(sidx(b.element, b.face, k), flux);
      }
    });
  }
  err.rethrow();

  const Matrix& dweak = basis.derivative_weak;
  const Matrix& dsplit = basis.derivative_split;
  const Vector& w = basis.weights;
  const bool split = form_ == VolumeForm::Split;
#pragma omp parallel
  {
    std::vector<State> ue(nn), acc(nn), fv(nn), fx(nn), fy(nn);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ei = 0; ei < static_cast<std::ptrdiff_t>(ne); ++ei) {
      err.run([&] {
        const std::size_t e = static_cast<std::size_t>(ei);
        const double jac = mesh.jacobian(e);
        const double inv_j = 1.0 / jac;
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) ue[j * n + i] = load(at(e, i, j));
        for (auto& a : acc) a.fill(0.0);

        if (!split) {
          for (std::size_t q = 0; q < nn; ++q) {
            fx[q] = eq_.flux(ue[q], 0);
            fy[q] = eq_.flux(ue[q], 1);
          }
          for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
              State& a = acc[j * n + i];
              for (int k = 0; k < n; ++k) {
                const double cx = dweak(i, k);
                const double cy = dweak(j, k);
                const State& f1 = fx[j * n + k];
                const State& f2 = fy[k * n + i];
                for (int v = 0; v < NV; ++v) a[v] += cx * f1[v] + cy * f2[v];
              }
              for (int v = 0; v < NV; ++v) a[v] *= inv_j;
            }
        } else {
          for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
              const State& ui = ue[j * n + i];
              const State f1 = eq_.flux(ui, 0);
              const State f2 = eq_.flux(ui, 1);
              State& a = acc[j * n + i];
              for (int v = 0; v < NV; ++v) a[v] -= dsplit(i, i) * f1[v] + dsplit(j, j) * f2[v];
              for (int k = i + 1; k < n; ++k) {
                const State f = numerical_flux<V>(eq_, ui, ue[j * n + k], 0);
                State& b = acc[j * n + k];
                for (int v = 0; v < NV; ++v) {
                  a[v] -= dsplit(i, k) * f[v];
                  b[v] -= dsplit(k, i) * f[v];
                }
              }
              for (int k = j + 1; k < n; ++k) {
                const State f = numerical_flux<V>(eq_, ui, ue[k * n + i], 1);
                State& b = acc[k * n + i];
                for (int v = 0; v < NV; ++v) {
                  a[v] -= dsplit(j, k) * f[v];
                  b[v] -= dsplit(k, j) * f[v];
                }
              }
            }
          for (auto& a : acc)
            for (int v = 0; v < NV; ++v) a[v] *= inv_j;

          const double al = alpha.empty() ? 0.0 : alpha[e];
          if (al > 0.0) {
            for (auto& a : fv) a.fill(0.0);
            for (int j = 0; j < n; ++j)
              for (int i = 0; i + 1 < n; ++i) {
                const State f = numerical_flux<S>(eq_, ue[j * n + i], ue[j * n + i + 1], 0);
                for (int v = 0; v < NV; ++v) {
                  fv[j * n + i][v] -= f[v] / (w[i] * jac);
                  fv[j * n + i + 1][v] += f[v] / (w[i + 1] * jac);
                }
              }
            for (int j = 0; j + 1 < n; ++j)
              for (int i = 0; i < n; ++i) {
                const State f = numerical_flux<S>(eq_, ue[j * n + i], ue[(j + 1) * n + i], 1);
                for (int v = 0; v < NV; ++v) {
                  fv[j * n + i][v] -= f[v] / (w[j] * jac);
                  fv[(j + 1) * n + i][v] += f[v] / (w[j + 1] * jac);
                }
              }
            for (std::size_t q = 0; q < nn; ++q)
              for (int v = 0; v < NV; ++v) acc[q][v] = (1.0 - al) * acc[q][v] + al * fv[q][v];
          }
        }

        // Surface terms shared by the DG and the subcell FV operator.
        const double lift_lo = 1.0 / (w[0] * jac);
        const double lift_hi = 1.0 / (w[n - 1] * jac);
        for (int k = 0; k < n; ++k) {
          const double* fxm = surf.data() + sidx(e, kFaceXMinus, k);
          const double* fxp = surf.data() + sidx(e, kFaceXPlus, k);
          const double* fym = surf.data() + sidx(e, kFaceYMinus, k);
          const double* fyp = surf.data() + sidx(e, kFaceYPlus, k);
          for (int v = 0; v < NV; ++v) {
            acc[k * n + 0][v] += fxm[v] * lift_lo;
            acc[k * n + n - 1][v] -= fxp[v] * lift_hi;
            acc[0 * n + k][v] += fym[v] * lift_lo;
            acc[(n - 1) * n + k][v] -= fyp[v] * lift_hi;
          }
        }

        if constexpr (std::is_same_v<Eq, HyperbolicDiffusion>) {
          const double inv_tr = 1.0 / eq_.params.time;
          for (std::size_t q = 0; q < nn; ++q) {
            acc[q][1] -= ue[q][1] * inv_tr;
            acc[q][2] -= ue[q][2] * inv_tr;
          }
        }

        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) {
            const std::size_t off = at(e, i, j);
            for (int v = 0; v < NV; ++v) du[off + v] = acc[j * n + i][v];
          }
      });
    }
  }
  err.rethrow();
}

template class Semidiscretization<CompressibleEuler>;
template class Semidiscretization<HyperbolicDiffusion>;

}  // namespace hgdg
