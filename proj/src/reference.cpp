#include "hgdg/reference.hpp"

#include <type_traits>
#include <vector>

namespace hgdg::reference {

namespace {

int opposite(int face) { return face ^ 1; }

std::array<int, 2> children_touching(int face) {
  switch (face) {
    case kFaceXPlus: return {0, 2};
    case kFaceXMinus: return {1, 3};
    case kFaceYPlus: return {0, 1};
    default: return {2, 3};
  }
}

}  // namespace

template <class Eq>
void rhs_serial(const Semidiscretization<Eq>& semi, std::span<const double> u, std::span<double> du, double t) {
  using State = typename Eq::State;
  constexpr int NV = Eq::nvars;
  if (semi.shock_capturing()) throw InvalidArgument("reference rhs does not support FV blending");
  if (u.size() != semi.state_size() || du.size() != semi.state_size())
    throw InvalidArgument("reference rhs: state does not match mesh");
  semi.check_admissible(u);

  const DGMesh& mesh = semi.mesh();
  const Quadtree& tree = mesh.tree();
  const Basis& b = mesh.basis();
  const TransferOperators& tr = mesh.ops().transfer;
  const Eq& eq = semi.equations();
  const int n = b.n_nodes();
  const FluxKind sk = semi.surface_flux();

  auto value = [&](std::size_t e, int i, int j) {
    State s;
    for (int v = 0; v < NV; ++v) s[v] = u[((e * n + j) * n + i) * NV + v];
    return s;
  };
  auto trace = [&](std::size_t e, int face) {
    std::vector<State> out(n);
    for (int k = 0; k < n; ++k) {
      const auto nd = face_node(face, k, n);
      out[k] = value(e, nd[0], nd[1]);
    }
    return out;
  };
  auto apply = [&](const Matrix& m, const std::vector<State>& in) {
    std::vector<State> out(n);
    for (int k = 0; k < n; ++k) {
      State s{};
      for (int l = 0; l < n; ++l)
        for (int v = 0; v < NV; ++v) s[v] += m(k, l) * in[l][v];
      out[k] = s;
    }
    return out;
  };
  auto oriented = [&](bool plus, const State& inner, const State& outer, int axis) {
    return plus ? numerical_flux(sk, eq, inner, outer, axis) : numerical_flux(sk, eq, outer, inner, axis);
  };

  Matrix dsplit = 2.0 * b.derivative;
  dsplit(0, 0) += 1.0 / b.weights[0];
  dsplit(n - 1, n - 1) -= 1.0 / b.weights[n - 1];

  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const auto& geo = mesh.element(e);
    const Cell& cell = tree.cell(geo.cell);
    const double jac = 0.5 * geo.h;

    std::array<std::vector<State>, 4> face_flux;
    for (int f = 0; f < 4; ++f) {
      const int axis = f / 2;
      const bool plus = (f % 2) == 1;
      const auto mine = trace(e, f);
      std::vector<State> flux(n);
      const auto pos = tree.neighbor_position(cell, f);
      if (!pos) {
        for (int k = 0; k < n; ++k) {
          double x, y;
          if (axis == 0) {
            x = plus ? geo.x0 + geo.h : geo.x0;
            y = mesh.node_y(e, k);
          } else {
            x = mesh.node_x(e, k);
            y = plus ? geo.y0 + geo.h : geo.y0;
          }
          flux[k] = oriented(plus, mine[k], semi.boundary(f)(x, y, t), axis);
        }
      } else if (const auto nb = tree.find(cell.level, (*pos)[0], (*pos)[1])) {
        const Cell& other = tree.cell(*nb);
        if (other.leaf()) {
          const auto theirs = trace(static_cast<std::size_t>(mesh.element_of_cell(*nb)), opposite(f));
          for (int k = 0; k < n; ++k) flux[k] = oriented(plus, mine[k], theirs[k], axis);
        } else {
          const auto kids = children_touching(f);
          for (auto& s : flux) s.fill(0.0);
          for (int half = 0; half < 2; ++half) {
            const auto child = static_cast<std::size_t>(mesh.element_of_cell(other.children[kids[half]]));
            const auto projected = apply(tr.forward(half), mine);
            const auto theirs = trace(child, opposite(f));
            std::vector<State> fm(n);
            for (int k = 0; k < n; ++k) fm[k] = oriented(plus, projected[k], theirs[k], axis);
            const auto back = apply(tr.reverse(half), fm);
            for (int k = 0; k < n; ++k)
              for (int v = 0; v < NV; ++v) flux[k][v] += back[k][v];
          }
        }
      } else {
        const Cell& parent = tree.cell(cell.parent);
        const auto ppos = tree.neighbor_position(parent, f);
        const auto large = tree.find(parent.level, (*ppos)[0], (*ppos)[1]);
        const auto le = static_cast<std::size_t>(mesh.element_of_cell(*large));
        const int half = static_cast<int>(axis == 0 ? (cell.iy & 1) : (cell.ix & 1));
        const auto projected = apply(tr.forward(half), trace(le, opposite(f)));
        for (int k = 0; k < n; ++k) flux[k] = oriented(plus, mine[k], projected[k], axis);
      }
      face_flux[f] = std::move(flux);
    }

    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        State acc{};
        const State ui = value(e, i, j);
        for (int k = 0; k < n; ++k) {
          const State ux = value(e, k, j);
          const State uy = value(e, i, k);
          if (semi.form() == VolumeForm::Weak) {
            const State f1 = eq.flux(ux, 0);
            const State f2 = eq.flux(uy, 1);
            const double cx = b.weights[k] * b.derivative(k, i) / b.weights[i];
            const double cy = b.weights[k] * b.derivative(k, j) / b.weights[j];
            for (int v = 0; v < NV; ++v) acc[v] += (cx * f1[v] + cy * f2[v]) / jac;
          } else {
            const State f1 = numerical_flux(semi.volume_flux(), eq, ui, ux, 0);
            const State f2 = numerical_flux(semi.volume_flux(), eq, ui, uy, 1);
            for (int v = 0; v < NV; ++v) acc[v] -= (dsplit(i, k) * f1[v] + dsplit(j, k) * f2[v]) / jac;
          }
        }
        for (int v = 0; v < NV; ++v) {
          if (i == 0) acc[v] += face_flux[kFaceXMinus][j][v] / (b.weights[0] * jac);
          if (i == n - 1) acc[v] -= face_flux[kFaceXPlus][j][v] / (b.weights[n - 1] * jac);
          if (j == 0) acc[v] += face_flux[kFaceYMinus][i][v] / (b.weights[0] * jac);
          if (j == n - 1) acc[v] -= face_flux[kFaceYPlus][i][v] / (b.weights[n - 1] * jac);
        }
        if constexpr (std::is_same_v<Eq, HyperbolicDiffusion>) {
          const State s = eq.source(ui, 0.0);
          for (int v = 0; v < NV; ++v) acc[v] += s[v];
        }
        for (int v = 0; v < NV; ++v) du[((e * n + j) * n + i) * NV + v] = acc[v];
      }
    }
  }
  for (const auto& src : semi.sources()) src(u, t, du);
}

template void rhs_serial<CompressibleEuler>(const Semidiscretization<CompressibleEuler>&, std::span<const double>,
                                            std::span<double>, double);
template void rhs_serial<HyperbolicDiffusion>(const Semidiscretization<HyperbolicDiffusion>&,
                                              std::span<const double>, std::span<double>, double);

}  // namespace hgdg::reference
