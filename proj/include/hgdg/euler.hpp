#pragma once

#include "hgdg/errors.hpp"

#include <array>
#include <cmath>
#include <string>

namespace hgdg {

using EulerState = std::array<double, 4>;

struct Primitive {
  double rho;
  double v1;
  double v2;
  double p;
};

/// Logarithmic mean (b - a) / (ln b - ln a), with a series branch near a == b.
/// Throws InvalidArgument for non-positive input.
inline double logmean(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("logmean: arguments must be positive");
  const double zeta = a / b;
  const double f = (zeta - 1.0) / (zeta + 1.0);
  const double u = f * f;
  if (u < 1e-4) return (a + b) / (2.0 * (1.0 + u / 3.0 + u * u / 5.0 + u * u * u / 7.0));
  return (b - a) / (std::log(b) - std::log(a));
}

/// Ideal-gas Euler equations in conservative variables (rho, rho v1, rho v2, E).
struct CompressibleEuler {
  static constexpr int nvars = 4;
  using State = EulerState;

  double gamma = 1.4;

  CompressibleEuler() = default;
  explicit CompressibleEuler(double g) : gamma(g) {
    if (!(g > 1.0)) throw InvalidArgument("heat capacity ratio must exceed 1");
  }

  double pressure(const State& u) const {
    return (gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0]);
  }

  bool admissible(const State& u) const {
    return u[0] > 0.0 && pressure(u) > 0.0 && std::isfinite(u[3]) && std::isfinite(u[1]) &&
           std::isfinite(u[2]);
  }

  /// Throws InadmissibleState for non-positive (or NaN) density.
  Primitive cons2prim(const State& u) const {
    if (!(u[0] > 0.0)) throw InadmissibleState("non-positive density " + std::to_string(u[0]));
    const double v1 = u[1] / u[0];
    const double v2 = u[2] / u[0];
    return {u[0], v1, v2, (gamma - 1.0) * (u[3] - 0.5 * u[0] * (v1 * v1 + v2 * v2))};
  }

  State prim2cons(const Primitive& w) const {
    return {w.rho, w.rho * w.v1, w.rho * w.v2,
            w.p / (gamma - 1.0) + 0.5 * w.rho * (w.v1 * w.v1 + w.v2 * w.v2)};
  }

  State flux(const State& u, int axis) const {
    const auto w = cons2prim(u);
    const double vn = axis == 0 ? w.v1 : w.v2;
    const double mn = u[0] * vn;
    State f{mn, mn * w.v1, mn * w.v2, (u[3] + w.p) * vn};
    f[1 + axis] += w.p;
    return f;
  }

  double sound_speed(const State& u) const {
    const auto w = cons2prim(u);
    return std::sqrt(gamma * w.p / w.rho);
  }

  /// Directional estimate max(|v1|, |v2|) + c.
  double max_wave_speed(const State& u) const {
    const auto w = cons2prim(u);
    const double c = std::sqrt(gamma * w.p / w.rho);
    return std::max(std::abs(w.v1), std::abs(w.v2)) + c;
  }

  /// HLL with Davis wave-speed estimates.
  State flux_hll(const State& ul, const State& ur, int axis) const {
    const auto wl = cons2prim(ul);
    const auto wr = cons2prim(ur);
    const double vl = axis == 0 ? wl.v1 : wl.v2;
    const double vr = axis == 0 ? wr.v1 : wr.v2;
    const double cl = std::sqrt(gamma * wl.p / wl.rho);
    const double cr = std::sqrt(gamma * wr.p / wr.rho);
    const double sl = std::min(vl - cl, vr - cr);
    const double sr = std::max(vl + cl, vr + cr);
    if (sl >= 0.0) return flux(ul, axis);
    if (sr <= 0.0) return flux(ur, axis);
    const State fl = flux(ul, axis);
    const State fr = flux(ur, axis);
    State f;
    const double inv = 1.0 / (sr - sl);
    for (int v = 0; v < 4; ++v) f[v] = (sr * fl[v] - sl * fr[v] + sl * sr * (ur[v] - ul[v])) * inv;
    return f;
  }

  /// Entropy-conserving and kinetic-energy-preserving two-point flux.
  State flux_chandrashekar(const State& ul, const State& ur, int axis) const {
    const auto wl = cons2prim(ul);
    const auto wr = cons2prim(ur);
    const double beta_l = 0.5 * wl.rho / wl.p;
    const double beta_r = 0.5 * wr.rho / wr.p;
    const double rho_mean = logmean(wl.rho, wr.rho);
    const double beta_mean = logmean(beta_l, beta_r);
    const double v1 = 0.5 * (wl.v1 + wr.v1);
    const double v2 = 0.5 * (wl.v2 + wr.v2);
    const double p_mean = 0.5 * (wl.rho + wr.rho) / (beta_l + beta_r);
    const double vsq = 0.5 * (wl.v1 * wl.v1 + wl.v2 * wl.v2 + wr.v1 * wr.v1 + wr.v2 * wr.v2);
    const double vn = axis == 0 ? v1 : v2;
    const double f1 = rho_mean * vn;
    State f{f1, f1 * v1, f1 * v2, 0.0};
    f[1 + axis] += p_mean;
    f[3] = f1 * 0.5 * (1.0 / ((gamma - 1.0) * beta_mean) - vsq) + f[1] * v1 + f[2] * v2;
    return f;
  }

  State flux_central(const State& ul, const State& ur, int axis) const {
    const State fl = flux(ul, axis);
    const State fr = flux(ur, axis);
    return {0.5 * (fl[0] + fr[0]), 0.5 * (fl[1] + fr[1]), 0.5 * (fl[2] + fr[2]), 0.5 * (fl[3] + fr[3])};
  }

  /// Source (0, -rho phi_x, -rho phi_y, -rho v . grad phi).
  static State gravity_source(const State& u, double phi_x, double phi_y) {
    return {0.0, -u[0] * phi_x, -u[0] * phi_y, -(u[1] * phi_x + u[2] * phi_y)};
  }

  /// Entropy variables of the mathematical entropy -rho s / (gamma - 1).
  State entropy_variables(const State& u) const {
    const auto w = cons2prim(u);
    const double s = std::log(w.p) - gamma * std::log(w.rho);
    const double rho_p = w.rho / w.p;
    return {(gamma - s) / (gamma - 1.0) - 0.5 * rho_p * (w.v1 * w.v1 + w.v2 * w.v2), rho_p * w.v1,
            rho_p * w.v2, -rho_p};
  }

  double entropy(const State& u) const {
    const auto w = cons2prim(u);
    return -w.rho * (std::log(w.p) - gamma * std::log(w.rho)) / (gamma - 1.0);
  }

  /// Entropy flux potential rho v_axis.
  static double flux_potential(const State& u, int axis) { return u[1 + axis]; }
};

}  // namespace hgdg
