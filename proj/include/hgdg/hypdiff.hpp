#pragma once

#include "hgdg/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace hgdg {

using HypDiffState = std::array<double, 3>;

struct RelaxationParams {
  double nu = 1.0;
  double length = 1.0 / (2.0 * std::numbers::pi);
  double time = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);
  double wave_speed = 2.0 * std::numbers::pi;
};

/// T_r = L_r^2 / nu and Lambda = sqrt(nu / T_r). Throws for non-positive input.
inline RelaxationParams relaxation_params(double nu, double length) {
  if (!(nu > 0.0) || !(length > 0.0))
    throw InvalidArgument("relaxation parameters need nu > 0 and L_r > 0");
  RelaxationParams r;
  r.nu = nu;
  r.length = length;
  r.time = length * length / nu;
  r.wave_speed = std::sqrt(nu / r.time);
  return r;
}

/// First-order hyperbolic diffusion system in (phi, q1, q2).
struct HyperbolicDiffusion {
  static constexpr int nvars = 3;
  using State = HypDiffState;

  RelaxationParams params;

  HyperbolicDiffusion() = default;
  explicit HyperbolicDiffusion(RelaxationParams p) : params(p) {}

  State flux(const State& u, int axis) const {
    const double a = -u[0] / params.time;
    return axis == 0 ? State{-u[1], a, 0.0} : State{-u[2], 0.0, a};
  }

  double max_wave_speed(const State&) const { return params.wave_speed; }

  /// Local Lax-Friedrichs: mean flux minus Lambda/2 jump.
  State flux_llf(const State& ul, const State& ur, int axis) const {
    const State fl = flux(ul, axis);
    const State fr = flux(ur, axis);
    const double s = 0.5 * params.wave_speed;
    return {0.5 * (fl[0] + fr[0]) - s * (ur[0] - ul[0]), 0.5 * (fl[1] + fr[1]) - s * (ur[1] - ul[1]),
            0.5 * (fl[2] + fr[2]) - s * (ur[2] - ul[2])};
  }

  State flux_central(const State& ul, const State& ur, int axis) const {
    const State fl = flux(ul, axis);
    const State fr = flux(ur, axis);
    return {0.5 * (fl[0] + fr[0]), 0.5 * (fl[1] + fr[1]), 0.5 * (fl[2] + fr[2])};
  }

  /// (forcing, -q1 / T_r, -q2 / T_r)
  State source(const State& u, double forcing) const {
    return {forcing, -u[1] / params.time, -u[2] / params.time};
  }
};

}  // namespace hgdg
