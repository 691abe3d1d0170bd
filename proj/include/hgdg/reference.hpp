#pragma once

#include "hgdg/semidisc.hpp"

#include <span>

namespace hgdg::reference {

/// Straightforward single-threaded evaluation of the DG operator of `semi`.
///
/// Every element gathers its own face fluxes by querying the quadtree, so
/// shared faces are evaluated twice. Supports the weak and split forms and
/// mortars; FV blending is not supported (throws InvalidArgument when the
/// operator has shock capturing enabled). Kept as a cross-check for the
/// parallel kernels and as the serial baseline of the benchmark.
template <class Eq>
void rhs_serial(const Semidiscretization<Eq>& semi, std::span<const double> u, std::span<double> du, double t);

extern template void rhs_serial<CompressibleEuler>(const Semidiscretization<CompressibleEuler>&,
                                                   std::span<const double>, std::span<double>, double);
extern template void rhs_serial<HyperbolicDiffusion>(const Semidiscretization<HyperbolicDiffusion>&,
                                                     std::span<const double>, std::span<double>, double);

}  // namespace hgdg::reference
