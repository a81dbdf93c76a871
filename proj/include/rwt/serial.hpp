#pragma once

// Single-threaded reference versions of the OpenMP kernels. They perform the
// same arithmetic in the same order, so results must match bit for bit.

#include "rwt/geometry.hpp"
#include "rwt/kernel.hpp"
#include "rwt/montecarlo.hpp"
#include "rwt/torsion.hpp"

namespace rwt::serial {

GridSpace build_grid_space(const GridSpec& grid, const RadialKernel& k, double eps);
std::vector<double> g_values(const Domain& domain, std::size_t n_max);
CheegerResult cheeger_exhaustive(const FiniteRWSpace& space, const Domain& domain, double p);
McEstimate mc_torsion(const FiniteRWSpace& space, const Domain& domain, std::uint64_t n_samples, std::uint64_t seed);

}  // namespace rwt::serial
