#pragma once

#include "rwt/space.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rwt {

/// Uniform grid of cubic cells on an axis-aligned box in R^dim.
struct GridSpec {
  int dim = 1;
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{1.0, 1.0, 1.0};
  double h = 0.1;

  /// Cells per axis; throws InvalidArgument unless (hi-lo)/h is a positive integer.
  std::array<std::size_t, 3> shape() const;
  std::size_t cell_count() const;
  std::array<std::size_t, 3> unravel(std::size_t cell) const;
  std::size_t ravel(const std::array<std::size_t, 3>& idx) const;
  std::array<double, 3> center(std::size_t cell) const;
};

enum class Profile { uniform, tent, gauss };

/// Radially symmetric kernel J with integral 1. `radius` is the support
/// radius (the cutoff for gauss).
struct RadialKernel {
  Profile profile = Profile::uniform;
  double radius = 1.0;
  double sigma = 1.0;

  /// Unnormalized radial profile.
  double shape(double r) const;
  /// Normalizing constant so that the integral over R^dim is 1.
  double normalization(int dim) const;
  double operator()(double r, int dim) const { return normalization(dim) * shape(r); }
};

RadialKernel uniform_kernel(double radius);
RadialKernel tent_kernel(double radius);
RadialKernel gauss_kernel(double sigma, double cutoff);
/// `uniform:<radius>`, `tent:<radius>`, `gauss:<sigma>:<cutoff>`.
RadialKernel parse_kernel_spec(std::string_view spec);
std::string kernel_spec_string(const RadialKernel& k);

/// Integral of |x|^k J(x) over R^dim by radial quadrature.
double radial_moment(const RadialKernel& k, int dim, int power);
double kernel_mass(const RadialKernel& k, int dim);
/// 2 / integral of J(x) x_N^2.
double rescale_constant_2(const RadialKernel& k, int dim);
/// 2 / integral of J(x) |x_N|.
double rescale_constant_1(const RadialKernel& k, int dim);

struct GridSpace {
  GridSpec grid;
  FiniteRWSpace space;
};

/// One stencil entry: integer cell offset and raw mass J_eps(o h) h^dim.
struct StencilEntry {
  std::array<int, 3> offset;
  double mass;
};

std::vector<StencilEntry> make_stencil(const GridSpec& grid, const RadialKernel& k, double eps);
/// Row of `cell` as (column, raw mass) pairs in column order.
std::vector<std::pair<std::size_t, double>> stencil_row(const GridSpec& grid, const std::vector<StencilEntry>& stencil,
                                                         std::size_t cell);

/// Cell-center discretization of J_eps. Rows are renormalized by their raw
/// sum s_x and nu(x) = h^dim s_x. Throws KernelEscapesBox when a watch cell
/// (default: the cell nearest the box center) loses more than 0.1% of its
/// stencil mass to the box edge.
GridSpace build_grid_space(const GridSpec& grid, const RadialKernel& k, double eps,
                           const std::vector<std::size_t>& watch_cells = {});

std::string cell_id(const GridSpec& grid, std::size_t cell);

/// The |omega| cells nearest the box center, ties by cell index.
std::vector<std::size_t> symmetrize_set(const GridSpec& grid, const std::vector<std::size_t>& omega_cells);

struct Region {
  enum class Kind { box, ball } kind = Kind::box;
  int dim = 1;
  std::array<double, 3> lo{0.0, 0.0, 0.0};  // box corners, or ball center in lo
  std::array<double, 3> hi{1.0, 1.0, 1.0};
  double radius = 0.0;

  bool contains(const std::array<double, 3>& x) const;
  double diameter() const;
  /// Closed-form local torsional rigidity of the region (ball in any
  /// dimension, interval in 1D); NaN where no closed form is available.
  double local_torsion() const;
};

Region box_region(int dim, std::array<double, 3> lo, std::array<double, 3> hi);
Region ball_region(int dim, std::array<double, 3> center, double radius);

struct RescaledTorsion {
  double value = 0.0;  // eps^2 / C_{J,2} * T
  double torsion = 0.0;
  double c2 = 0.0;
  std::size_t cells = 0;
  std::vector<std::string> warnings;
};

/// Builds the grid space on the region's bounding box enlarged by the kernel
/// reach, takes omega = cells whose centers lie in the region, and rescales
/// the torsional rigidity.
RescaledTorsion rescaled_torsion(const Region& region, const RadialKernel& k, double eps, double h);

}  // namespace rwt
