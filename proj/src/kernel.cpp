#include "rwt/kernel.hpp"

#include "rwt/error.hpp"
#include "rwt/parallel.hpp"
#include "rwt/torsion.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rwt {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kSupportTol = 1e-12;
constexpr double kEscapeFraction = 1e-3;

void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw Error(Errc::invalid_argument, "dimension must be 1, 2 or 3");
}

// Surface area of the unit sphere in R^dim.
double sphere_area(int dim) {
  return 2.0 * std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

double parse_positive(std::string_view token, std::string_view spec) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || !(v > 0.0) || !std::isfinite(v))
    throw Error(Errc::invalid_argument, "bad kernel spec '" + std::string(spec) + "'");
  return v;
}

}  // namespace

std::array<std::size_t, 3> GridSpec::shape() const {
  check_dim(dim);
  if (!(h > 0.0)) throw Error(Errc::invalid_argument, "grid spacing must be positive");
  std::array<std::size_t, 3> n{1, 1, 1};
  for (int a = 0; a < dim; ++a) {
    const double len = hi[a] - lo[a];
    const double cells = std::round(len / h);
    if (!(len > 0.0) || cells < 1.0 || std::abs(cells * h - len) > 1e-9 * len) {
      std::ostringstream msg;
      msg << "axis " << a << " length " << len << " is not a positive multiple of h = " << h;
      throw Error(Errc::invalid_argument, msg.str());
    }
    n[a] = static_cast<std::size_t>(cells);
  }
  return n;
}

std::size_t GridSpec::cell_count() const {
  const auto n = shape();
  return n[0] * n[1] * n[2];
}

std::array<std::size_t, 3> GridSpec::unravel(std::size_t cell) const {
  const auto n = shape();
  return {cell / (n[1] * n[2]), (cell / n[2]) % n[1], cell % n[2]};
}

std::size_t GridSpec::ravel(const std::array<std::size_t, 3>& idx) const {
  const auto n = shape();
  return (idx[0] * n[1] + idx[1]) * n[2] + idx[2];
}

std::array<double, 3> GridSpec::center(std::size_t cell) const {
  const auto idx = unravel(cell);
  std::array<double, 3> c{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) c[a] = lo[a] + (static_cast<double>(idx[a]) + 0.5) * h;
  return c;
}

double RadialKernel::shape(double r) const {
  if (r > radius * (1.0 + kSupportTol)) return 0.0;
  switch (profile) {
    case Profile::uniform:
      return 1.0;
    case Profile::tent:
      return std::max(0.0, 1.0 - r / radius);
    case Profile::gauss:
      return std::exp(-0.5 * r * r / (sigma * sigma));
  }
  return 0.0;
}

double RadialKernel::normalization(int dim) const {
  check_dim(dim);
  const double s = sphere_area(dim);
  const double n = dim;
  switch (profile) {
    case Profile::uniform:
      return 1.0 / (s * std::pow(radius, n) / n);
    case Profile::tent:
      return 1.0 / (s * std::pow(radius, n) / (n * (n + 1.0)));
    case Profile::gauss: {
      const double a = 2.0 * sigma * sigma;
      const double radial = 0.5 * std::pow(a, 0.5 * n) * boost::math::tgamma_lower(0.5 * n, radius * radius / a);
      return 1.0 / (s * radial);
    }
  }
  return 0.0;
}

RadialKernel uniform_kernel(double radius) { return {Profile::uniform, radius, 1.0}; }
RadialKernel tent_kernel(double radius) { return {Profile::tent, radius, 1.0}; }
RadialKernel gauss_kernel(double sigma, double cutoff) { return {Profile::gauss, cutoff, sigma}; }

RadialKernel parse_kernel_spec(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= spec.size(); ++i)
    if (i == spec.size() || spec[i] == ':') {
      parts.push_back(spec.substr(start, i - start));
      start = i + 1;
    }
  if (parts[0] == "uniform" && parts.size() == 2) return uniform_kernel(parse_positive(parts[1], spec));
  if (parts[0] == "tent" && parts.size() == 2) return tent_kernel(parse_positive(parts[1], spec));
  if (parts[0] == "gauss" && parts.size() == 3)
    return gauss_kernel(parse_positive(parts[1], spec), parse_positive(parts[2], spec));
  throw Error(Errc::invalid_argument,
              "bad kernel spec '" + std::string(spec) + "' (expected uniform:<r>, tent:<r> or gauss:<sigma>:<cutoff>)");
}

std::string kernel_spec_string(const RadialKernel& k) {
  std::ostringstream out;
  out.precision(17);
  switch (k.profile) {
    case Profile::uniform: out << "uniform:" << k.radius; break;
    case Profile::tent: out << "tent:" << k.radius; break;
    case Profile::gauss: out << "gauss:" << k.sigma << ':' << k.radius; break;
  }
  return out.str();
}

double radial_moment(const RadialKernel& k, int dim, int power) {
  check_dim(dim);
  auto integrand = [&](double r) { return k.shape(r) * std::pow(r, dim - 1 + power); };
  const double radial =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, k.radius, 15, 1e-14);
  return sphere_area(dim) * k.normalization(dim) * radial;
}

double kernel_mass(const RadialKernel& k, int dim) { return radial_moment(k, dim, 0); }

double rescale_constant_2(const RadialKernel& k, int dim) {
  return 2.0 / (radial_moment(k, dim, 2) / dim);
}

double rescale_constant_1(const RadialKernel& k, int dim) {
  static constexpr double kappa[] = {0.0, 1.0, 2.0 / kPi, 0.5};
  check_dim(dim);
  return 2.0 / (kappa[dim] * radial_moment(k, dim, 1));
}

std::vector<StencilEntry> make_stencil(const GridSpec& grid, const RadialKernel& k, double eps) {
  if (!(eps > 0.0)) throw Error(Errc::invalid_argument, "eps must be positive");
  const int dim = grid.dim;
  const double reach = eps * k.radius;
  const int r = static_cast<int>(std::ceil(reach / grid.h * (1.0 + kSupportTol)));
  const double norm = k.normalization(dim) / std::pow(eps, dim);
  const double cell_volume = std::pow(grid.h, dim);
  std::vector<StencilEntry> out;
  const int ry = dim >= 2 ? r : 0;
  const int rz = dim >= 3 ? r : 0;
  for (int i = -r; i <= r; ++i)
    for (int j = -ry; j <= ry; ++j)
      for (int l = -rz; l <= rz; ++l) {
        const double d2 = static_cast<double>(i * i + j * j + l * l);
        const double dist = std::sqrt(d2) * grid.h / eps;
        const double v = k.shape(dist);
        if (v > 0.0) out.push_back({{i, j, l}, norm * v * cell_volume});
      }
  return out;
}

std::vector<std::pair<std::size_t, double>> stencil_row(const GridSpec& grid, const std::vector<StencilEntry>& stencil,
                                                         std::size_t cell) {
  const auto n = grid.shape();
  const auto idx = grid.unravel(cell);
  std::vector<std::pair<std::size_t, double>> row;
  row.reserve(stencil.size());
  for (const auto& s : stencil) {
    std::array<std::size_t, 3> t{};
    bool inside = true;
    for (int a = 0; a < 3 && inside; ++a) {
      const auto v = static_cast<std::ptrdiff_t>(idx[a]) + s.offset[a];
      inside = v >= 0 && v < static_cast<std::ptrdiff_t>(n[a]);
      t[a] = static_cast<std::size_t>(v);
    }
    if (inside) row.emplace_back(grid.ravel(t), s.mass);
  }
  // Stencil offsets are generated in lexicographic order, so columns are sorted.
  return row;
}

std::string cell_id(const GridSpec& grid, std::size_t cell) {
  const auto idx = grid.unravel(cell);
  std::string id = "c" + std::to_string(idx[0]);
  for (int a = 1; a < grid.dim; ++a) id += "_" + std::to_string(idx[a]);
  return id;
}

GridSpace build_grid_space(const GridSpec& grid, const RadialKernel& k, double eps,
                           const std::vector<std::size_t>& watch_cells) {
  const std::size_t cells = grid.cell_count();
  const auto stencil = make_stencil(grid, k, eps);
  double full = 0.0;
  for (const auto& s : stencil) full += s.mass;

  std::vector<std::size_t> watch = watch_cells;
  if (watch.empty()) {
    const auto n = grid.shape();
    watch.push_back(grid.ravel({n[0] / 2, n[1] / 2, n[2] / 2}));
  }
  for (std::size_t c : watch) {
    if (c >= cells) throw Error(Errc::invalid_argument, "watch cell out of range");
    double s = 0.0;
    for (const auto& [col, mass] : stencil_row(grid, stencil, c)) s += mass;
    if (full - s > kEscapeFraction * full) {
      std::ostringstream msg;
      msg << "cell " << cell_id(grid, c) << " loses " << 100.0 * (full - s) / full
          << "% of its kernel mass outside the box; enlarge the box";
      throw Error(Errc::kernel_escapes_box, msg.str());
    }
  }

  std::vector<std::vector<std::pair<std::size_t, double>>> rows(cells);
  std::vector<double> nu(cells);
  const double cell_volume = std::pow(grid.h, grid.dim);
  const auto n_cells = static_cast<std::int64_t>(cells);
#pragma omp parallel for num_threads(num_threads()) schedule(static)
  for (std::int64_t c = 0; c < n_cells; ++c) {
    auto row = stencil_row(grid, stencil, static_cast<std::size_t>(c));
    double s = 0.0;
    for (const auto& e : row) s += e.second;
    for (auto& e : row) e.second /= s;
    nu[static_cast<std::size_t>(c)] = cell_volume * s;
    rows[static_cast<std::size_t>(c)] = std::move(row);
  }

  std::vector<IndexedTransition> entries;
  std::size_t nnz = 0;
  for (const auto& r : rows) nnz += r.size();
  entries.reserve(nnz);
  for (std::size_t c = 0; c < cells; ++c)
    for (const auto& [col, p] : rows[c]) entries.push_back({c, col, p});
  std::vector<std::string> ids(cells);
  for (std::size_t c = 0; c < cells; ++c) ids[c] = cell_id(grid, c);
  return {grid, build_space(std::move(ids), std::move(nu), std::move(entries))};
}

std::vector<std::size_t> symmetrize_set(const GridSpec& grid, const std::vector<std::size_t>& omega_cells) {
  if (omega_cells.empty()) throw Error(Errc::empty_domain, "cannot symmetrize an empty set");
  const auto n = grid.shape();
  const std::size_t cells = grid.cell_count();
  // Squared distance to the box center in half-cell units, exact in integers.
  std::vector<std::pair<long long, std::size_t>> keyed(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const auto idx = grid.unravel(c);
    long long d2 = 0;
    for (int a = 0; a < grid.dim; ++a) {
      const long long d = 2 * static_cast<long long>(idx[a]) + 1 - static_cast<long long>(n[a]);
      d2 += d * d;
    }
    keyed[c] = {d2, c};
  }
  const std::size_t count = std::min(omega_cells.size(), cells);
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(count), keyed.end());
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = keyed[i].second;
  std::sort(out.begin(), out.end());
  return out;
}

bool Region::contains(const std::array<double, 3>& x) const {
  if (kind == Kind::ball) {
    double d2 = 0.0;
    for (int a = 0; a < dim; ++a) d2 += (x[a] - lo[a]) * (x[a] - lo[a]);
    return d2 < radius * radius;
  }
  for (int a = 0; a < dim; ++a)
    if (!(x[a] > lo[a] && x[a] < hi[a])) return false;
  return true;
}

double Region::diameter() const {
  if (kind == Kind::ball) return 2.0 * radius;
  double d2 = 0.0;
  for (int a = 0; a < dim; ++a) d2 += (hi[a] - lo[a]) * (hi[a] - lo[a]);
  return std::sqrt(d2);
}

double Region::local_torsion() const {
  if (kind == Kind::ball) {
    const double n = dim;
    const double omega_n = std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
    return omega_n * std::pow(radius, n + 2.0) / (n * (n + 2.0));
  }
  if (dim == 1) return std::pow(hi[0] - lo[0], 3) / 12.0;
  return std::nan("");
}

Region box_region(int dim, std::array<double, 3> lo, std::array<double, 3> hi) {
  check_dim(dim);
  for (int a = 0; a < dim; ++a)
    if (!(hi[a] > lo[a])) throw Error(Errc::invalid_argument, "box region needs lo < hi on every axis");
  Region r;
  r.kind = Region::Kind::box;
  r.dim = dim;
  r.lo = lo;
  r.hi = hi;
  return r;
}

Region ball_region(int dim, std::array<double, 3> center, double radius) {
  check_dim(dim);
  if (!(radius > 0.0)) throw Error(Errc::invalid_argument, "ball region needs a positive radius");
  Region r;
  r.kind = Region::Kind::ball;
  r.dim = dim;
  r.lo = center;
  r.hi = center;
  r.radius = radius;
  return r;
}

RescaledTorsion rescaled_torsion(const Region& region, const RadialKernel& k, double eps, double h) {
  if (!(eps > 0.0) || !(h > 0.0)) throw Error(Errc::invalid_argument, "eps and h must be positive");
  RescaledTorsion out;
  if (eps / h < 4.0) {
    std::ostringstream msg;
    msg << "eps/h = " << eps / h << " < 4: kernel is resolved by too few cells";
    out.warnings.push_back(msg.str());
  }
  if (eps > region.diameter() / 4.0) {
    std::ostringstream msg;
    msg << "eps = " << eps << " exceeds a quarter of the domain diameter " << region.diameter();
    out.warnings.push_back(msg.str());
  }

  std::array<double, 3> lo{}, hi{};
  for (int a = 0; a < region.dim; ++a) {
    lo[a] = region.kind == Region::Kind::ball ? region.lo[a] - region.radius : region.lo[a];
    hi[a] = region.kind == Region::Kind::ball ? region.lo[a] + region.radius : region.hi[a];
  }
  const double pad = std::ceil(eps * k.radius / h) + 1.0;
  GridSpec grid;
  grid.dim = region.dim;
  grid.h = h;
  for (int a = 0; a < region.dim; ++a) {
    const double cells = std::ceil((hi[a] - lo[a]) / h - 1e-9);
    grid.lo[a] = lo[a] - pad * h;
    grid.hi[a] = grid.lo[a] + (cells + 2.0 * pad) * h;
  }

  std::vector<std::size_t> omega;
  for (std::size_t c = 0; c < grid.cell_count(); ++c)
    if (region.contains(grid.center(c))) omega.push_back(c);
  if (omega.empty()) throw Error(Errc::empty_domain, "no cell center lies inside the region");

  const GridSpace gs = build_grid_space(grid, k, eps, omega);
  const Domain domain = make_domain(gs.space, omega);
  out.torsion = stress_solve(gs.space, domain).rigidity;
  out.c2 = rescale_constant_2(k, region.dim);
  out.value = eps * eps / out.c2 * out.torsion;
  out.cells = omega.size();
  return out;
}

}  // namespace rwt
