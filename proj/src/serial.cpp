#include "rwt/serial.hpp"

#include "rwt/error.hpp"

#include <cmath>

namespace rwt::serial {

GridSpace build_grid_space(const GridSpec& grid, const RadialKernel& k, double eps) {
  const std::size_t cells = grid.cell_count();
  const auto stencil = make_stencil(grid, k, eps);
  const double cell_volume = std::pow(grid.h, grid.dim);
  std::vector<IndexedTransition> entries;
  std::vector<double> nu(cells);
  std::vector<std::string> ids(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    auto row = stencil_row(grid, stencil, c);
    double s = 0.0;
    for (const auto& e : row) s += e.second;
    for (const auto& [col, mass] : row) entries.push_back({c, col, mass / s});
    nu[c] = cell_volume * s;
    ids[c] = cell_id(grid, c);
  }
  return {grid, build_space(std::move(ids), std::move(nu), std::move(entries))};
}

std::vector<double> g_values(const Domain& domain, std::size_t n_max) {
  const Kernel& pt = domain.sub_kernel_t;
  Eigen::VectorXd mass = domain.nu_omega;
  Eigen::VectorXd next(mass.size());
  auto total = [](const Eigen::VectorXd& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += v[i];
    return s;
  };
  std::vector<double> g{total(mass)};
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (Eigen::Index j = 0; j < pt.outerSize(); ++j) {
      double s = 0.0;
      for (Kernel::InnerIterator it(pt, j); it; ++it) s += it.value() * mass[it.col()];
      next[j] = s;
    }
    mass.swap(next);
    g.push_back(total(mass));
  }
  return g;
}

CheegerResult cheeger_exhaustive(const FiniteRWSpace& space, const Domain& domain, double p) {
  using namespace rwt::detail;
  const std::size_t m = domain.size();
  if (m > kExhaustiveCheegerLimit) throw Error(Errc::domain_too_large, "domain too large for exhaustive search");
  const LocalGraph g = make_local_graph(domain);
  const std::uint64_t total = std::uint64_t{1} << m;
  const std::uint64_t chunk = std::uint64_t{1} << kChunkBits;
  Candidate best{};
  for (std::uint64_t lo = 0; lo < total; lo += chunk) {
    const Candidate c = scan_chunk(g, p, lo, std::min(total, lo + chunk));
    if (best.card == 0 || (c.card > 0 && better(c, best))) best = c;
  }
  CheegerResult out;
  for (std::size_t i = 0; i < m; ++i)
    if (best.mask & (1u << i)) out.argmin_set.push_back(domain.omega[i]);
  out.value = perimeter(space, out.argmin_set) / std::pow(space.measure(out.argmin_set), p);
  out.domain_connected = is_m_connected(space, domain.omega);
  return out;
}

McEstimate mc_torsion(const FiniteRWSpace& space, const Domain& domain, std::uint64_t n_samples, std::uint64_t seed) {
  if (n_samples < 100) throw Error(Errc::invalid_argument, "Monte-Carlo estimates need at least 100 samples");
  const JumpSampler sampler(space);
  double total = 0.0, weighted_var = 0.0;
  for (Index x : domain.omega) {
    std::vector<std::uint64_t> times(n_samples);
    for (std::uint64_t s = 0; s < n_samples; ++s) {
      SplitMix64 rng = SplitMix64::substream(seed, x, s);
      times[s] = sample_exit_time(sampler, domain, x, rng);
    }
    double sum = 0.0;
    for (auto t : times) sum += static_cast<double>(t);
    const double mean = sum / static_cast<double>(n_samples);
    double ss = 0.0;
    for (auto t : times) ss += (static_cast<double>(t) - mean) * (static_cast<double>(t) - mean);
    total += space.nu(x) * mean;
    weighted_var += space.nu(x) * space.nu(x) * (ss / static_cast<double>(n_samples - 1));
  }
  McEstimate out;
  out.mean = total;
  out.stddev = std::sqrt(weighted_var);
  out.half_width_95 = 1.96 * out.stddev / std::sqrt(static_cast<double>(n_samples));
  out.n_samples = n_samples;
  out.seed = seed;
  return out;
}

}  // namespace rwt::serial
