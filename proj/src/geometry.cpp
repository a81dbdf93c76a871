#include "rwt/geometry.hpp"

#include "rwt/error.hpp"
#include "rwt/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <limits>
#include <numeric>

namespace rwt {

double interaction(const FiniteRWSpace& space, std::span<const Index> a, std::span<const Index> b) {
  const auto in_b = indicator(space.size(), b);
  double total = 0.0;
  for (Index x : a) total += space.nu(x) * space.mass_into(x, in_b);
  return total;
}

double perimeter(const FiniteRWSpace& space, std::span<const Index> e) {
  const auto in_e = indicator(space.size(), e);
  double nu_e = 0.0, inner = 0.0;
  for (Index x : e) {
    nu_e += space.nu(x);
    inner += space.nu(x) * space.mass_into(x, in_e);
  }
  return nu_e - inner;
}

double total_variation(const FiniteRWSpace& space, const Eigen::VectorXd& f) {
  double tv = 0.0;
  const Kernel& p = space.kernel();
  for (Eigen::Index x = 0; x < p.outerSize(); ++x)
    for (Kernel::InnerIterator it(p, x); it; ++it) tv += std::abs(f[it.col()] - f[x]) * it.value() * space.nu()[x];
  return 0.5 * tv;
}

double coarea_total_variation(const FiniteRWSpace& space, const Eigen::VectorXd& f) {
  std::map<double, std::vector<Index>> levels;
  for (Index x = 0; x < space.size(); ++x) levels[f[static_cast<Eigen::Index>(x)]].push_back(x);
  // {f > t} is constant for t in [v_i, v_{i+1}); it is X below v_1 and empty above v_k.
  double total = 0.0;
  StateSet super;
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    auto next = std::next(it);
    if (next == levels.rend()) break;
    super.insert(super.end(), it->second.begin(), it->second.end());
    std::sort(super.begin(), super.end());
    total += (it->first - next->first) * perimeter(space, super);
  }
  return total;
}

double mean_curvature(const FiniteRWSpace& space, std::span<const Index> e, Index x) {
  return 1.0 - 2.0 * space.mass_into(x, indicator(space.size(), e));
}

CheegerMode parse_cheeger_mode(std::string_view text) {
  if (text == "exhaustive") return CheegerMode::exhaustive;
  if (text == "greedy") return CheegerMode::greedy;
  throw Error(Errc::invalid_argument, "unknown Cheeger mode '" + std::string(text) + "'");
}

std::string_view cheeger_mode_name(CheegerMode mode) noexcept {
  return mode == CheegerMode::exhaustive ? "exhaustive" : "greedy";
}

namespace detail {

LocalGraph make_local_graph(const Domain& domain) {
  LocalGraph g;
  const auto m = domain.size();
  g.nu.assign(domain.nu_omega.data(), domain.nu_omega.data() + m);
  g.loop.assign(m, 0.0);
  g.offsets.assign(m + 1, 0);
  std::vector<std::map<std::uint32_t, double>> rows(m);
  for (std::size_t i = 0; i < m; ++i)
    for (Kernel::InnerIterator it(domain.sub_kernel, static_cast<Eigen::Index>(i)); it; ++it) {
      const auto j = static_cast<std::uint32_t>(it.col());
      const double w = g.nu[i] * it.value();
      if (j == i) {
        g.loop[i] += w;
      } else {
        rows[i][j] += w;
        rows[j][static_cast<std::uint32_t>(i)] += w;
      }
    }
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& [j, w] : rows[i]) {
      g.nbr.push_back(j);
      g.weight.push_back(w);
    }
    g.offsets[i + 1] = g.nbr.size();
  }
  return g;
}

bool better(const Candidate& a, const Candidate& b) noexcept {
  const double scale = std::max(std::abs(a.value), std::abs(b.value));
  if (a.value < b.value - kCheegerTieTol * scale) return true;
  if (b.value < a.value - kCheegerTieTol * scale) return false;
  if (a.card != b.card) return a.card < b.card;
  const std::uint32_t diff = a.mask ^ b.mask;
  if (diff == 0) return false;
  return (a.mask & (diff & (~diff + 1))) != 0;
}

Candidate scan_chunk(const LocalGraph& g, double p, std::uint64_t lo, std::uint64_t hi) {
  const std::size_t m = g.nu.size();
  std::vector<double> conn(m, 0.0);
  double nu_e = 0.0, inner = 0.0;
  int card = 0;

  auto toggle = [&](std::size_t i, bool add) {
    const double sign = add ? 1.0 : -1.0;
    if (add) inner += conn[i] + g.loop[i];
    else inner -= conn[i] + g.loop[i];
    nu_e += sign * g.nu[i];
    card += add ? 1 : -1;
    for (std::size_t k = g.offsets[i]; k < g.offsets[i + 1]; ++k) conn[g.nbr[k]] += sign * g.weight[k];
  };
  auto ratio = [&] {
    const double per = nu_e - inner;
    return p == 1.0 ? per / nu_e : per / std::pow(nu_e, p);
  };

  std::uint32_t mask = static_cast<std::uint32_t>(lo ^ (lo >> 1));
  for (std::size_t i = 0; i < m; ++i)
    if (mask & (1u << i)) toggle(i, true);

  Candidate best{std::numeric_limits<double>::infinity(), 0, 0};
  for (std::uint64_t code = lo;;) {
    if (mask != 0) {
      const Candidate c{ratio(), card, mask};
      if (best.card == 0 || better(c, best)) best = c;
    }
    if (++code >= hi) break;
    const auto bit = static_cast<std::size_t>(std::countr_zero(code));
    const std::uint32_t flag = 1u << bit;
    toggle(bit, (mask & flag) == 0);
    mask ^= flag;
  }
  return best;
}

}  // namespace detail

namespace {

double ratio_of(const FiniteRWSpace& space, const StateSet& e, double p) {
  return perimeter(space, e) / std::pow(space.measure(e), p);
}

StateSet to_global(const Domain& domain, std::uint32_t mask) {
  StateSet out;
  for (std::size_t i = 0; i < domain.size(); ++i)
    if (mask & (1u << i)) out.push_back(domain.omega[i]);
  return out;
}

CheegerResult cheeger_exhaustive(const FiniteRWSpace& space, const Domain& domain, double p) {
  using namespace detail;
  const std::size_t m = domain.size();
  if (m > kExhaustiveCheegerLimit)
    throw Error(Errc::domain_too_large, "exhaustive Cheeger search supports at most " +
                                            std::to_string(kExhaustiveCheegerLimit) + " states, domain has " +
                                            std::to_string(m));
  const LocalGraph g = make_local_graph(domain);
  const std::uint64_t total = std::uint64_t{1} << m;
  const std::uint64_t chunk = std::uint64_t{1} << kChunkBits;
  const auto n_chunks = static_cast<std::int64_t>((total + chunk - 1) / chunk);
  std::vector<Candidate> per_chunk(static_cast<std::size_t>(n_chunks));
#pragma omp parallel for num_threads(num_threads()) schedule(dynamic, 1)
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    const std::uint64_t lo = static_cast<std::uint64_t>(c) * chunk;
    per_chunk[static_cast<std::size_t>(c)] = scan_chunk(g, p, lo, std::min(total, lo + chunk));
  }
  Candidate best = per_chunk.front();
  for (const auto& c : per_chunk)
    if (c.card > 0 && better(c, best)) best = c;

  CheegerResult out;
  out.argmin_set = to_global(domain, best.mask);
  out.value = ratio_of(space, out.argmin_set, p);
  out.mode = CheegerMode::exhaustive;
  out.exact = true;
  return out;
}

struct GreedyState {
  const detail::LocalGraph* g;
  std::vector<char> in;
  std::vector<double> conn;
  double nu_e = 0.0, inner = 0.0;
  std::size_t card = 0;

  void toggle(std::size_t i) {
    const bool add = !in[i];
    const double sign = add ? 1.0 : -1.0;
    inner += sign * (conn[i] + g->loop[i]);
    nu_e += sign * g->nu[i];
    card = add ? card + 1 : card - 1;
    in[i] = add;
    for (std::size_t k = g->offsets[i]; k < g->offsets[i + 1]; ++k) conn[g->nbr[k]] += sign * g->weight[k];
  }
  double ratio_after(std::size_t i, double p) const {
    const double sign = in[i] ? -1.0 : 1.0;
    const double inner2 = inner + sign * (conn[i] + g->loop[i]);
    const double nu2 = nu_e + sign * g->nu[i];
    return (nu2 - inner2) / std::pow(nu2, p);
  }
};

bool lex_better(double va, const StateSet& a, double vb, const StateSet& b) {
  const double scale = std::max(std::abs(va), std::abs(vb));
  if (va < vb - kCheegerTieTol * scale) return true;
  if (vb < va - kCheegerTieTol * scale) return false;
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

CheegerResult cheeger_greedy(const FiniteRWSpace& space, const Domain& domain, double p) {
  const auto g = detail::make_local_graph(domain);
  const std::size_t m = domain.size();

  auto descend = [&](GreedyState s) {
    double current = (s.nu_e - s.inner) / std::pow(s.nu_e, p);
    for (;;) {
      std::size_t best_i = m;
      double best_v = current;
      for (std::size_t i = 0; i < m; ++i) {
        if (s.in[i] && s.card == 1) continue;
        const double v = s.ratio_after(i, p);
        if (v < best_v - 1e-15 * std::abs(best_v)) {
          best_v = v;
          best_i = i;
        }
      }
      if (best_i == m) break;
      s.toggle(best_i);
      current = best_v;
    }
    StateSet set;
    for (std::size_t i = 0; i < m; ++i)
      if (s.in[i]) set.push_back(domain.omega[i]);
    return set;
  };

  GreedyState empty{&g, std::vector<char>(m, 0), std::vector<double>(m, 0.0)};
  std::vector<GreedyState> starts;
  for (std::size_t i = 0; i < m; ++i) {
    GreedyState s = empty;
    s.toggle(i);
    starts.push_back(std::move(s));
  }
  GreedyState full = empty;
  for (std::size_t i = 0; i < m; ++i) full.toggle(i);
  starts.push_back(std::move(full));

  CheegerResult out;
  out.mode = CheegerMode::greedy;
  out.exact = false;
  bool have = false;
  for (auto& s : starts) {
    StateSet set = descend(std::move(s));
    const double v = ratio_of(space, set, p);
    if (!have || lex_better(v, set, out.value, out.argmin_set)) {
      out.value = v;
      out.argmin_set = std::move(set);
      have = true;
    }
  }
  return out;
}

}  // namespace

CheegerResult cheeger(const FiniteRWSpace& space, const Domain& domain, double p, CheegerMode mode) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(Errc::invalid_argument, "Cheeger exponent must be >= 1");
  CheegerResult out = mode == CheegerMode::exhaustive ? cheeger_exhaustive(space, domain, p)
                                                      : cheeger_greedy(space, domain, p);
  out.domain_connected = is_m_connected(space, domain.omega);
  return out;
}

bool is_calibrable(const FiniteRWSpace& space, const Domain& domain, double tol) {
  const double h1 = cheeger(space, domain, 1.0, CheegerMode::exhaustive).value;
  return std::abs(h1 - perimeter(space, domain.omega) / domain.nu_total) <= tol;
}

}  // namespace rwt
