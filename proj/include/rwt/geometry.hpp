#pragma once

#include "rwt/space.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rwt {

/// L_m(A,B) = sum_{x in A} nu(x) m_x(B).
double interaction(const FiniteRWSpace& space, std::span<const Index> a, std::span<const Index> b);
/// P_m(E) = nu(E) - sum_{x in E} nu(x) m_x(E).
double perimeter(const FiniteRWSpace& space, std::span<const Index> e);
/// f is indexed by global state.
double total_variation(const FiniteRWSpace& space, const Eigen::VectorXd& f);
/// Integral over t of P_m({f > t}), summed exactly over the level sets of f.
double coarea_total_variation(const FiniteRWSpace& space, const Eigen::VectorXd& f);
/// 1 - 2 m_x(E).
double mean_curvature(const FiniteRWSpace& space, std::span<const Index> e, Index x);

enum class CheegerMode { exhaustive, greedy };

CheegerMode parse_cheeger_mode(std::string_view text);
std::string_view cheeger_mode_name(CheegerMode mode) noexcept;

struct CheegerResult {
  double value = 0.0;
  StateSet argmin_set;  // global indices
  CheegerMode mode = CheegerMode::exhaustive;
  bool exact = true;
  bool domain_connected = true;
};

inline constexpr std::size_t kExhaustiveCheegerLimit = 22;
inline constexpr double kCheegerTieTol = 1e-12;

/// inf over nonempty E within omega of P_m(E) / nu(E)^p. Ties go to the
/// smaller set, then to the lexicographically smaller sorted index list.
/// Errors: DomainTooLarge (exhaustive beyond kExhaustiveCheegerLimit states).
CheegerResult cheeger(const FiniteRWSpace& space, const Domain& domain, double p, CheegerMode mode);

bool is_calibrable(const FiniteRWSpace& space, const Domain& domain, double tol);

namespace detail {

/// Omega-local view used by the Cheeger searches: symmetric interaction
/// weights between distinct states, self-loop mass, and measure.
struct LocalGraph {
  std::vector<double> nu;
  std::vector<double> loop;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> nbr;
  std::vector<double> weight;
};

LocalGraph make_local_graph(const Domain& domain);

struct Candidate {
  double value = 0.0;
  int card = 0;
  std::uint32_t mask = 0;
};

bool better(const Candidate& a, const Candidate& b) noexcept;

inline constexpr unsigned kChunkBits = 12;

/// Best subset among Gray codes gray(lo) .. gray(hi-1), skipping the empty set.
Candidate scan_chunk(const LocalGraph& g, double p, std::uint64_t lo, std::uint64_t hi);

}  // namespace detail

}  // namespace rwt
