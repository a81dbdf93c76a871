#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rwt {

using Index = std::size_t;
/// Sorted, duplicate-free list of dense state indices.
using StateSet = std::vector<Index>;
using Kernel = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr double kStructuralTol = 1e-9;

struct Transition {
  std::string from;
  std::string to;
  double mass;
};

struct IndexedTransition {
  Index from;
  Index to;
  double mass;
};

/// Finite random walk space: states with a positive reference measure and a
/// row-stochastic transition kernel. Immutable once built.
class FiniteRWSpace {
 public:
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::string& id(Index x) const { return ids_.at(x); }
  std::optional<Index> find(std::string_view id) const;
  /// Throws UnknownState.
  Index index_of(std::string_view id) const;

  const Eigen::VectorXd& nu() const noexcept { return nu_; }
  double nu(Index x) const { return nu_[static_cast<Eigen::Index>(x)]; }
  double measure(std::span<const Index> set) const;

  /// Row x of the kernel is the probability measure m_x.
  const Kernel& kernel() const noexcept { return kernel_; }
  /// Transpose of the kernel; row y lists the states x with P(x,y) > 0.
  const Kernel& kernel_transpose() const noexcept { return kernel_t_; }
  double transition(Index x, Index y) const { return kernel_.coeff(static_cast<int>(x), static_cast<int>(y)); }

  /// m_x(A) for a membership mask over all states.
  double mass_into(Index x, const std::vector<char>& in_set) const;

 private:
  friend FiniteRWSpace build_space(std::vector<std::string>, std::vector<double>, std::vector<IndexedTransition>);

  std::vector<std::string> ids_;
  std::unordered_map<std::string, Index> lookup_;
  Eigen::VectorXd nu_;
  Kernel kernel_;
  Kernel kernel_t_;
};

/// Validates the measure and the kernel rows (tolerance kStructuralTol).
/// Errors: NonpositiveMeasure, NegativeMass, RowNotStochastic, InvalidArgument.
FiniteRWSpace build_space(std::vector<std::string> states, std::vector<double> nu,
                          std::vector<IndexedTransition> entries);
FiniteRWSpace build_space(std::vector<std::string> states, std::vector<double> nu,
                          const std::vector<Transition>& entries);

struct ReversibilityReport {
  double max_deviation = 0.0;
  bool pass = true;
};

/// max |nu(x)P(x,y) - nu(y)P(y,x)| over all pairs.
ReversibilityReport check_reversibility(const FiniteRWSpace& space, double tol);

std::vector<char> indicator(std::size_t n, std::span<const Index> set);
/// Sorts, deduplicates and range-checks a list of states.
StateSet make_state_set(const FiniteRWSpace& space, std::vector<Index> states);
StateSet complement(const FiniteRWSpace& space, std::span<const Index> set);

StateSet m_boundary(const FiniteRWSpace& space, std::span<const Index> omega);
StateSet m_closure(const FiniteRWSpace& space, std::span<const Index> omega);

/// Connectivity of the support graph on omega; a singleton is connected iff
/// it carries a self-loop.
bool is_m_connected(const FiniteRWSpace& space, std::span<const Index> omega);

/// Random walk restricted to omega: escaping mass is returned as a self-loop.
FiniteRWSpace restrict_to(const FiniteRWSpace& space, std::span<const Index> omega);

/// A subset of states together with its m-boundary and the omega x omega
/// block of the kernel (local indices follow the order of `omega`).
struct Domain {
  StateSet omega;
  StateSet boundary;
  StateSet closure;
  std::vector<std::ptrdiff_t> local;  // global index -> position in omega, or -1
  Kernel sub_kernel;
  Kernel sub_kernel_t;
  Eigen::VectorXd nu_omega;
  Eigen::VectorXd escape;  // m_x(X \ omega) for x in omega
  double nu_total = 0.0;
  double nu_closure = 0.0;

  std::size_t size() const noexcept { return omega.size(); }
  bool contains(Index x) const { return local[x] >= 0; }
};

/// Errors: EmptyDomain, InvalidArgument (state out of range).
Domain make_domain(const FiniteRWSpace& space, std::vector<Index> omega);
Domain make_domain(const FiniteRWSpace& space, const std::vector<std::string>& omega_ids);

/// 0 < nu(omega) < nu(closure); throws StandingAssumptionViolated.
void require_standing_assumptions(const Domain& domain);

}  // namespace rwt
