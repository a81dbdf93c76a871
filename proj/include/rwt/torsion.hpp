#pragma once

#include "rwt/space.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace rwt {

/// g(k) = nu-mass of walks that stay in omega for k jumps.
struct GSequence {
  std::vector<double> values;
  std::optional<double> ratio_estimate;  // g(n)/g(n-1)
};

/// Propagates the mass vector m^k = P_omega^T m^{k-1}, m^0 = nu|omega, one
/// step per call. Rows are gathered in parallel; sums are index-ordered.
class MassPropagator {
 public:
  explicit MassPropagator(const Domain& domain);

  double g() const noexcept { return g_; }
  std::size_t step_count() const noexcept { return k_; }
  const Eigen::VectorXd& mass() const noexcept { return mass_; }
  /// Advances one jump and returns the new g.
  double advance();

 private:
  const Domain* domain_;
  Eigen::VectorXd mass_;
  Eigen::VectorXd next_;
  double g_;
  std::size_t k_ = 0;
};

GSequence g_sequence(const FiniteRWSpace& space, const Domain& domain, std::size_t n_max);

struct TorsionResult {
  Eigen::VectorXd stress;  // on omega, local order
  double rigidity = 0.0;
  std::optional<std::size_t> terms_used;
  std::optional<double> error_estimate;
};

inline constexpr std::size_t kRatioWindow = 5;
inline constexpr std::size_t kDefaultTermCap = 10'000'000;

/// Partial sums of g until g(n) rho/(1-rho) <= rel_tol T(n), rho the largest
/// ratio over the trailing window. Stress is accumulated mass / nu, which is
/// the stress function on reversible spaces. Errors: NoConvergence,
/// StandingAssumptionViolated.
TorsionResult torsion_series(const FiniteRWSpace& space, const Domain& domain, double rel_tol,
                             std::size_t n_cap = kDefaultTermCap);

/// Solves (I - P_omega) f = 1. Errors: SingularSystem, StandingAssumptionViolated.
TorsionResult stress_solve(const FiniteRWSpace& space, const Domain& domain);

/// Max over omega of |f(x) - 1 - sum_y P(x,y) f(y)|.
double stress_residual(const Domain& domain, const Eigen::VectorXd& f);

double heat_content(const FiniteRWSpace& space, const Domain& domain, double t, double rel_tol);
/// Poisson-weighted sum over a precomputed g-sequence.
double heat_content_from_g(const std::vector<double>& g, double t);

struct HeatIntegral {
  double value = 0.0;
  double t_cut = 0.0;
  double tail = 0.0;  // integral of Q over [t_cut, inf)
};

/// Integral of Q over [0, inf) by adaptive Gauss-Kronrod on [0, t_cut];
/// t_cut doubles until the tail is <= 1e-9 of the series torsion.
HeatIntegral heat_content_integral(const FiniteRWSpace& space, const Domain& domain);

/// j! sum_k C(k+j-1, j-1) g(k). Errors: NoConvergence, InvalidArgument.
double exit_moment(const FiniteRWSpace& space, const Domain& domain, int j, double rel_tol,
                   std::size_t n_cap = kDefaultTermCap);

/// 1 - largest eigenvalue of D^{1/2} P_omega D^{-1/2}.
double eigenvalue_exact(const FiniteRWSpace& space, const Domain& domain);
/// 1 - (g(2n)/g(n))^{1/n}. Errors: ZeroG.
double eigenvalue_limit(const FiniteRWSpace& space, const Domain& domain, std::size_t n);

/// (1/2) sum over the closure of |f(y) - f(x)|^p P(x,y) nu(x), f extended by
/// zero outside omega.
double p_energy(const FiniteRWSpace& space, const Domain& domain, const Eigen::VectorXd& f, double p);
/// Errors: ZeroFunction.
double rayleigh_quotient(const FiniteRWSpace& space, const Domain& domain, const Eigen::VectorXd& f);
/// (sum nu f)^2 / energy; maximized by the stress function. Errors: ZeroFunction.
double torsion_quotient(const FiniteRWSpace& space, const Domain& domain, const Eigen::VectorXd& f);

struct PTorsionResult {
  double p = 2.0;
  Eigen::VectorXd stress;  // on omega
  double rigidity = 0.0;   // (sum nu f)^{p-1}
  /// |1 - p E / (mu V)| at the normalized minimizer, mu the least-squares
  /// multiplier of the volume constraint.
  double energy_gap = 0.0;
  /// |sum nu f - E(f)| / sum nu f on the returned stress.
  double identity_residual = 0.0;
  /// rigidity is a lower bound (a primal value); upper_bound comes from a
  /// feasible dual flow, so T_p lies in [rigidity, upper_bound].
  double upper_bound = 0.0;
  double duality_gap = 0.0;  // (upper_bound - rigidity) / rigidity
  std::size_t iterations = 0;
};

/// Minimizes the p-energy at fixed volume by damped Newton with continuation
/// in p. Errors: NoConvergence, InvalidArgument.
PTorsionResult p_torsion(const FiniteRWSpace& space, const Domain& domain, double p, double tol = 1e-12,
                         std::size_t max_iter = 500);

struct LambdaPEstimate {
  double value = 0.0;
  bool certified = false;
};

/// p = 2: exact eigenvalue; p = 1: Cheeger constant; otherwise the best
/// p-Rayleigh quotient found by projected descent (an upper bound).
LambdaPEstimate lambda_p_estimate(const FiniteRWSpace& space, const Domain& domain, double p, int restarts = 3,
                                  double tol = 1e-10, std::uint64_t seed = 1);

}  // namespace rwt
