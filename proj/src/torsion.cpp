#include "rwt/torsion.hpp"

#include "rwt/error.hpp"
#include "rwt/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rwt {

namespace {

constexpr std::size_t kDenseEigenLimit = 500;
constexpr std::size_t kDirectSolveLimit = 5000;

double sum_ordered(const Eigen::VectorXd& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v[i];
  return s;
}

// Largest g(k)/g(k-1) over the last kRatioWindow steps.
double window_ratio(const std::vector<double>& g) {
  double rho = 0.0;
  const std::size_t n = g.size() - 1;
  for (std::size_t k = n + 1 - std::min(kRatioWindow, n); k <= n; ++k)
    if (g[k - 1] > 0.0) rho = std::max(rho, g[k] / g[k - 1]);
  return rho;
}

[[noreturn]] void no_convergence(const char* what, std::size_t n, double rho) {
  std::ostringstream msg;
  msg << what << " did not converge after " << n << " terms (ratio " << rho << ")";
  throw Error(Errc::no_convergence, msg.str());
}

bool space_is_reversible(const FiniteRWSpace& space) {
  return check_reversibility(space, 1e-12 * space.nu().maxCoeff()).pass;
}

void require_exit_reachable(const Domain& d) {
  const auto m = d.size();
  std::vector<char> reaches(m, 0);
  std::vector<Eigen::Index> stack;
  for (std::size_t i = 0; i < m; ++i)
    if (d.escape[static_cast<Eigen::Index>(i)] > 0.0) {
      reaches[i] = 1;
      stack.push_back(static_cast<Eigen::Index>(i));
    }
  while (!stack.empty()) {
    const auto y = stack.back();
    stack.pop_back();
    for (Kernel::InnerIterator it(d.sub_kernel_t, y); it; ++it) {
      const auto x = static_cast<std::size_t>(it.col());
      if (!reaches[x] && it.value() > 0.0) {
        reaches[x] = 1;
        stack.push_back(it.col());
      }
    }
  }
  const auto trapped = std::count(reaches.begin(), reaches.end(), 0);
  if (trapped > 0)
    throw Error(Errc::singular_system, std::to_string(trapped) +
                                           " state(s) of the domain cannot reach its exterior (closed class)");
}

}  // namespace

MassPropagator::MassPropagator(const Domain& domain)
    : domain_(&domain), mass_(domain.nu_omega), next_(domain.nu_omega.size()), g_(sum_ordered(domain.nu_omega)) {}

double MassPropagator::advance() {
  const Kernel& pt = domain_->sub_kernel_t;
  const auto m = static_cast<Eigen::Index>(pt.outerSize());
#pragma omp parallel for num_threads(num_threads()) schedule(static) if (m > 512)
  for (Eigen::Index j = 0; j < m; ++j) {
    double s = 0.0;
    for (Kernel::InnerIterator it(pt, j); it; ++it) s += it.value() * mass_[it.col()];
    next_[j] = s;
  }
  mass_.swap(next_);
  g_ = sum_ordered(mass_);
  ++k_;
  return g_;
}

GSequence g_sequence(const FiniteRWSpace&, const Domain& domain, std::size_t n_max) {
  require_standing_assumptions(domain);
  GSequence out;
  out.values.reserve(n_max + 1);
  MassPropagator prop(domain);
  out.values.push_back(prop.g());
  for (std::size_t n = 1; n <= n_max; ++n) out.values.push_back(prop.advance());
  if (n_max >= 1 && out.values[n_max - 1] > 0.0) out.ratio_estimate = out.values[n_max] / out.values[n_max - 1];
  return out;
}

TorsionResult torsion_series(const FiniteRWSpace&, const Domain& domain, double rel_tol, std::size_t n_cap) {
  require_standing_assumptions(domain);
  MassPropagator prop(domain);
  std::vector<double> g{prop.g()};
  Eigen::VectorXd accumulated = prop.mass();
  double total = prop.g();
  double rho = 0.0;

  TorsionResult out;
  for (std::size_t n = 1;; ++n) {
    if (n > n_cap) no_convergence("torsion series", n_cap, rho);
    const double gn = prop.advance();
    g.push_back(gn);
    accumulated += prop.mass();
    total += gn;
    if (gn == 0.0) {
      out.error_estimate = 0.0;
      out.terms_used = n + 1;
      break;
    }
    if (n < kRatioWindow) continue;
    rho = window_ratio(g);
    if (rho >= 1.0 - 1e-12) continue;
    const double tail = gn * rho / (1.0 - rho);
    if (tail <= rel_tol * total) {
      out.error_estimate = tail;
      out.terms_used = n + 1;
      break;
    }
  }
  out.rigidity = total;
  out.stress = accumulated.cwiseQuotient(domain.nu_omega);
  return out;
}

TorsionResult stress_solve(const FiniteRWSpace& space, const Domain& domain) {
  require_standing_assumptions(domain);
  require_exit_reachable(domain);
  const auto m = static_cast<Eigen::Index>(domain.size());
  const Kernel& p = domain.sub_kernel;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);

  auto residual = [&](const Eigen::VectorXd& f) -> Eigen::VectorXd { return ones - (f - p * f); };

  Eigen::VectorXd f;
  if (space_is_reversible(space)) {
    // D (I - P) is symmetric positive definite.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(p.nonZeros() + m));
    for (Eigen::Index i = 0; i < m; ++i) {
      triplets.emplace_back(i, i, domain.nu_omega[i]);
      for (Kernel::InnerIterator it(p, i); it; ++it) {
        const double w = 0.5 * (domain.nu_omega[i] * it.value() +
                                domain.nu_omega[it.col()] * domain.sub_kernel_t.coeff(i, it.col()));
        triplets.emplace_back(i, it.col(), -w);
      }
    }
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(triplets.begin(), triplets.end());
    if (static_cast<std::size_t>(m) <= kDirectSolveLimit) {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
      if (ldlt.info() != Eigen::Success) throw Error(Errc::singular_system, "LDLT factorization failed");
      f = ldlt.solve(domain.nu_omega);
      for (int refine = 0; refine < 3; ++refine) f += ldlt.solve(domain.nu_omega.cwiseProduct(residual(f)));
    } else {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                               Eigen::DiagonalPreconditioner<double>>
          cg(a);
      cg.setTolerance(1e-15);
      cg.setMaxIterations(100 * m);
      f = cg.solve(domain.nu_omega);
      for (int refine = 0; refine < 3 && residual(f).lpNorm<Eigen::Infinity>() > 1e-13; ++refine)
        f += cg.solve(domain.nu_omega.cwiseProduct(residual(f)));
    }
  } else {
    Eigen::SparseMatrix<double> a = -Eigen::SparseMatrix<double>(p);
    for (Eigen::Index i = 0; i < m; ++i) a.coeffRef(i, i) += 1.0;
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw Error(Errc::singular_system, "LU factorization failed");
    f = lu.solve(ones);
    for (int refine = 0; refine < 3; ++refine) f += lu.solve(residual(f));
  }

  const double res = residual(f).lpNorm<Eigen::Infinity>();
  if (!std::isfinite(res) || res > 1e-12 * static_cast<double>(m) * std::max(1.0, f.lpNorm<Eigen::Infinity>())) {
    std::ostringstream msg;
    msg << "stress solve residual " << res << " exceeds tolerance";
    throw Error(Errc::singular_system, msg.str());
  }
  TorsionResult out;
  out.rigidity = domain.nu_omega.dot(f);
  out.stress = std::move(f);
  return out;
}

double stress_residual(const Domain& domain, const Eigen::VectorXd& f) {
  const Eigen::VectorXd r = f - Eigen::VectorXd::Ones(f.size()) - domain.sub_kernel * f;
  return r.lpNorm<Eigen::Infinity>();
}

double heat_content_from_g(const std::vector<double>& g, double t) {
  if (t == 0.0) return g.front();
  const double log_t = std::log(t);
  double q = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g[k] == 0.0) break;
    const double kd = static_cast<double>(k);
    q += g[k] * std::exp(-t + kd * log_t - std::lgamma(kd + 1.0));
  }
  return q;
}

double heat_content(const FiniteRWSpace&, const Domain& domain, double t, double rel_tol) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(Errc::invalid_argument, "heat content needs t >= 0");
  require_standing_assumptions(domain);
  MassPropagator prop(domain);
  if (t == 0.0) return prop.g();
  const double log_t = std::log(t);
  double q = prop.g() * std::exp(-t);
  for (std::size_t n = 1; n <= kDefaultTermCap; ++n) {
    const double gn = prop.advance();
    if (gn == 0.0) return q;
    const double kd = static_cast<double>(n);
    q += gn * std::exp(-t + kd * log_t - std::lgamma(kd + 1.0));
    // Remaining terms: g is non-increasing, so sum_{k>n} g(k) pois(k) <= g(n) P(Pois(t) > n).
    const double tail = gn * boost::math::gamma_p(kd + 1.0, t);
    if (tail <= rel_tol * q) return q;
  }
  no_convergence("heat content", kDefaultTermCap, 1.0);
}

HeatIntegral heat_content_integral(const FiniteRWSpace& space, const Domain& domain) {
  require_standing_assumptions(domain);
  const TorsionResult series = torsion_series(space, domain, 1e-15);
  std::vector<double> g;
  {
    MassPropagator prop(domain);
    g.push_back(prop.g());
    for (std::size_t n = 1; n < *series.terms_used; ++n) g.push_back(prop.advance());
  }

  auto tail_at = [&](double tc) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) s += g[k] * boost::math::gamma_q(static_cast<double>(k) + 1.0, tc);
    return s;
  };
  HeatIntegral out;
  out.t_cut = 8.0;
  out.tail = tail_at(out.t_cut);
  while (out.tail > 1e-9 * series.rigidity) {
    out.t_cut *= 2.0;
    out.tail = tail_at(out.t_cut);
  }

  auto q = [&](double t) { return heat_content_from_g(g, t); };
  using boost::math::quadrature::gauss_kronrod;
  double value = gauss_kronrod<double, 61>::integrate(q, 0.0, 1.0, 15, 1e-14);
  for (double a = 1.0; a < out.t_cut; a *= 2.0) value += gauss_kronrod<double, 61>::integrate(q, a, 2.0 * a, 15, 1e-14);
  out.value = value;
  return out;
}

double exit_moment(const FiniteRWSpace&, const Domain& domain, int j, double rel_tol, std::size_t n_cap) {
  if (j < 1) throw Error(Errc::invalid_argument, "exit moment order must be >= 1");
  require_standing_assumptions(domain);
  const double jd = j;
  MassPropagator prop(domain);
  std::vector<double> g{prop.g()};
  double binom = 1.0;  // C(k+j-1, j-1)
  double sum = prop.g();
  double q = 0.0;
  for (std::size_t n = 1;; ++n) {
    if (n > n_cap) no_convergence("exit moment series", n_cap, q);
    const double gn = prop.advance();
    g.push_back(gn);
    if (gn == 0.0) break;
    const double nd = static_cast<double>(n);
    binom *= (nd + jd - 1.0) / nd;
    const double term = binom * gn;
    sum += term;
    if (n < kRatioWindow) continue;
    q = window_ratio(g) * (nd + jd) / (nd + 1.0);
    if (q >= 1.0 - 1e-12) continue;
    if (term * q / (1.0 - q) <= rel_tol * sum) break;
  }
  return std::tgamma(jd + 1.0) * sum;
}

double eigenvalue_exact(const FiniteRWSpace&, const Domain& domain) {
  const auto m = static_cast<Eigen::Index>(domain.size());
  const Eigen::VectorXd sq = domain.nu_omega.cwiseSqrt();
  const Kernel& p = domain.sub_kernel;
  if (domain.size() <= kDenseEigenLimit) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Kernel::InnerIterator it(p, i); it; ++it) s(i, it.col()) = sq[i] * it.value() / sq[it.col()];
    const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return 1.0 - es.eigenvalues().maxCoeff();
  }

  // Power iteration on (S + I)/2, whose spectrum lies in [0, 1].
  const Kernel& pt = domain.sub_kernel_t;
  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd forward = sq.cwiseProduct(p * x.cwiseQuotient(sq));
    const Eigen::VectorXd backward = pt * x.cwiseProduct(sq);
    return 0.5 * (0.5 * (forward + backward.cwiseQuotient(sq)) + x);
  };
  Eigen::VectorXd x = sq.normalized();
  double theta = 0.0;
  for (std::size_t it = 0; it < 1'000'000; ++it) {
    Eigen::VectorXd y = apply(x);
    const double next = x.dot(y);
    x = y.normalized();
    if (it > 10 && std::abs(next - theta) <= 1e-14) return 1.0 - (2.0 * next - 1.0);
    theta = next;
  }
  throw Error(Errc::no_convergence, "power iteration did not converge");
}

double eigenvalue_limit(const FiniteRWSpace&, const Domain& domain, std::size_t n) {
  if (n < 1) throw Error(Errc::invalid_argument, "limit index must be >= 1");
  require_standing_assumptions(domain);
  MassPropagator prop(domain);
  double gn = 0.0;
  for (std::size_t k = 1; k <= 2 * n; ++k) {
    const double gk = prop.advance();
    if (k == n) {
      gn = gk;
      if (gn == 0.0) throw Error(Errc::zero_g, "g(" + std::to_string(n) + ") = 0; the domain is not m-connected");
    }
  }
  return 1.0 - std::pow(prop.g() / gn, 1.0 / static_cast<double>(n));
}

double p_energy(const FiniteRWSpace& space, const Domain& domain, const Eigen::VectorXd& f, double p) {
  auto value = [&](Index x) {
    const auto i = domain.local[x];
    return i >= 0 ? f[i] : 0.0;
  };
  double e = 0.0;
  for (Index x : domain.closure) {
    const double fx = value(x);
    for (Kernel::InnerIterator it(space.kernel(), static_cast<Eigen::Index>(x)); it; ++it) {
      const double d = std::abs(value(static_cast<Index>(it.col())) - fx);
      if (d > 0.0) e += space.nu(x) * it.value() * (p == 2.0 ? d * d : std::pow(d, p));
    }
  }
  return 0.5 * e;
}

double rayleigh_quotient(const FiniteRWSpace& space, const Domain& domain, const Eigen::VectorXd& f) {
  const double denom = f.cwiseAbs2().dot(domain.nu_omega);
  if (!(denom > 0.0)) throw Error(Errc::zero_function, "Rayleigh quotient of the zero function");
  return p_energy(space, domain, f, 2.0) / denom;
}

double torsion_quotient(const FiniteRWSpace& space, const Domain& domain, const Eigen::VectorXd& f) {
  const double energy = p_energy(space, domain, f, 2.0);
  if (!(energy > 0.0)) throw Error(Errc::zero_function, "torsion quotient of a function with zero energy");
  const double mass = domain.nu_omega.dot(f);
  return mass * mass / energy;
}

}  // namespace rwt
