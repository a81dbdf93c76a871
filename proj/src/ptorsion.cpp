#include "rwt/error.hpp"
#include "rwt/geometry.hpp"
#include "rwt/torsion.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>

namespace rwt {

namespace {

constexpr double kSmoothingBias = 1e-13;
constexpr double kDecrementFloor = 1e-12;
constexpr double kFinalDecrement = 1e-15;

// E(g) = sum_pairs w |g_i - g_j|^p + sum_i b_i |g_i|^p, which equals
// p_energy for g extended by zero outside omega.
struct EnergyModel {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  std::vector<double> w;
  Eigen::VectorXd b;
  Eigen::VectorXd nu;
};

EnergyModel make_model(const FiniteRWSpace& space, const Domain& domain) {
  EnergyModel model;
  const auto m = static_cast<Eigen::Index>(domain.size());
  model.nu = domain.nu_omega;
  model.b = Eigen::VectorXd::Zero(m);
  std::map<std::pair<Eigen::Index, Eigen::Index>, double> pair_w;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Index x = domain.omega[static_cast<std::size_t>(i)];
    for (Kernel::InnerIterator it(space.kernel(), static_cast<Eigen::Index>(x)); it; ++it) {
      const auto y = static_cast<Index>(it.col());
      const double flow = 0.5 * space.nu(x) * it.value();
      const auto j = domain.local[y];
      if (j < 0)
        model.b[i] += flow;
      else if (j != i)
        pair_w[{std::min<Eigen::Index>(i, j), std::max<Eigen::Index>(i, j)}] += flow;
    }
  }
  // Flow from the m-boundary back into omega.
  for (Index y : domain.boundary)
    for (Kernel::InnerIterator it(space.kernel(), static_cast<Eigen::Index>(y)); it; ++it) {
      const auto j = domain.local[static_cast<Index>(it.col())];
      if (j >= 0) model.b[j] += 0.5 * space.nu(y) * it.value();
    }
  for (const auto& [key, w] : pair_w) {
    model.pairs.push_back(key);
    model.w.push_back(w);
  }
  return model;
}

// Below p = 2 the pair energy is smoothed to (s^2 + delta)^{p/2} - delta^{p/2}.
// The final stage uses delta^{p/2} = kSmoothingBias, which bounds the bias
// per unit weight; earlier stages use wider delta as a continuation.
struct Phi {
  double p;
  double delta;
  double bias;
  Phi(double p_, double delta_) : p(p_), delta(delta_), bias(delta_ > 0.0 ? std::pow(delta_, 0.5 * p_) : 0.0) {}

  double value(double s) const {
    if (delta > 0.0) return std::pow(s * s + delta, 0.5 * p) - bias;
    return std::pow(std::abs(s), p);
  }
  double d1(double s) const {
    if (delta > 0.0) return p * s * std::pow(s * s + delta, 0.5 * p - 1.0);
    return s == 0.0 ? 0.0 : p * std::pow(std::abs(s), p - 1.0) * (s < 0.0 ? -1.0 : 1.0);
  }
  double d2(double s) const {
    if (delta > 0.0) return p * std::pow(s * s + delta, 0.5 * p - 2.0) * ((p - 1.0) * s * s + delta);
    return p * (p - 1.0) * std::pow(std::abs(s), p - 2.0);
  }
};

double energy(const EnergyModel& m, const Phi& phi, const Eigen::VectorXd& g) {
  double e = 0.0;
  for (std::size_t k = 0; k < m.pairs.size(); ++k) e += m.w[k] * phi.value(g[m.pairs[k].first] - g[m.pairs[k].second]);
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (m.b[i] > 0.0) e += m.b[i] * phi.value(g[i]);
  return e;
}

Eigen::VectorXd gradient(const EnergyModel& m, const Phi& phi, const Eigen::VectorXd& g) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(g.size());
  for (std::size_t k = 0; k < m.pairs.size(); ++k) {
    const auto [i, j] = m.pairs[k];
    const double d = m.w[k] * phi.d1(g[i] - g[j]);
    grad[i] += d;
    grad[j] -= d;
  }
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (m.b[i] > 0.0) grad[i] += m.b[i] * phi.d1(g[i]);
  return grad;
}

Eigen::SparseMatrix<double> hessian(const EnergyModel& m, const Phi& phi, const Eigen::VectorXd& g, double shift) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * m.pairs.size() + static_cast<std::size_t>(g.size()));
  for (std::size_t k = 0; k < m.pairs.size(); ++k) {
    const auto [i, j] = m.pairs[k];
    const double h = m.w[k] * phi.d2(g[i] - g[j]);
    t.emplace_back(i, i, h);
    t.emplace_back(j, j, h);
    t.emplace_back(i, j, -h);
    t.emplace_back(j, i, -h);
  }
  for (Eigen::Index i = 0; i < g.size(); ++i) t.emplace_back(i, i, m.b[i] * phi.d2(g[i]));
  Eigen::SparseMatrix<double> h(g.size(), g.size());
  h.setFromTriplets(t.begin(), t.end());
  double max_diag = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) max_diag = std::max(max_diag, h.coeff(i, i));
  for (Eigen::Index i = 0; i < g.size(); ++i) h.coeffRef(i, i) += shift * max_diag;
  return h;
}

struct StageResult {
  Eigen::VectorXd g;
  double energy = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

double multiplier_gap(const EnergyModel& m, double p, const Eigen::VectorXd& grad, double e, double volume) {
  const double mu = m.nu.dot(grad) / m.nu.dot(m.nu);
  return std::abs(1.0 - p * e / (mu * volume));
}

// The line search found no representable decrease. Accept when the gradient
// is nearly projected out or the predicted decrease is negligible against E.
bool stalled(double proj, const Eigen::VectorXd& grad, double slope, double e, double tol) {
  return proj <= std::sqrt(tol) * grad.lpNorm<Eigen::Infinity>() || -slope <= kDecrementFloor * std::abs(e);
}

// Newton on E restricted to the hyperplane nu . g = volume.
StageResult newton_stage(const EnergyModel& m, double p, double delta, Eigen::VectorXd g, double tol,
                         std::size_t max_iter) {
  const Phi phi(p, delta);
  const double volume = m.nu.dot(g);
  StageResult out;
  double e = energy(m, phi, g);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd grad = gradient(m, phi, g);
    const double mu = m.nu.dot(grad) / m.nu.dot(m.nu);
    const double proj = (grad - mu * m.nu).lpNorm<Eigen::Infinity>();
    out.iterations = it;
    if (proj <= tol * grad.lpNorm<Eigen::Infinity>()) {
      out.converged = true;
      break;
    }

    double shift = 1e-12;
    // Working from the projected gradient avoids cancelling the mu * nu part
    // of grad against its Hessian image near the optimum.
    const Eigen::VectorXd r = grad - mu * m.nu;
    Eigen::VectorXd a, c;
    for (;;) {
      ldlt.compute(hessian(m, phi, g, shift));
      if (ldlt.info() == Eigen::Success) {
        a = ldlt.solve(r);
        c = ldlt.solve(m.nu);
        if (a.allFinite() && c.allFinite()) break;
      }
      shift *= 100.0;
      if (shift > 1.0) throw Error(Errc::no_convergence, "p-torsion Hessian is not positive definite");
    }
    const Eigen::VectorXd d = -a + c * (m.nu.dot(a) / m.nu.dot(c));
    const double slope = r.dot(d);
    if (!(slope < 0.0)) {
      out.converged = stalled(proj, grad, slope, e, tol);
      break;
    }
    if (-slope <= kFinalDecrement * std::abs(e)) {
      // Predicted decrease at the rounding level of E: take the full step and stop.
      const Eigen::VectorXd trial = g + d;
      const double et = energy(m, phi, trial);
      if (et <= e + kFinalDecrement * std::abs(e)) {
        g = trial;
        e = et;
      }
      out.converged = true;
      out.iterations = it + 1;
      break;
    }
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      const Eigen::VectorXd trial = g + step * d;
      const double et = energy(m, phi, trial);
      if (et <= e + 1e-4 * step * slope) {
        moved = et < e || step == 1.0;
        g = trial;
        e = et;
        break;
      }
    }
    if (!moved) {
      out.converged = stalled(proj, grad, slope, e, tol);
      out.iterations = it + 1;
      break;
    }
    out.iterations = it + 1;
  }
  // Keep the iterate exactly on the constraint.
  g *= volume / m.nu.dot(g);
  const Phi exact(p, 0.0);
  out.energy = energy(m, exact, g);
  out.gap = multiplier_gap(m, p, gradient(m, phi, g), out.energy, volume);
  out.g = std::move(g);
  return out;
}

// Dual of the p-torsion problem on links (pairs and boundary links, weights
// w): any flow sigma with divergence nu bounds sum nu f <= sum w |sigma / w|^q,
// q = p / (p - 1), by Young's inequality, hence T_p <= (that sum)^{p-1}.
struct DualFlow {
  std::vector<Eigen::Index> from, to;  // to < 0 for a boundary link
  std::vector<double> w;
  Eigen::Index n = 0;

  Eigen::VectorXd divergence(const Eigen::VectorXd& sigma) const {
    Eigen::VectorXd div = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < w.size(); ++k) {
      div[from[k]] += sigma[static_cast<Eigen::Index>(k)];
      if (to[k] >= 0) div[to[k]] -= sigma[static_cast<Eigen::Index>(k)];
    }
    return div;
  }
  // Solves (D^T A D) y = rhs and returns A D y.
  std::optional<Eigen::VectorXd> weighted_potential_flow(const Eigen::VectorXd& a, const Eigen::VectorXd& rhs) const {
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double ak = a[static_cast<Eigen::Index>(k)];
      t.emplace_back(from[k], from[k], ak);
      if (to[k] < 0) continue;
      t.emplace_back(to[k], to[k], ak);
      t.emplace_back(from[k], to[k], -ak);
      t.emplace_back(to[k], from[k], -ak);
    }
    Eigen::SparseMatrix<double> lap(n, n);
    lap.setFromTriplets(t.begin(), t.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() != Eigen::Success) return std::nullopt;
    const Eigen::VectorXd y = solver.solve(rhs);
    if (!y.allFinite()) return std::nullopt;
    Eigen::VectorXd out(static_cast<Eigen::Index>(w.size()));
    for (std::size_t k = 0; k < w.size(); ++k)
      out[static_cast<Eigen::Index>(k)] = a[static_cast<Eigen::Index>(k)] * (y[from[k]] - (to[k] >= 0 ? y[to[k]] : 0.0));
    return out;
  }
  // log of sum w |sigma / w|^q, scaled by the largest ratio to avoid overflow.
  double log_cost(const Eigen::VectorXd& sigma, double q) const {
    double top = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) top = std::max(top, std::abs(sigma[static_cast<Eigen::Index>(k)]) / w[k]);
    if (top == 0.0) return -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
      sum += w[k] * std::pow(std::abs(sigma[static_cast<Eigen::Index>(k)]) / w[k] / top, q);
    return q * std::log(top) + std::log(sum);
  }
};

// Starts from the flow induced by the iterate, repairs its divergence, then
// takes Newton steps on the dual cost within the feasible affine set.
double dual_upper_bound(const EnergyModel& m, double p, const Eigen::VectorXd& g, double e, double volume) {
  DualFlow df;
  df.n = g.size();
  const Phi exact(p, 0.0);
  const double scale = volume / e;  // scale^{p-1} of the optimal rescaling
  std::vector<double> raw;
  for (std::size_t k = 0; k < m.pairs.size(); ++k) {
    const auto [i, j] = m.pairs[k];
    df.from.push_back(i);
    df.to.push_back(j);
    df.w.push_back(m.w[k]);
    raw.push_back(m.w[k] * exact.d1(g[i] - g[j]) / p * scale);
  }
  for (Eigen::Index i = 0; i < df.n; ++i)
    if (m.b[i] > 0.0) {
      df.from.push_back(i);
      df.to.push_back(-1);
      df.w.push_back(m.b[i]);
      raw.push_back(m.b[i] * exact.d1(g[i]) / p * scale);
    }
  const auto links = static_cast<Eigen::Index>(df.w.size());
  Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(raw.data(), links);
  const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(df.w.data(), links);
  const auto fix = df.weighted_potential_flow(wv, m.nu - df.divergence(sigma));
  if (!fix) return std::numeric_limits<double>::infinity();
  sigma += *fix;

  const double q = p / (p - 1.0);
  double cost = df.log_cost(sigma, q);
  for (int it = 0; it < 50; ++it) {
    // Gradient and diagonal Hessian of the cost divided by top^q.
    double top = 0.0;
    for (Eigen::Index k = 0; k < links; ++k) top = std::max(top, std::abs(sigma[k]) / wv[k]);
    Eigen::VectorXd grad(links), inv_h(links);
    double h_max = 0.0;
    for (Eigen::Index k = 0; k < links; ++k) {
      const double r = std::abs(sigma[k]) / wv[k] / top;
      grad[k] = q * std::pow(r, q - 1.0) * (sigma[k] < 0.0 ? -1.0 : 1.0);
      inv_h[k] = q * (q - 1.0) * std::pow(r, q - 2.0) / wv[k];
      h_max = std::max(h_max, inv_h[k]);
    }
    for (Eigen::Index k = 0; k < links; ++k) inv_h[k] = 1.0 / std::max(inv_h[k], 1e-14 * h_max);
    // Feasible Newton step: delta = A (D y - grad) with D^T delta = nu - D^T sigma.
    const Eigen::VectorXd a_grad = inv_h.cwiseProduct(grad);
    const auto flow = df.weighted_potential_flow(inv_h, m.nu - df.divergence(sigma) + df.divergence(a_grad));
    if (!flow) break;
    const Eigen::VectorXd delta = *flow - a_grad;
    // Newton undershoots on high powers by about a factor q - 1, so the
    // step is also allowed to grow.
    double step = 1.0;
    double best = df.log_cost(sigma + delta, q);
    for (double s = 2.0; s <= 2.0 * q; s *= 2.0) {
      const double c = df.log_cost(sigma + s * delta, q);
      if (!(c < best)) break;
      best = c;
      step = s;
    }
    for (int ls = 0; ls < 40 && !(best < cost); ++ls) {
      step *= 0.5;
      best = df.log_cost(sigma + step * delta, q);
    }
    const bool improved = best < cost && cost - best > 1e-15;
    if (best < cost) {
      sigma += step * delta;
      cost = best;
    }
    if (!improved) break;
  }
  // The final flow is feasible up to the last solve's rounding.
  return std::exp((p - 1.0) * cost);
}

std::vector<double> continuation_path(double p) {
  std::vector<double> path;
  if (p < 2.0) {
    for (double q = 1.5; q > p; q = 1.0 + 0.5 * (q - 1.0)) path.push_back(q);
  } else {
    for (double q = 4.0; q < p; q *= 2.0) path.push_back(q);
  }
  path.push_back(p);
  return path;
}

// Smoothing widths for one exponent, widest first. The iterate is
// normalized to nu-average 1, so differences are O(1).
std::vector<double> smoothing_path(double p) {
  if (p >= 2.0) return {0.0};
  const double final_delta = std::pow(kSmoothingBias, 2.0 / p);
  std::vector<double> path;
  for (double d = 1e-2; d > 100.0 * final_delta; d *= 1e-2) path.push_back(d);
  path.push_back(final_delta);
  return path;
}

}  // namespace

PTorsionResult p_torsion(const FiniteRWSpace& space, const Domain& domain, double p, double tol,
                         std::size_t max_iter) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error(Errc::invalid_argument, "p-torsion needs p > 1");
  const TorsionResult linear = stress_solve(space, domain);
  const EnergyModel model = make_model(space, domain);
  const double volume = domain.nu_total;

  StageResult stage;
  stage.g = linear.stress * (volume / linear.rigidity);
  std::size_t iterations = 0;
  for (double q : continuation_path(p)) {
    if (q == 2.0) continue;
    for (double delta : smoothing_path(q)) {
      stage = newton_stage(model, q, delta, stage.g, tol, max_iter);
      iterations += stage.iterations;
    }
  }
  if (p == 2.0) stage = newton_stage(model, 2.0, 0.0, stage.g, tol, max_iter);
  if (!stage.converged || !std::isfinite(stage.energy) || !(stage.energy > 0.0)) {
    std::ostringstream msg;
    msg << "p-torsion Newton stopped after " << iterations << " iterations with energy gap " << stage.gap;
    throw Error(Errc::no_convergence, msg.str());
  }

  PTorsionResult out;
  out.p = p;
  out.iterations = iterations + (p == 2.0 ? stage.iterations : 0);
  out.energy_gap = stage.gap;
  out.rigidity = std::pow(volume, p) / stage.energy;
  out.upper_bound = std::max(out.rigidity, dual_upper_bound(model, p, stage.g, stage.energy, volume));
  out.duality_gap = (out.upper_bound - out.rigidity) / out.rigidity;
  const double scale = std::pow(volume / stage.energy, 1.0 / (p - 1.0));
  out.stress = (scale * stage.g).cwiseMax(0.0);
  const double mass = domain.nu_omega.dot(out.stress);
  out.identity_residual = std::abs(mass - p_energy(space, domain, out.stress, p)) / mass;
  return out;
}

LambdaPEstimate lambda_p_estimate(const FiniteRWSpace& space, const Domain& domain, double p, int restarts,
                                  double tol, std::uint64_t seed) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(Errc::invalid_argument, "lambda_p needs p >= 1");
  if (p == 2.0) return {eigenvalue_exact(space, domain), true};
  const bool small = domain.size() <= kExhaustiveCheegerLimit;
  const CheegerResult h1 = cheeger(space, domain, 1.0, small ? CheegerMode::exhaustive : CheegerMode::greedy);
  if (p == 1.0) return {h1.value, h1.exact};

  const EnergyModel model = make_model(space, domain);
  auto e_of = [&](const Eigen::VectorXd& f) {
    double e = 0.0;
    for (std::size_t k = 0; k < model.pairs.size(); ++k)
      e += model.w[k] * std::pow(std::abs(f[model.pairs[k].first] - f[model.pairs[k].second]), p);
    for (Eigen::Index i = 0; i < f.size(); ++i) e += model.b[i] * std::pow(std::abs(f[i]), p);
    return e;
  };
  auto n_of = [&](const Eigen::VectorXd& f) { return model.nu.dot(f.cwiseAbs().array().pow(p).matrix()); };
  auto grad_r = [&](const Eigen::VectorXd& f, double r) {
    Eigen::VectorXd ge = Eigen::VectorXd::Zero(f.size());
    for (std::size_t k = 0; k < model.pairs.size(); ++k) {
      const auto [i, j] = model.pairs[k];
      const double s = f[i] - f[j];
      const double d = model.w[k] * p * std::pow(std::abs(s), p - 1.0) * (s < 0 ? -1.0 : 1.0);
      ge[i] += d;
      ge[j] -= d;
    }
    Eigen::VectorXd gn(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      const double s = std::pow(std::abs(f[i]), p - 1.0) * (f[i] < 0 ? -1.0 : 1.0);
      ge[i] += model.b[i] * p * s;
      gn[i] = model.nu[i] * p * s;
    }
    return Eigen::VectorXd(ge - r * gn);
  };
  auto normalize = [&](Eigen::VectorXd f) {
    f = f.cwiseMax(0.0);
    const double n = n_of(f);
    return n > 0.0 ? Eigen::VectorXd(f / std::pow(n, 1.0 / p)) : f;
  };

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(stress_solve(space, domain).stress);
  Eigen::VectorXd ind = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.size()));
  for (Index x : h1.argmin_set) ind[domain.local[x]] = 1.0;
  starts.push_back(ind);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd f(ind.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = unif(rng);
    starts.push_back(f);
  }

  double best = std::numeric_limits<double>::infinity();
  for (auto f : starts) {
    f = normalize(f);
    double r = e_of(f);
    best = std::min(best, r);
    double step = 1.0;
    for (int it = 0; it < 5000 && step > 1e-16; ++it) {
      const Eigen::VectorXd grad = grad_r(f, r);
      bool improved = false;
      while (step > 1e-16) {
        const Eigen::VectorXd trial = normalize(f - step * grad);
        const double rt = e_of(trial);
        if (rt < r) {
          const bool done = r - rt <= tol * r;
          f = trial;
          r = rt;
          step *= 2.0;
          improved = !done;
          break;
        }
        step *= 0.5;
      }
      best = std::min(best, r);
      if (!improved) break;
    }
  }
  return {best, false};
}

}  // namespace rwt
