#include "rwt/space.hpp"

#include "rwt/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rwt {

std::optional<Index> FiniteRWSpace::find(std::string_view id) const {
  auto it = lookup_.find(std::string(id));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

Index FiniteRWSpace::index_of(std::string_view id) const {
  if (auto x = find(id)) return *x;
  throw Error(Errc::unknown_state, "state '" + std::string(id) + "' is not part of the space");
}

double FiniteRWSpace::measure(std::span<const Index> set) const {
  double total = 0.0;
  for (Index x : set) total += nu(x);
  return total;
}

double FiniteRWSpace::mass_into(Index x, const std::vector<char>& in_set) const {
  double mass = 0.0;
  for (Kernel::InnerIterator it(kernel_, static_cast<Eigen::Index>(x)); it; ++it)
    if (in_set[static_cast<std::size_t>(it.col())]) mass += it.value();
  return mass;
}

FiniteRWSpace build_space(std::vector<std::string> states, std::vector<double> nu,
                          std::vector<IndexedTransition> entries) {
  if (states.empty()) throw Error(Errc::invalid_argument, "a space needs at least one state");
  if (nu.size() != states.size())
    throw Error(Errc::invalid_argument, "measure has " + std::to_string(nu.size()) + " weights for " +
                                            std::to_string(states.size()) + " states");

  FiniteRWSpace space;
  space.lookup_.reserve(states.size());
  for (Index i = 0; i < states.size(); ++i) {
    if (!space.lookup_.emplace(states[i], i).second)
      throw Error(Errc::invalid_argument, "duplicate state identifier '" + states[i] + "'");
    if (!(nu[i] > 0.0) || !std::isfinite(nu[i])) {
      std::ostringstream msg;
      msg << "state '" << states[i] << "' has measure " << nu[i];
      throw Error(Errc::nonpositive_measure, msg.str());
    }
  }

  const auto n = static_cast<int>(states.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.from >= states.size() || e.to >= states.size())
      throw Error(Errc::invalid_argument, "transition refers to a state index out of range");
    if (!(e.mass >= 0.0) || !std::isfinite(e.mass)) {
      std::ostringstream msg;
      msg << "transition " << states[e.from] << " -> " << states[e.to] << " has mass " << e.mass;
      throw Error(Errc::negative_mass, msg.str());
    }
    if (e.mass > 0.0) triplets.emplace_back(static_cast<int>(e.from), static_cast<int>(e.to), e.mass);
  }
  space.kernel_.resize(n, n);
  space.kernel_.setFromTriplets(triplets.begin(), triplets.end());
  space.kernel_.makeCompressed();

  for (int x = 0; x < n; ++x) {
    double sum = 0.0;
    for (Kernel::InnerIterator it(space.kernel_, x); it; ++it) sum += it.value();
    if (std::abs(sum - 1.0) > kStructuralTol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row of state '" << states[static_cast<std::size_t>(x)] << "' sums to " << sum;
      throw Error(Errc::row_not_stochastic, msg.str());
    }
  }

  space.kernel_t_ = space.kernel_.transpose();
  space.kernel_t_.makeCompressed();
  space.nu_ = Eigen::Map<const Eigen::VectorXd>(nu.data(), n);
  space.ids_ = std::move(states);
  return space;
}

FiniteRWSpace build_space(std::vector<std::string> states, std::vector<double> nu,
                          const std::vector<Transition>& entries) {
  std::unordered_map<std::string, Index> lookup;
  for (Index i = 0; i < states.size(); ++i) lookup.emplace(states[i], i);
  auto resolve = [&](const std::string& id) {
    auto it = lookup.find(id);
    if (it == lookup.end()) throw Error(Errc::unknown_state, "transition refers to unknown state '" + id + "'");
    return it->second;
  };
  std::vector<IndexedTransition> indexed;
  indexed.reserve(entries.size());
  for (const auto& e : entries) indexed.push_back({resolve(e.from), resolve(e.to), e.mass});
  return build_space(std::move(states), std::move(nu), std::move(indexed));
}

ReversibilityReport check_reversibility(const FiniteRWSpace& space, double tol) {
  ReversibilityReport report;
  const Kernel& p = space.kernel();
  const Kernel& pt = space.kernel_transpose();
  for (int x = 0; x < p.outerSize(); ++x) {
    // Row x of P and row x of P^T enumerate P(x,.) and P(.,x); walking both
    // covers every pair where either direction is nonzero.
    for (Kernel::InnerIterator it(p, x); it; ++it) {
      const auto y = static_cast<Index>(it.col());
      const double forward = space.nu(static_cast<Index>(x)) * it.value();
      const double backward = space.nu(y) * pt.coeff(x, it.col());
      report.max_deviation = std::max(report.max_deviation, std::abs(forward - backward));
    }
    for (Kernel::InnerIterator it(pt, x); it; ++it) {
      if (p.coeff(x, it.col()) == 0.0)
        report.max_deviation =
            std::max(report.max_deviation, space.nu(static_cast<Index>(it.col())) * it.value());
    }
  }
  report.pass = report.max_deviation <= tol;
  return report;
}

std::vector<char> indicator(std::size_t n, std::span<const Index> set) {
  std::vector<char> mask(n, 0);
  for (Index x : set) mask[x] = 1;
  return mask;
}

StateSet make_state_set(const FiniteRWSpace& space, std::vector<Index> states) {
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  if (!states.empty() && states.back() >= space.size())
    throw Error(Errc::invalid_argument, "state index out of range");
  return states;
}

StateSet complement(const FiniteRWSpace& space, std::span<const Index> set) {
  const auto mask = indicator(space.size(), set);
  StateSet out;
  for (Index x = 0; x < space.size(); ++x)
    if (!mask[x]) out.push_back(x);
  return out;
}

StateSet m_boundary(const FiniteRWSpace& space, std::span<const Index> omega) {
  const auto in_omega = indicator(space.size(), omega);
  std::vector<char> hit(space.size(), 0);
  const Kernel& pt = space.kernel_transpose();
  for (Index x : omega)
    for (Kernel::InnerIterator it(pt, static_cast<Eigen::Index>(x)); it; ++it) {
      const auto y = static_cast<Index>(it.col());
      if (!in_omega[y] && it.value() > 0.0) hit[y] = 1;
    }
  StateSet out;
  for (Index y = 0; y < space.size(); ++y)
    if (hit[y]) out.push_back(y);
  return out;
}

StateSet m_closure(const FiniteRWSpace& space, std::span<const Index> omega) {
  StateSet boundary = m_boundary(space, omega);
  StateSet out;
  out.reserve(omega.size() + boundary.size());
  std::set_union(omega.begin(), omega.end(), boundary.begin(), boundary.end(), std::back_inserter(out));
  return out;
}

bool is_m_connected(const FiniteRWSpace& space, std::span<const Index> omega) {
  if (omega.empty()) return false;
  if (omega.size() == 1) return space.transition(omega[0], omega[0]) > 0.0;

  const auto in_omega = indicator(space.size(), omega);
  std::vector<char> seen(space.size(), 0);
  std::vector<Index> stack{omega[0]};
  seen[omega[0]] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const Index x = stack.back();
    stack.pop_back();
    for (const Kernel* k : {&space.kernel(), &space.kernel_transpose()})
      for (Kernel::InnerIterator it(*k, static_cast<Eigen::Index>(x)); it; ++it) {
        const auto y = static_cast<Index>(it.col());
        if (in_omega[y] && !seen[y] && it.value() > 0.0) {
          seen[y] = 1;
          ++reached;
          stack.push_back(y);
        }
      }
  }
  return reached == omega.size();
}

FiniteRWSpace restrict_to(const FiniteRWSpace& space, std::span<const Index> omega) {
  if (omega.empty()) throw Error(Errc::empty_domain, "cannot restrict to an empty set");
  std::vector<std::ptrdiff_t> local(space.size(), -1);
  for (std::size_t i = 0; i < omega.size(); ++i) local[omega[i]] = static_cast<std::ptrdiff_t>(i);

  std::vector<std::string> ids;
  std::vector<double> nu;
  std::vector<IndexedTransition> entries;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const Index x = omega[i];
    ids.push_back(space.id(x));
    nu.push_back(space.nu(x));
    double escaping = 0.0;
    double loop = 0.0;
    for (Kernel::InnerIterator it(space.kernel(), static_cast<Eigen::Index>(x)); it; ++it) {
      const auto y = static_cast<Index>(it.col());
      if (y == x)
        loop += it.value();
      else if (local[y] >= 0)
        entries.push_back({i, static_cast<Index>(local[y]), it.value()});
      else
        escaping += it.value();
    }
    if (loop + escaping > 0.0) entries.push_back({i, i, loop + escaping});
  }
  return build_space(std::move(ids), std::move(nu), std::move(entries));
}

Domain make_domain(const FiniteRWSpace& space, std::vector<Index> omega) {
  Domain d;
  d.omega = make_state_set(space, std::move(omega));
  if (d.omega.empty()) throw Error(Errc::empty_domain, "domain has no states");
  d.boundary = m_boundary(space, d.omega);
  std::set_union(d.omega.begin(), d.omega.end(), d.boundary.begin(), d.boundary.end(),
                 std::back_inserter(d.closure));
  d.local.assign(space.size(), -1);
  for (std::size_t i = 0; i < d.omega.size(); ++i) d.local[d.omega[i]] = static_cast<std::ptrdiff_t>(i);

  const auto m = static_cast<Eigen::Index>(d.omega.size());
  d.nu_omega.resize(m);
  d.escape.resize(m);
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Index x = d.omega[static_cast<std::size_t>(i)];
    d.nu_omega[i] = space.nu(x);
    double outside = 0.0;
    for (Kernel::InnerIterator it(space.kernel(), static_cast<Eigen::Index>(x)); it; ++it) {
      const auto j = d.local[static_cast<Index>(it.col())];
      if (j >= 0)
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), it.value());
      else
        outside += it.value();
    }
    d.escape[i] = outside;
  }
  d.sub_kernel.resize(m, m);
  d.sub_kernel.setFromTriplets(triplets.begin(), triplets.end());
  d.sub_kernel.makeCompressed();
  d.sub_kernel_t = d.sub_kernel.transpose();
  d.sub_kernel_t.makeCompressed();
  d.nu_total = d.nu_omega.sum();
  d.nu_closure = d.nu_total + space.measure(d.boundary);
  return d;
}

Domain make_domain(const FiniteRWSpace& space, const std::vector<std::string>& omega_ids) {
  std::vector<Index> omega;
  omega.reserve(omega_ids.size());
  for (const auto& id : omega_ids) omega.push_back(space.index_of(id));
  return make_domain(space, std::move(omega));
}

void require_standing_assumptions(const Domain& domain) {
  if (!(domain.nu_total > 0.0))
    throw Error(Errc::standing_assumption_violated, "domain has zero measure");
  if (!(domain.nu_closure > domain.nu_total))
    throw Error(Errc::standing_assumption_violated,
                "domain has an empty m-boundary (nu(closure) == nu(domain)); nothing ever exits");
}

}  // namespace rwt
