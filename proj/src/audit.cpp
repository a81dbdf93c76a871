#include "rwt/audit.hpp"

#include "rwt/error.hpp"
#include "rwt/geometry.hpp"
#include "rwt/torsion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rwt {

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

std::string p_suffix(double p) { return " (p=" + fmt(p) + ")"; }

}  // namespace

std::string_view row_status_name(RowStatus s) noexcept {
  switch (s) {
    case RowStatus::pass: return "pass";
    case RowStatus::fail: return "fail";
    case RowStatus::skipped: return "skipped";
  }
  return "skipped";
}

bool AuditReport::all_pass() const {
  return std::none_of(rows.begin(), rows.end(), [](const AuditRow& r) { return r.status == RowStatus::fail; });
}

AuditRow inequality_row(std::string name, double lhs, double rhs, double tol_rel, std::string note) {
  AuditRow row;
  row.name = std::move(name);
  row.lhs = lhs;
  row.rhs = rhs;
  row.slack = rhs - lhs;
  row.tol = tol_rel * std::max(1.0, std::abs(rhs));
  row.status = row.slack >= -row.tol ? RowStatus::pass : RowStatus::fail;
  row.note = std::move(note);
  return row;
}

AuditRow skipped_row(std::string name, std::string reason) {
  AuditRow row;
  row.name = std::move(name);
  row.lhs = row.rhs = row.slack = std::nan("");
  row.status = RowStatus::skipped;
  row.note = "skipped: " + std::move(reason);
  return row;
}

AuditReport audit(const FiniteRWSpace& space, const Domain& domain, const std::vector<double>& p_list) {
  require_standing_assumptions(domain);
  AuditReport rep;
  rep.domain_size = domain.size();
  rep.nu_domain = domain.nu_total;
  rep.nu_closure = domain.nu_closure;
  rep.perimeter = perimeter(space, domain.omega);
  rep.connected = is_m_connected(space, domain.omega);
  rep.reversible = check_reversibility(space, 1e-12 * space.nu().maxCoeff()).pass;
  if (!rep.reversible) rep.warnings.push_back("space is not reversible; symmetric-kernel results do not apply");
  if (!rep.connected) rep.warnings.push_back("domain is not m-connected");
  if (!(rep.perimeter < rep.nu_domain))
    rep.warnings.push_back("P_m(domain) = nu(domain): no internal jumps, strict bounds degenerate to equalities");

  const TorsionResult t = stress_solve(space, domain);
  rep.torsion = t.rigidity;
  rep.lambda = eigenvalue_exact(space, domain);
  const double nu = rep.nu_domain, per = rep.perimeter, tq = rep.torsion, lam = rep.lambda;

  rep.rows.push_back(inequality_row("torsion dominates measure: nu <= T", nu, tq, 1e-10));
  rep.rows.push_back(inequality_row("measure below isoperimetric ratio: nu <= nu^2/P", nu, nu * nu / per, 1e-10));
  rep.rows.push_back(inequality_row("Polya lower bound: nu^2/P <= T", nu * nu / per, tq, 1e-10));
  rep.rows.push_back(inequality_row("spectral upper bound: T <= nu/lambda", tq, nu / lam, 1e-10));
  rep.rows.push_back(inequality_row("eigenvalue bound: lambda <= nu/T", lam, nu / tq, 1e-10));
  rep.rows.push_back(inequality_row("stress recursion residual <= 1e-10", stress_residual(domain, t.stress), 1e-10, 0.0));

  const std::string limit_row = "eigenvalue limit formula: |lambda_30 - lambda| <= 1e-3";
  try {
    const double lim = eigenvalue_limit(space, domain, 30);
    if (rep.connected)
      rep.rows.push_back(inequality_row(limit_row, std::abs(lim - lam), 1e-3, 0.0, "lambda_30 = " + fmt(lim)));
    else
      rep.rows.push_back(skipped_row(limit_row, "domain is not m-connected, positivity hypothesis unchecked"));
  } catch (const Error& e) {
    if (e.code() != Errc::zero_g) throw;
    rep.rows.push_back(skipped_row(limit_row, "g vanishes"));
  }

  const bool exact = domain.size() <= kExhaustiveCheegerLimit;
  const std::string greedy_only = "greedy bound only";
  double h1 = std::nan("");
  if (exact) {
    const CheegerResult c1 = cheeger(space, domain, 1.0, CheegerMode::exhaustive);
    h1 = c1.value;
    const bool calibrable = std::abs(h1 - per / nu) <= 1e-12 * std::max(1.0, h1);
    if (calibrable)
      rep.rows.push_back(inequality_row("Makai-type upper bound: T <= nu^2 nu(closure) / (2 P^2)", tq,
                                        0.5 * nu * nu * rep.nu_closure / (per * per), 1e-10));
    else
      rep.rows.push_back(skipped_row("Makai-type upper bound: T <= nu^2 nu(closure) / (2 P^2)", "domain is not calibrable"));
  } else {
    rep.rows.push_back(skipped_row("Makai-type upper bound: T <= nu^2 nu(closure) / (2 P^2)", greedy_only));
  }

  for (double p : p_list) {
    const std::string ps = p_suffix(p);
    if (p > 1.0) {
      const PTorsionResult pt = p_torsion(space, domain, p);
      rep.rows.push_back(inequality_row("p-torsion energy identity gap <= 1e-8" + ps, pt.energy_gap, 1e-8, 0.0));
      rep.rows.push_back(inequality_row("p-torsion duality bracket (upper - T_p) / T_p <= 1e-8" + ps, pt.duality_gap,
                                        1e-8, 0.0, "upper = " + fmt(pt.upper_bound)));
      // rigidity is a certified lower bound on T_p and upper_bound a certified upper bound
      const double inv = 1.0 / pt.rigidity;
      const double inv_low = 1.0 / pt.upper_bound;
      if (exact) {
        const double hp = cheeger(space, domain, p, CheegerMode::exhaustive).value;
        const double lower = std::pow(2.0, p - 1.0) * std::pow(h1, p) / std::pow(rep.nu_closure, p - 1.0);
        rep.rows.push_back(inequality_row("Cheeger sandwich lower: 2^(p-1) h_1^p / nu(closure)^(p-1) <= 1/T_p" + ps,
                                          lower, inv_low, 1e-8));
        rep.rows.push_back(inequality_row("Cheeger sandwich upper: 1/T_p <= h_p" + ps, inv, hp, 1e-8));
      } else {
        rep.rows.push_back(skipped_row("Cheeger sandwich lower: 2^(p-1) h_1^p / nu(closure)^(p-1) <= 1/T_p" + ps, greedy_only));
        rep.rows.push_back(skipped_row("Cheeger sandwich upper: 1/T_p <= h_p" + ps, greedy_only));
      }
    }
    if (exact) {
      const LambdaPEstimate lp = lambda_p_estimate(space, domain, p);
      rep.rows.push_back(inequality_row("lambda_p upper bound: lambda_p <= lambda_1" + ps, lp.value, h1, 1e-10,
                                        lp.certified ? "certified value" : "non-certified upper estimate"));
      if (p == 2.0)
        rep.rows.push_back(inequality_row("lambda_p lower bound: (lambda_1/p)^p <= lambda_p" + ps, std::pow(h1 / p, p),
                                          lp.value, 1e-10));
      else
        rep.rows.push_back(skipped_row("lambda_p lower bound: (lambda_1/p)^p <= lambda_p" + ps,
                                       "estimate is not certified for p != 2"));
    } else {
      rep.rows.push_back(skipped_row("lambda_p upper bound: lambda_p <= lambda_1" + ps, greedy_only));
    }
  }
  return rep;
}

AuditReport audit_quantum(const MetricGraph& g) {
  AuditReport rep;
  const QuantumTorsion q = quantum_torsion(g);
  const double bound = quantum_lower_bound(g);
  const ReducedGraph r = reduce_to_rws(g, q.c);
  rep.domain_size = r.domain.size();
  rep.nu_domain = r.domain.nu_total;
  rep.nu_closure = r.domain.nu_closure;
  rep.perimeter = perimeter(r.space, r.domain.omega);
  rep.torsion = q.reduced_torsion;
  rep.lambda = eigenvalue_exact(r.space, r.domain);
  rep.connected = is_m_connected(r.space, r.domain.omega);
  rep.rows.push_back(inequality_row("quantum torsion lower bound: bound <= T_q", bound, q.t_q, 1e-9));
  rep.rows.push_back(inequality_row("c-invariance: |T_q(c) - T_q(2c)| / T_q <= 1e-9", q.c_invariance_gap, 1e-9, 0.0));
  rep.rows.push_back(inequality_row("total weight identity deviation <= 1e-12", r.weight_identity_deviation, 1e-12, 0.0));
  rep.rows.push_back(inequality_row("reduced torsion equation residual <= 1e-10", q.residual, 1e-10, 0.0));
  rep.rows.push_back(inequality_row("vertex-value formula agreement <= 1e-10",
                                    std::abs(q.t_q_from_vertex_values - q.t_q) / q.t_q, 1e-10, 0.0));
  return rep;
}

}  // namespace rwt
