#pragma once

#include "rwt/quantum.hpp"
#include "rwt/space.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace rwt {

enum class RowStatus { pass, fail, skipped };
std::string_view row_status_name(RowStatus s) noexcept;

/// One checked inequality lhs <= rhs; slack = rhs - lhs, pass iff slack >= -tol.
struct AuditRow {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double tol = 0.0;
  RowStatus status = RowStatus::skipped;
  std::string note;
};

struct AuditReport {
  std::vector<AuditRow> rows;
  std::size_t domain_size = 0;
  double nu_domain = 0.0;
  double nu_closure = 0.0;
  double perimeter = 0.0;
  double lambda = 0.0;
  double torsion = 0.0;
  bool connected = true;
  bool reversible = true;
  std::vector<std::string> warnings;

  bool all_pass() const;
};

/// Absolute tolerance `tol_rel * max(1, |rhs|)`.
AuditRow inequality_row(std::string name, double lhs, double rhs, double tol_rel, std::string note = {});
AuditRow skipped_row(std::string name, std::string reason);

/// Evaluates the torsion, eigenvalue, Cheeger and p-torsion inequalities on
/// one instance. Rows needing exact Cheeger constants are skipped beyond the
/// exhaustive limit.
AuditReport audit(const FiniteRWSpace& space, const Domain& domain, const std::vector<double>& p_list);
AuditReport audit_quantum(const MetricGraph& g);

}  // namespace rwt
