#include "rwt/error.hpp"

namespace rwt {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::row_not_stochastic: return "RowNotStochastic";
    case Errc::nonpositive_measure: return "NonpositiveMeasure";
    case Errc::negative_mass: return "NegativeMass";
    case Errc::parse_error: return "ParseError";
    case Errc::duplicate_edge: return "DuplicateEdge";
    case Errc::nonpositive_weight: return "NonpositiveWeight";
    case Errc::isolated_vertex: return "IsolatedVertex";
    case Errc::unknown_state: return "UnknownState";
    case Errc::empty_domain: return "EmptyDomain";
    case Errc::invalid_metric_graph: return "InvalidMetricGraph";
    case Errc::standing_assumption_violated: return "StandingAssumptionViolated";
    case Errc::singular_system: return "SingularSystem";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::zero_g: return "ZeroG";
    case Errc::domain_too_large: return "DomainTooLarge";
    case Errc::kernel_escapes_box: return "KernelEscapesBox";
    case Errc::step_cap_exceeded: return "StepCapExceeded";
    case Errc::padding_negative: return "PaddingNegative";
    case Errc::zero_function: return "ZeroFunction";
    case Errc::c_invariance_violated: return "CInvarianceViolated";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), message_(what) {}

}  // namespace rwt
