#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rwt {

enum class Errc {
  // input errors
  invalid_argument,
  row_not_stochastic,
  nonpositive_measure,
  negative_mass,
  parse_error,
  duplicate_edge,
  nonpositive_weight,
  isolated_vertex,
  unknown_state,
  empty_domain,
  invalid_metric_graph,
  // computation errors
  standing_assumption_violated,
  singular_system,
  no_convergence,
  zero_g,
  domain_too_large,
  kernel_escapes_box,
  step_cap_exceeded,
  padding_negative,
  zero_function,
  c_invariance_violated,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library. `is_input_error()` separates bad
/// inputs (files, arguments, malformed spaces) from numerical failures.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }
  /// what() without the code-name prefix.
  const std::string& message() const noexcept { return message_; }
  bool is_input_error() const noexcept { return code_ < Errc::standing_assumption_violated; }

 private:
  Errc code_;
  std::string message_;
};

}  // namespace rwt
