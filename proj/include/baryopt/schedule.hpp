#pragma once

#include <cstddef>
#include <string>

namespace baryopt {

/// Deterministic per-step standard-deviation schedule for the exploration
/// term. Step indices are 0-based. Three shapes:
///   constant:  sigma_n = s0
///   linear:    sigma_n interpolates s_start -> s_end over `steps` steps,
///              hitting both endpoints exactly (indices past the end hold
///              s_end)
///   geometric: sigma_n = s_start * ratio^n
class VarianceSchedule {
 public:
  enum class Kind { kConstant, kLinear, kGeometric };

  /// The factories reject out-of-range parameters (sigma <= 0 or nonfinite,
  /// linear steps < 2, geometric ratio outside (0, 1]) with
  /// std::domain_error.
  static VarianceSchedule constant(double sigma0);
  static VarianceSchedule linear(double sigma_start, double sigma_end,
                                 std::size_t steps);
  static VarianceSchedule geometric(double sigma_start, double ratio);

  /// Parses "constant:S", "linear:START:END:STEPS", "geometric:START:RATIO".
  /// Throws std::invalid_argument on malformed or out-of-range input.
  static VarianceSchedule parse(const std::string& text);

  double sigma(std::size_t n) const;
  Kind kind() const { return kind_; }

  /// Canonical textual form, parseable by parse(); echoed into traces.
  std::string describe() const;

 private:
  VarianceSchedule(Kind kind, double a, double b, std::size_t steps);
  static VarianceSchedule parse_impl(const std::string& text);

  Kind kind_;
  double a_;           // sigma0 / sigma_start
  double b_;           // sigma_end / ratio (unused for constant)
  std::size_t steps_;  // linear only
};

}  // namespace baryopt
