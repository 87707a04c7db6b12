#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "baryopt/barycenter.hpp"
#include "baryopt/objectives.hpp"
#include "baryopt/rng.hpp"
#include "baryopt/schedule.hpp"

namespace baryopt {

/// Shape of the exploration covariance. Isotropic uses sigma_n^2 I; diagonal
/// scales each component's variance by a fixed positive multiplier, i.e.
/// covariance sigma_n^2 diag(multipliers).
class CovarianceMode {
 public:
  enum class Kind { kIsotropic, kDiagonal };

  static CovarianceMode isotropic() { return CovarianceMode(); }
  static CovarianceMode diagonal(Vec variance_multipliers);

  Kind kind() const { return kind_; }
  const Vec& multipliers() const { return multipliers_; }

  /// Per-component standard deviation at schedule value sigma_n.
  double component_stddev(double sigma_n, std::size_t k) const;

  std::string describe() const;

 private:
  CovarianceMode() = default;
  Kind kind_ = Kind::kIsotropic;
  Vec multipliers_;
};

/// All free parameters of one randomized search run.
struct SearchConfig {
  SearchConfig(WeightExponent nu_, double xi_, VarianceSchedule schedule_,
               std::size_t budget_, std::uint64_t seed_, Vec initial_guess_,
               CovarianceMode covariance_ = CovarianceMode::isotropic());

  WeightExponent nu;
  double xi;  // momentum/damping factor in [0, 1)
  VarianceSchedule schedule;
  std::size_t budget;  // number of oracle queries
  std::uint64_t seed;
  Vec initial_guess;
  CovarianceMode covariance;
};

/// One row of a run trace: everything observed at oracle query n (1-based).
struct StepRecord {
  std::size_t n = 0;
  Vec x;                // queried location
  double f_value = 0.0; // oracle answer
  Vec estimate;         // x-hat after absorbing the query
  double sigma_n = 0.0; // schedule value used for the proposal
  Vec z;                // realized curiosity step
  double best_f = 0.0;  // best oracle answer so far (non-increasing)
  double gain = 0.0;    // realized gain F_n in [0, 1]
};

/// Full record of a run. `valid` is false when the oracle failed mid-run; the
/// records collected up to the failure are retained.
struct RunTrace {
  std::vector<StepRecord> records;
  double best_f = 0.0;
  Vec best_x;
  Vec final_estimate;
  bool valid = true;
  std::string error_message;
};

/// Draws the curiosity step z ~ N(xi * prev_delta, sigma_n^2 I) (or the
/// diagonal covariance) and returns (z, x) with x = estimate(state) + z.
std::pair<Vec, Vec> propose(const BarycenterState& state, const Vec& prev_delta,
                            double sigma_n, double xi,
                            const CovarianceMode& covariance,
                            GaussianStream& rng);

/// Result of one search step, value-style: the advanced state, the realized
/// estimate change (next step's momentum), and the trace row.
struct StepOutcome {
  BarycenterState state;
  Vec delta;
  StepRecord record;
};

/// Proposes, queries the oracle once, and applies the recursive update. The
/// realized estimate change is collinear with z with scalar gain in [0, 1]
/// (exactly 1 on the first step, and 0 only when the new weight underflows
/// against the accumulated mass).
StepOutcome step(const BarycenterState& state, const Vec& prev_delta,
                 const SearchConfig& config, std::size_t step_index,
                 const Objective& oracle, GaussianStream& rng);

/// Runs `budget` sequential steps from the initial guess. Deterministic
/// given (config, oracle, seed): proposals consume stream 0 of the seed.
/// An oracle exception aborts the run and returns the partial trace with
/// valid = false.
RunTrace run(const SearchConfig& config, const Objective& oracle);

}  // namespace baryopt
