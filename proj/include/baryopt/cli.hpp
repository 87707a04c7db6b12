#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "baryopt/objectives.hpp"
#include "baryopt/search.hpp"

namespace baryopt {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIO = 3;

/// One benchmark invocation: objective, search parameters, optional oracle
/// noise, repetition, output destination. Defaults mirror the banana
/// benchmark configuration.
struct RunSpec {
  std::string objective = "rosenbrock";
  /// Evaluate the canoe variant with the positive exponent as printed in
  /// some sources; unbounded below, kept for inspection only.
  bool canoe_verbatim_sign = false;
  double nu = 4.0;
  double nu_imag = 0.0;  // must stay 0: the search driver is the real method
  double xi = 0.6;
  std::string schedule = "linear:2:0.4:80";
  std::size_t budget = 80;
  std::uint64_t seed = 1;
  Vec initial_guess;  // empty = the objective's declared benchmark start
  Vec diag;           // per-component variance multipliers; empty = isotropic
  double sigma_w = 0.0;
  std::uint64_t noise_seed = 0;  // salt for the per-run noise streams
  std::size_t repeat = 1;
  std::string output_dir = ".";  // empty = no trace files
  bool emit_best_f = false;      // also write the two-column best-f export
};

/// Loads a flat JSON object of RunSpec fields over `base` (file fields
/// override base; command-line flags are applied on top by the caller).
/// Unknown keys or ill-typed values raise std::invalid_argument; an
/// unreadable file raises TraceIOError.
RunSpec load_run_spec(const std::string& path, RunSpec base);

/// The declared benchmark start for each named objective.
Vec default_initial_guess(const std::string& objective);

/// Builds the oracle one seeded run of the spec queries (noise wrapper
/// applied with a stream derived from the run seed).
Objective resolve_objective(const RunSpec& spec, std::uint64_t run_seed);

/// Builds the search configuration for one seeded run of the spec.
SearchConfig resolve_config(const RunSpec& spec, std::uint64_t run_seed);

/// Outcome of one seeded run, as aggregated by bench().
struct SeedOutcome {
  std::uint64_t seed = 0;
  double best_f = 0.0;
  Vec final_estimate;
  /// Noiseless objective value at the final estimate.
  double f_at_estimate = 0.0;
  bool valid = true;
};

/// Runs the spec once per seed 1..seeds, fanning out across threads; the
/// returned outcomes are ordered by seed regardless of scheduling. Traces
/// are written only when the spec names an output directory.
std::vector<SeedOutcome> bench(const RunSpec& spec, std::size_t seeds);

/// Type-7 (linear interpolation) sample quantile; q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Executes `repeat` seeded runs (seed, seed+1, ...), writes one trace CSV
/// per run, and prints a one-line summary per run. Exit codes: 0 success,
/// 2 usage/configuration error, 3 I/O error.
int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Runs the selected verification suite ("thm1" | "thm2" | "thm3" | "thm4"
/// | "all"). `trials` rescales every suite proportionally from its
/// calibrated default (100000 = the calibrated baseline). The line-record
/// report goes to `report_path` when nonempty, else to `out`. Exit codes:
/// 0 all checks pass, 1 any check failed, 2 usage error, 3 I/O error.
int cmd_verify(const std::string& selector, std::size_t trials,
               std::uint64_t seed, const std::string& report_path,
               std::ostream& out, std::ostream& err);

/// Benchmarks the spec across seeds 1..seeds and prints median/quartiles of
/// best f and of the noiseless f at the final estimate.
int cmd_bench(const RunSpec& spec, std::size_t seeds, std::ostream& out,
              std::ostream& err);

}  // namespace baryopt
