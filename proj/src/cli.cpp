#include "baryopt/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "baryopt/trace_io.hpp"
#include "baryopt/verify.hpp"

namespace baryopt {
namespace {

std::string trace_path(const RunSpec& spec, std::uint64_t run_seed) {
  return spec.output_dir + "/" + spec.objective + "_seed" +
         std::to_string(run_seed) + ".csv";
}

void write_trace_files(const RunSpec& spec, std::uint64_t run_seed,
                       const RunTrace& trace, const SearchConfig& config,
                       const std::string& objective_name) {
  write_file(trace_path(spec, run_seed),
             trace_to_csv(trace, config, objective_name));
  if (spec.emit_best_f)
    write_file(spec.output_dir + "/" + spec.objective + "_seed" +
                   std::to_string(run_seed) + "_best_f.dat",
               trace_to_best_f(trace));
}

/// Exception-to-exit-code mapping shared by the cmd_* entry points.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const TraceIOError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIO;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace

RunSpec load_run_spec(const std::string& path, RunSpec base) {
  std::ifstream in(path);
  if (!in) throw TraceIOError("cannot read spec file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("spec file " + path + ": " + e.what());
  }
  if (!j.is_object())
    throw std::invalid_argument("spec file " + path +
                                ": expected a flat JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "objective")
        base.objective = value.get<std::string>();
      else if (key == "canoe_verbatim_sign")
        base.canoe_verbatim_sign = value.get<bool>();
      else if (key == "nu")
        base.nu = value.get<double>();
      else if (key == "nu_imag")
        base.nu_imag = value.get<double>();
      else if (key == "xi")
        base.xi = value.get<double>();
      else if (key == "schedule")
        base.schedule = value.get<std::string>();
      else if (key == "budget")
        base.budget = value.get<std::size_t>();
      else if (key == "seed")
        base.seed = value.get<std::uint64_t>();
      else if (key == "initial_guess")
        base.initial_guess = value.get<Vec>();
      else if (key == "diag")
        base.diag = value.get<Vec>();
      else if (key == "sigma_w")
        base.sigma_w = value.get<double>();
      else if (key == "noise_seed")
        base.noise_seed = value.get<std::uint64_t>();
      else if (key == "repeat")
        base.repeat = value.get<std::size_t>();
      else if (key == "output_dir")
        base.output_dir = value.get<std::string>();
      else if (key == "emit_best_f")
        base.emit_best_f = value.get<bool>();
      else
        throw std::invalid_argument("unknown spec key \"" + key + "\"");
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("spec key \"" + key + "\": " + e.what());
    }
  }
  return base;
}

Vec default_initial_guess(const std::string& objective) {
  if (objective == "rosenbrock") return {-1.5, 1.5};
  if (objective == "perturbed_quadratic") return {2.0, 2.0};
  if (objective == "canoe") return {40.0, 30.0};
  if (objective == "quadratic") return {1.0, 1.0};
  throw std::invalid_argument("no default start for objective \"" + objective +
                              "\"");
}

Objective resolve_objective(const RunSpec& spec, std::uint64_t run_seed) {
  Objective base = (spec.objective == "canoe" && spec.canoe_verbatim_sign)
                       ? make_canoe(/*verbatim_sign=*/true)
                       : make_objective(spec.objective);
  if (spec.sigma_w > 0.0)
    base = with_noise(std::move(base),
                      {spec.sigma_w, derive_seed(run_seed, spec.noise_seed)});
  return base;
}

SearchConfig resolve_config(const RunSpec& spec, std::uint64_t run_seed) {
  const Vec guess = spec.initial_guess.empty()
                        ? default_initial_guess(spec.objective)
                        : spec.initial_guess;
  const CovarianceMode covariance =
      spec.diag.empty() ? CovarianceMode::isotropic()
                        : CovarianceMode::diagonal(spec.diag);
  return SearchConfig(WeightExponent(spec.nu, spec.nu_imag), spec.xi,
                      VarianceSchedule::parse(spec.schedule), spec.budget,
                      run_seed, guess, covariance);
}

std::vector<SeedOutcome> bench(const RunSpec& spec, std::size_t seeds) {
  if (seeds < 1) throw std::invalid_argument("bench: seeds must be >= 1");
  // Noiseless scorer for the final estimates (shared across workers: pure).
  const Objective scorer =
      (spec.objective == "canoe" && spec.canoe_verbatim_sign)
          ? make_canoe(/*verbatim_sign=*/true)
          : make_objective(spec.objective);
  (void)resolve_config(spec, 1);  // validate the spec once, before fan-out

  std::vector<SeedOutcome> outcomes(seeds);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const std::size_t workers = std::min<std::size_t>(
      seeds, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= seeds) return;
        const std::uint64_t run_seed = i + 1;
        try {
          const SearchConfig config = resolve_config(spec, run_seed);
          const Objective oracle = resolve_objective(spec, run_seed);
          const RunTrace trace = run(config, oracle);
          if (!spec.output_dir.empty())
            write_trace_files(spec, run_seed, trace, config, oracle.name);
          SeedOutcome& o = outcomes[i];
          o.seed = run_seed;
          o.best_f = trace.best_f;
          o.final_estimate = trace.final_estimate;
          o.f_at_estimate = scorer(trace.final_estimate);
          o.valid = trace.valid;
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty())
    throw std::invalid_argument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (spec.repeat < 1)
      throw std::invalid_argument("run: repeat must be >= 1");
    bool any_invalid = false;
    for (std::size_t r = 0; r < spec.repeat; ++r) {
      const std::uint64_t run_seed = spec.seed + r;
      const SearchConfig config = resolve_config(spec, run_seed);
      const Objective oracle = resolve_objective(spec, run_seed);
      const RunTrace trace = run(config, oracle);
      if (!spec.output_dir.empty()) {
        write_trace_files(spec, run_seed, trace, config, oracle.name);
        out << "seed " << run_seed << ": best_f "
            << format_double(trace.best_f) << " -> "
            << trace_path(spec, run_seed) << "\n";
      } else {
        out << "seed " << run_seed << ": best_f "
            << format_double(trace.best_f) << "\n";
      }
      if (!trace.valid) {
        err << "seed " << run_seed << " aborted after "
            << trace.records.size() << " evaluations: "
            << trace.error_message << "\n";
        any_invalid = true;
      }
    }
    return any_invalid ? kExitUsage : kExitSuccess;
  });
}

int cmd_verify(const std::string& selector, std::size_t trials,
               std::uint64_t seed, const std::string& report_path,
               std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (trials < 2)
      throw std::invalid_argument("verify: trials must be >= 2");
    const bool all = selector == "all";
    if (!all && selector != "thm1" && selector != "thm2" &&
        selector != "thm3" && selector != "thm4") {
      err << "unknown suite \"" << selector
          << "\" (expected thm1 | thm2 | thm3 | thm4 | all)\n";
      return kExitUsage;
    }
    // `trials` rescales every suite from its calibrated baseline of 1e5.
    const double factor = static_cast<double>(trials) / 100000.0;
    const auto scaled = [&](double base) {
      return static_cast<std::size_t>(std::max(2.0, std::round(base * factor)));
    };

    std::vector<MCReport> reports;
    const auto append = [&](std::vector<MCReport> more) {
      for (auto& r : more) reports.push_back(std::move(r));
    };
    if (all || selector == "thm1")
      append(check_theorem1(default_mean_step_grid(), trials,
                            derive_seed(seed, 1)));
    if (all || selector == "thm2") {
      VarianceCheckConfig cfg;
      cfg.trials_main = scaled(1e6);
      cfg.trials_ladder = scaled(4e6);
      cfg.seed = derive_seed(seed, 2);
      append(check_theorem2(cfg));
    }
    if (all || selector == "thm3") append(check_theorem3(InterferenceConfig{}));
    if (all || selector == "thm4") {
      const NoiseScalingResult r = check_theorem4_scaling(
          default_noise_fixture(), 1.0, 0.05, scaled(1e6), derive_seed(seed, 4));
      append({r.base.mean_report, r.base.cov_report, r.halved.mean_report,
              r.halved.cov_report, r.scaling_report});
    }

    const std::string text = to_line_records(reports);
    if (!report_path.empty())
      write_file(report_path, text);
    else
      out << text;

    std::size_t failed = 0;
    for (const auto& r : reports)
      if (!r.pass) {
        ++failed;
        err << "FAIL " << r.quantity << " (threshold " << r.threshold;
        for (double z : r.zscore) err << ", z " << z;
        err << ")\n";
      }
    out << "# " << reports.size() << " checks, " << failed << " failed";
    if (factor < 1.0)
      out << " (trials below baseline: standard errors are widened)";
    out << "\n";
    return failed == 0 ? kExitSuccess : kExitVerifyFailed;
  });
}

int cmd_bench(const RunSpec& spec, std::size_t seeds, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const std::vector<SeedOutcome> outcomes = bench(spec, seeds);
    std::vector<double> best, fin;
    std::size_t invalid = 0;
    for (const auto& o : outcomes) {
      if (!o.valid) {
        ++invalid;
        continue;
      }
      best.push_back(o.best_f);
      fin.push_back(o.f_at_estimate);
    }
    if (best.empty()) {
      err << "bench: every run aborted\n";
      return kExitUsage;
    }
    out << "# bench objective=" << spec.objective << " seeds=" << seeds
        << " budget=" << spec.budget << " nu=" << format_double(spec.nu)
        << " xi=" << format_double(spec.xi) << " schedule=" << spec.schedule
        << " sigma_w=" << format_double(spec.sigma_w) << "\n";
    const auto line = [&](const char* label, std::vector<double>& v) {
      out << label << ": median=" << format_double(quantile(v, 0.5))
          << " q1=" << format_double(quantile(v, 0.25))
          << " q3=" << format_double(quantile(v, 0.75)) << "\n";
    };
    line("best_f", best);
    line("f_at_final_estimate", fin);
    if (invalid) out << "invalid_runs: " << invalid << "\n";
    return kExitSuccess;
  });
}

}  // namespace baryopt
