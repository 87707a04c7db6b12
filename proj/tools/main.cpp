#include <cerrno>
#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "baryopt/cli.hpp"
#include "baryopt/trace_io.hpp"

namespace {

using baryopt::RunSpec;

/// BARYOPT_SEED supplies the default run seed; it must be a plain decimal
/// integer when present.
std::uint64_t env_default_seed() {
  const char* raw = std::getenv("BARYOPT_SEED");
  if (raw == nullptr || *raw == '\0') return 1;
  errno = 0;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(raw, &end, 10);
  if (raw[0] == '-' || errno != 0 || end == raw || *end != '\0')
    throw std::invalid_argument(
        std::string("BARYOPT_SEED must be a decimal integer, got \"") + raw +
        "\"");
  return value;
}

/// Flag storage plus the option handles needed to tell "explicitly set"
/// apart from "left at default" when merging over a spec file.
struct RunOptions {
  RunSpec flags;
  std::string spec_path;
  CLI::Option* objective = nullptr;
  CLI::Option* verbatim = nullptr;
  CLI::Option* nu = nullptr;
  CLI::Option* nu_imag = nullptr;
  CLI::Option* xi = nullptr;
  CLI::Option* schedule = nullptr;
  CLI::Option* budget = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* start = nullptr;
  CLI::Option* diag = nullptr;
  CLI::Option* sigma_w = nullptr;
  CLI::Option* noise_seed = nullptr;
  CLI::Option* repeat = nullptr;
  CLI::Option* output_dir = nullptr;
  CLI::Option* no_trace = nullptr;
  CLI::Option* best_f = nullptr;
};

void attach_run_options(CLI::App& cmd, RunOptions& o) {
  cmd.add_option("--spec", o.spec_path,
                 "JSON file of run settings; flags given here override it");
  o.objective = cmd.add_option(
      "-o,--objective", o.flags.objective,
      "rosenbrock | perturbed_quadratic | canoe | quadratic");
  o.verbatim = cmd.add_flag(
      "--verbatim-canoe-sign", o.flags.canoe_verbatim_sign,
      "canoe with the positive exponent (unbounded; for inspection)");
  o.nu = cmd.add_option("--nu", o.flags.nu, "weight exponent, real part");
  o.nu_imag =
      cmd.add_option("--nu-imag", o.flags.nu_imag,
                     "weight exponent, imaginary part (searches require 0)");
  o.xi = cmd.add_option("--xi", o.flags.xi, "momentum factor in [0,1)");
  o.schedule = cmd.add_option(
      "--schedule", o.flags.schedule,
      "curiosity scale: constant:S | linear:A:B:STEPS | geometric:A:R");
  o.budget =
      cmd.add_option("-n,--budget", o.flags.budget, "objective evaluations");
  o.seed = cmd.add_option("-s,--seed", o.flags.seed,
                          "run seed (default: BARYOPT_SEED or 1)");
  o.start = cmd.add_option("--start", o.flags.initial_guess,
                           "initial guess, comma separated")
                ->delimiter(',');
  o.diag = cmd.add_option("--diag", o.flags.diag,
                          "per-component variance multipliers, comma separated")
               ->delimiter(',');
  o.sigma_w = cmd.add_option("--sigma-w", o.flags.sigma_w,
                             "additive Gaussian oracle noise level");
  o.noise_seed = cmd.add_option("--noise-seed", o.flags.noise_seed,
                                "salt for the per-run noise streams");
  o.repeat = cmd.add_option("--repeat", o.flags.repeat,
                            "consecutive seeds to run (run command only)");
  o.output_dir =
      cmd.add_option("--output-dir", o.flags.output_dir, "trace directory");
  o.no_trace = cmd.add_flag("--no-trace", "skip writing trace files");
  o.best_f = cmd.add_flag("--best-f", o.flags.emit_best_f,
                          "also write the two-column best-f file per run");
}

/// defaults -> spec file -> explicitly set flags, in that order.
RunSpec resolve_options(const RunOptions& o, std::uint64_t env_seed,
                        const std::string& default_output_dir) {
  RunSpec base;
  base.seed = env_seed;
  base.output_dir = default_output_dir;
  if (!o.spec_path.empty()) base = baryopt::load_run_spec(o.spec_path, base);
  if (o.objective->count()) base.objective = o.flags.objective;
  if (o.verbatim->count()) base.canoe_verbatim_sign = o.flags.canoe_verbatim_sign;
  if (o.nu->count()) base.nu = o.flags.nu;
  if (o.nu_imag->count()) base.nu_imag = o.flags.nu_imag;
  if (o.xi->count()) base.xi = o.flags.xi;
  if (o.schedule->count()) base.schedule = o.flags.schedule;
  if (o.budget->count()) base.budget = o.flags.budget;
  if (o.seed->count()) base.seed = o.flags.seed;
  if (o.start->count()) base.initial_guess = o.flags.initial_guess;
  if (o.diag->count()) base.diag = o.flags.diag;
  if (o.sigma_w->count()) base.sigma_w = o.flags.sigma_w;
  if (o.noise_seed->count()) base.noise_seed = o.flags.noise_seed;
  if (o.repeat->count()) base.repeat = o.flags.repeat;
  if (o.output_dir->count()) base.output_dir = o.flags.output_dir;
  if (o.no_trace->count()) base.output_dir.clear();
  if (o.best_f->count()) base.emit_best_f = o.flags.emit_best_f;
  return base;
}

int dispatch(int argc, char** argv) {
  const std::uint64_t env_seed = env_default_seed();

  CLI::App app{
      "barycenter search: derivative-free optimization by exponentially "
      "weighted averaging of probed points"};
  app.require_subcommand(1);

  auto* run_cmd =
      app.add_subcommand("run", "execute seeded searches and write trace CSVs");
  RunOptions run_opts;
  attach_run_options(*run_cmd, run_opts);

  auto* bench_cmd = app.add_subcommand(
      "bench", "summarize best-f quartiles across seeds 1..N");
  RunOptions bench_opts;
  attach_run_options(*bench_cmd, bench_opts);
  std::size_t seeds = 100;
  bench_cmd->add_option("--seeds", seeds, "number of seeded runs")
      ->capture_default_str();

  auto* verify_cmd = app.add_subcommand(
      "verify", "Monte Carlo checks of the predicted step moments");
  std::string suite = "all";
  std::size_t trials = 100000;
  std::uint64_t verify_seed = env_seed;
  std::string report_path;
  verify_cmd->add_option("suite", suite, "thm1 | thm2 | thm3 | thm4 | all")
      ->capture_default_str();
  verify_cmd
      ->add_option("--trials", trials,
                   "Monte Carlo trials; suites scale from this baseline")
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify_seed,
                         "master seed for the verification streams");
  verify_cmd->add_option("--report", report_path,
                         "write the line records to this file, not stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? baryopt::kExitSuccess : baryopt::kExitUsage;
  }

  if (run_cmd->parsed())
    return baryopt::cmd_run(resolve_options(run_opts, env_seed, "."),
                            std::cout, std::cerr);
  if (bench_cmd->parsed())
    return baryopt::cmd_bench(resolve_options(bench_opts, env_seed, ""), seeds,
                              std::cout, std::cerr);
  return baryopt::cmd_verify(suite, trials, verify_seed, report_path,
                             std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const baryopt::TraceIOError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return baryopt::kExitIO;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return baryopt::kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return baryopt::kExitUsage;
  }
}
