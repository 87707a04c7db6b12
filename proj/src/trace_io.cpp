#include "baryopt/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <string>

namespace baryopt {
namespace {

void append_vec(std::string& out, const Vec& v) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ' ';
    out += format_double(v[k]);
  }
}

void append_columns(std::string& out, const char* prefix, std::size_t dim) {
  for (std::size_t k = 0; k < dim; ++k) {
    out += ',';
    out += prefix;
    out += std::to_string(k);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string trace_to_csv(const RunTrace& trace, const SearchConfig& config,
                         const std::string& objective_name) {
  const std::size_t dim = config.initial_guess.size();
  std::string out;
  out.reserve(128 * (trace.records.size() + 16));

  out += "# barycenter-search trace\n";
  out += "# objective: " + objective_name + "\n";
  out += "# nu: " + format_double(config.nu.real()) + "\n";
  out += "# nu_imag: " + format_double(config.nu.imag()) + "\n";
  out += "# xi: " + format_double(config.xi) + "\n";
  out += "# schedule: " + config.schedule.describe() + "\n";
  out += "# covariance: " + config.covariance.describe() + "\n";
  out += "# budget: " + std::to_string(config.budget) + "\n";
  out += "# seed: " + std::to_string(config.seed) + "\n";
  out += "# initial_guess: ";
  append_vec(out, config.initial_guess);
  out += "\n# rng: xoshiro256++ / splitmix64 streams / box-muller\n";
  out += std::string("# valid: ") + (trace.valid ? "true" : "false") + "\n";
  if (!trace.valid) out += "# error: " + trace.error_message + "\n";
  if (!trace.records.empty()) {
    out += "# best_f: " + format_double(trace.best_f) + "\n";
    out += "# best_x: ";
    append_vec(out, trace.best_x);
    out += "\n";
  }
  out += "# final_estimate: ";
  append_vec(out, trace.final_estimate);
  out += "\n";

  out += "n";
  append_columns(out, "x", dim);
  out += ",f_value";
  append_columns(out, "est", dim);
  out += ",sigma_n";
  append_columns(out, "z", dim);
  out += ",best_f\n";

  for (const StepRecord& r : trace.records) {
    out += std::to_string(r.n);
    for (double v : r.x) out += ',' + format_double(v);
    out += ',' + format_double(r.f_value);
    for (double v : r.estimate) out += ',' + format_double(v);
    out += ',' + format_double(r.sigma_n);
    for (double v : r.z) out += ',' + format_double(v);
    out += ',' + format_double(r.best_f) + '\n';
  }
  return out;
}

std::string trace_to_best_f(const RunTrace& trace) {
  std::string out = "# evaluations best_f\n";
  for (const StepRecord& r : trace.records)
    out += std::to_string(r.n) + ' ' + format_double(r.best_f) + '\n';
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TraceIOError("cannot open " + path + " for writing");
  out.write(contents.data(),
            static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw TraceIOError("failed while writing " + path);
}

}  // namespace baryopt
