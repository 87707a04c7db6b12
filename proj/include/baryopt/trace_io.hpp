#pragma once

#include <stdexcept>
#include <string>

#include "baryopt/search.hpp"

namespace baryopt {

/// Thrown when a trace, report, or spec file cannot be read or written.
class TraceIOError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

/// Renders a run trace as CSV: '#'-prefixed metadata lines (the fully
/// resolved configuration, the RNG identity, and the run outcome), then a
/// header row, then one row per oracle query with columns
///   n, x components, f_value, estimate components, sigma_n, z components,
///   best_f.
/// All numbers use shortest round-trip formatting, so equal traces render to
/// identical bytes.
std::string trace_to_csv(const RunTrace& trace, const SearchConfig& config,
                         const std::string& objective_name);

/// Two-column "evaluations best_f" export, gnuplot-ready.
std::string trace_to_best_f(const RunTrace& trace);

/// Writes `contents` to `path`, throwing TraceIOError on any failure.
void write_file(const std::string& path, const std::string& contents);

}  // namespace baryopt
