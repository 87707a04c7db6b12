#include "baryopt/schedule.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace baryopt {
namespace {

void require_positive_sigma(double s, const char* what) {
  if (!(s > 0.0) || !std::isfinite(s))
    throw std::domain_error(std::string(what) +
                            ": sigma must be positive and finite");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double parse_double(const std::string& s, const char* what) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + ": bad number \"" + s +
                                "\"");
  }
  if (pos != s.size())
    throw std::invalid_argument(std::string(what) + ": bad number \"" + s +
                                "\"");
  return v;
}

// Shortest representation that round-trips exactly, so describe() output can
// be parsed back into an identical schedule.
std::string format_number(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

VarianceSchedule::VarianceSchedule(Kind kind, double a, double b,
                                   std::size_t steps)
    : kind_(kind), a_(a), b_(b), steps_(steps) {}

VarianceSchedule VarianceSchedule::constant(double sigma0) {
  require_positive_sigma(sigma0, "VarianceSchedule::constant");
  return VarianceSchedule(Kind::kConstant, sigma0, 0.0, 0);
}

VarianceSchedule VarianceSchedule::linear(double sigma_start, double sigma_end,
                                          std::size_t steps) {
  require_positive_sigma(sigma_start, "VarianceSchedule::linear");
  require_positive_sigma(sigma_end, "VarianceSchedule::linear");
  // One step cannot hit sigma_start at index 0 and sigma_end at the last
  // index, so the shortest honest linear schedule has two steps.
  if (steps < 2)
    throw std::domain_error("VarianceSchedule::linear: steps must be >= 2");
  return VarianceSchedule(Kind::kLinear, sigma_start, sigma_end, steps);
}

VarianceSchedule VarianceSchedule::geometric(double sigma_start, double ratio) {
  require_positive_sigma(sigma_start, "VarianceSchedule::geometric");
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw std::domain_error(
        "VarianceSchedule::geometric: ratio must lie in (0, 1]");
  return VarianceSchedule(Kind::kGeometric, sigma_start, ratio, 0);
}

VarianceSchedule VarianceSchedule::parse(const std::string& text) {
  // Parse-level failures are usage errors regardless of whether the string
  // is structurally broken or carries out-of-range numbers.
  try {
    return parse_impl(text);
  } catch (const std::domain_error& e) {
    throw std::invalid_argument(e.what());
  }
}

VarianceSchedule VarianceSchedule::parse_impl(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.empty())
    throw std::invalid_argument("VarianceSchedule::parse: empty spec");
  const std::string& kind = parts.front();
  if (kind == "constant") {
    if (parts.size() != 2)
      throw std::invalid_argument(
          "VarianceSchedule::parse: expected constant:SIGMA");
    return constant(parse_double(parts[1], "constant sigma"));
  }
  if (kind == "linear") {
    if (parts.size() != 4)
      throw std::invalid_argument(
          "VarianceSchedule::parse: expected linear:START:END:STEPS");
    const double steps = parse_double(parts[3], "linear steps");
    if (steps < 1 || steps != std::floor(steps))
      throw std::invalid_argument(
          "VarianceSchedule::parse: steps must be a positive integer");
    return linear(parse_double(parts[1], "linear start"),
                  parse_double(parts[2], "linear end"),
                  static_cast<std::size_t>(steps));
  }
  if (kind == "geometric") {
    if (parts.size() != 3)
      throw std::invalid_argument(
          "VarianceSchedule::parse: expected geometric:START:RATIO");
    return geometric(parse_double(parts[1], "geometric start"),
                     parse_double(parts[2], "geometric ratio"));
  }
  throw std::invalid_argument("VarianceSchedule::parse: unknown kind \"" +
                              kind + "\"");
}

double VarianceSchedule::sigma(std::size_t n) const {
  switch (kind_) {
    case Kind::kConstant:
      return a_;
    case Kind::kLinear: {
      // Exact endpoints: the naive lerp need not reach b_ in floating point.
      if (n + 1 >= steps_) return b_;
      if (n == 0) return a_;
      const double t = static_cast<double>(n) / static_cast<double>(steps_ - 1);
      return a_ + (b_ - a_) * t;
    }
    case Kind::kGeometric:
      return a_ * std::pow(b_, static_cast<double>(n));
  }
  return a_;  // unreachable
}

std::string VarianceSchedule::describe() const {
  switch (kind_) {
    case Kind::kConstant:
      return "constant:" + format_number(a_);
    case Kind::kLinear:
      return "linear:" + format_number(a_) + ":" + format_number(b_) + ":" +
             std::to_string(steps_);
    case Kind::kGeometric:
      return "geometric:" + format_number(a_) + ":" + format_number(b_);
  }
  return {};
}

}  // namespace baryopt
