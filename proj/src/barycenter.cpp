#include "baryopt/barycenter.hpp"

#include <algorithm>
#include <cmath>

namespace baryopt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// log(e^a + e^b), safe for -inf operands.
double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

WeightExponent::WeightExponent(double real_part, double imag_part)
    : nu_(real_part, imag_part) {
  if (!std::isfinite(real_part) || !std::isfinite(imag_part))
    throw std::domain_error("WeightExponent: non-finite exponent");
  if (real_part <= 0.0)
    throw std::domain_error("WeightExponent: real part must be positive");
}

TestPoint::TestPoint(Vec x, double f_value) : x_(std::move(x)), f_(f_value) {
  if (x_.empty()) throw std::domain_error("TestPoint: empty coordinate vector");
  require_finite(x_, "TestPoint");
  if (!std::isfinite(f_))
    throw std::domain_error("TestPoint: non-finite f_value");
}

BarycenterState::BarycenterState(Vec initial_guess)
    : estimate_(std::move(initial_guess)) {
  if (estimate_.empty())
    throw std::domain_error("BarycenterState: empty initial guess");
  require_finite(estimate_, "BarycenterState initial guess");
}

double BarycenterState::update(const TestPoint& point,
                               const WeightExponent& nu) {
  if (!nu.is_real())
    throw std::domain_error(
        "BarycenterState::update: real exponent required (use "
        "ComplexAccumulator for complex nu)");
  require_dimension(point.x(), estimate_.size(), "BarycenterState::update");

  const double e = nu.real() * point.f_value();
  if (e < shift_) {
    // A new minimum: re-express the stored mass in the new shift's units.
    if (std::isfinite(log_mass_)) log_mass_ += e - shift_;
    shift_ = e;
  }
  const double log_w = -(e - shift_);  // <= 0 by construction

  double gain;
  if (log_mass_ == -kInf) {
    gain = 1.0;  // first point: m_0 = 0
  } else {
    // F = w / (m + w) = 1 / (1 + e^{log m - log w}).
    const double t = log_mass_ - log_w;
    gain = t > 0.0 ? std::exp(-t) / (1.0 + std::exp(-t))
                   : 1.0 / (1.0 + std::exp(t));
  }

  for (std::size_t k = 0; k < estimate_.size(); ++k)
    estimate_[k] += gain * (point.x()[k] - estimate_[k]);
  log_mass_ = log_add_exp(log_mass_, log_w);
  ++n_;
  return gain;
}

BarycenterState BarycenterState::merged(const BarycenterState& a,
                                        const BarycenterState& b) {
  if (a.dimension() != b.dimension())
    throw std::domain_error("BarycenterState::merged: dimension mismatch");
  if (a.n_ == 0) return b.n_ == 0 ? a : b;
  if (b.n_ == 0) return a;

  BarycenterState out(a.estimate_);
  out.n_ = a.n_ + b.n_;
  out.shift_ = std::min(a.shift_, b.shift_);
  const double la = a.log_mass_ - a.shift_ + out.shift_;
  const double lb = b.log_mass_ - b.shift_ + out.shift_;
  out.log_mass_ = log_add_exp(la, lb);
  // lambda = m_a / (m_a + m_b), computed from the shift-aligned logs.
  const double t = lb - la;
  const double lam = t > 0.0 ? std::exp(-t) / (1.0 + std::exp(-t))
                             : 1.0 / (1.0 + std::exp(t));
  for (std::size_t k = 0; k < out.estimate_.size(); ++k)
    out.estimate_[k] = lam * a.estimate_[k] + (1.0 - lam) * b.estimate_[k];
  return out;
}

std::vector<double> barycentric_weights(const std::vector<TestPoint>& points,
                                        const WeightExponent& nu) {
  if (!nu.is_real())
    throw std::domain_error("barycentric_weights: real exponent required");
  if (points.empty())
    throw std::domain_error("barycentric_weights: empty point list");
  const std::size_t dim = points.front().dimension();
  double min_e = kInf;
  for (const auto& p : points) {
    require_dimension(p.x(), dim, "barycentric_weights");
    min_e = std::min(min_e, nu.real() * p.f_value());
  }
  std::vector<double> w(points.size());
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    w[i] = std::exp(-(nu.real() * points[i].f_value() - min_e));
    total += w[i];
  }
  for (double& wi : w) wi /= total;
  return w;
}

Vec batch_barycenter(const std::vector<TestPoint>& points,
                     const WeightExponent& nu) {
  const std::vector<double> w = barycentric_weights(points, nu);
  Vec out(points.front().dimension(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] += w[i] * points[i].x()[k];
  return out;
}

ComplexAccumulator::ComplexAccumulator(std::size_t dimension, Vec translation)
    : numerator_(dimension, {0.0, 0.0}), translation_(std::move(translation)) {
  if (dimension == 0)
    throw std::domain_error("ComplexAccumulator: zero dimension");
  if (translation_.empty()) translation_.assign(dimension, 0.0);
  require_dimension(translation_, dimension, "ComplexAccumulator translation");
  require_finite(translation_, "ComplexAccumulator translation");
}

void ComplexAccumulator::accumulate(const TestPoint& point,
                                    const WeightExponent& nu) {
  require_dimension(point.x(), numerator_.size(),
                    "ComplexAccumulator::accumulate");
  Vec shifted = point.x() + translation_;
  for (double c : shifted)
    if (c < 0.0)
      throw std::domain_error(
          "ComplexAccumulator: negative coordinate (choose a translation "
          "that maps the domain into the nonnegative orthant)");

  const double er = nu.real() * point.f_value();
  if (er < shift_) {
    // Rescale stored sums into the new shift's units; the factor is <= 1 so
    // the rescale cannot overflow.
    if (n_ > 0) {
      const double scale = std::exp(er - shift_);
      for (auto& c : numerator_) c *= scale;
      denominator_ *= scale;
    }
    shift_ = er;
  }
  // e^{-nu f} in shifted units: magnitude e^{-(er - shift)}, phase -nu_i f.
  const std::complex<double> w =
      std::polar(std::exp(-(er - shift_)), -nu.imag() * point.f_value());
  for (std::size_t k = 0; k < numerator_.size(); ++k)
    numerator_[k] += shifted[k] * w;
  denominator_ += w;
  ++n_;
}

double ComplexAccumulator::log_denominator_magnitude() const {
  return std::log(std::abs(denominator_)) - shift_;
}

Vec ComplexAccumulator::estimate() const {
  if (std::abs(denominator_) < 1e-300)
    throw DegenerateInterferenceError(
        "ComplexAccumulator: denominator magnitude below 1e-300 "
        "(destructive interference or empty accumulator)");
  Vec out(numerator_.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = std::abs(numerator_[k] / denominator_) - translation_[k];
  return out;
}

ComplexAccumulator ComplexAccumulator::merged(const ComplexAccumulator& a,
                                              const ComplexAccumulator& b) {
  if (a.dimension() != b.dimension())
    throw std::domain_error("ComplexAccumulator::merged: dimension mismatch");
  if (a.translation_ != b.translation_)
    throw std::domain_error(
        "ComplexAccumulator::merged: translations must match");
  if (a.n_ == 0) return b.n_ == 0 ? a : b;
  if (b.n_ == 0) return a;

  ComplexAccumulator out(a.dimension(), a.translation_);
  out.n_ = a.n_ + b.n_;
  out.shift_ = std::min(a.shift_, b.shift_);
  const double sa = std::exp(out.shift_ - a.shift_);  // <= 1
  const double sb = std::exp(out.shift_ - b.shift_);  // <= 1
  for (std::size_t k = 0; k < out.numerator_.size(); ++k)
    out.numerator_[k] = a.numerator_[k] * sa + b.numerator_[k] * sb;
  out.denominator_ = a.denominator_ * sa + b.denominator_ * sb;
  return out;
}

}  // namespace baryopt
