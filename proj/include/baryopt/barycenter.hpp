#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "baryopt/linalg.hpp"

namespace baryopt {

/// Thrown when a complex-weight aggregate cancels to (numerically) nothing,
/// leaving no meaningful estimate to report.
class DegenerateInterferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The weighting exponent nu. The real part sets the sharpness of the
/// exponential weights e^{-nu f} and must be positive; a nonzero imaginary
/// part switches on the complex (interference) variant.
class WeightExponent {
 public:
  explicit WeightExponent(double real_part, double imag_part = 0.0);

  double real() const { return nu_.real(); }
  double imag() const { return nu_.imag(); }
  std::complex<double> value() const { return nu_; }
  bool is_real() const { return nu_.imag() == 0.0; }

 private:
  std::complex<double> nu_;
};

/// One oracle query: where it was asked and what the oracle answered.
class TestPoint {
 public:
  TestPoint(Vec x, double f_value);

  const Vec& x() const { return x_; }
  double f_value() const { return f_; }
  std::size_t dimension() const { return x_.size(); }

 private:
  Vec x_;
  double f_;
};

/// Running state of the recursive barycenter: absorbed-point count, the
/// accumulated mass in a shifted-log representation, and the current
/// estimate. Mass is stored as log_mass = log(sum_i e^{-(nu f_i - shift)})
/// with shift = nu * (minimum f seen); whenever a new minimum arrives the
/// stored value is rescaled. Because the barycenter is invariant to uniform
/// weight rescaling, the shift is exact in infinite precision and keeps
/// every intermediate quantity representable for arbitrarily large nu*f.
class BarycenterState {
 public:
  explicit BarycenterState(Vec initial_guess);

  std::size_t count() const { return n_; }
  const Vec& estimate() const { return estimate_; }
  std::size_t dimension() const { return estimate_.size(); }

  /// Shifted log mass (log of the mass measured in units of e^{-shift}).
  double log_mass() const { return log_mass_; }
  /// Current exponent shift, nu * min f absorbed so far (+inf when empty).
  double shift() const { return shift_; }
  /// log of the true mass m_n = sum e^{-nu f_i}; -inf when empty, and may
  /// be far outside double range as a plain exponential.
  double true_log_mass() const { return log_mass_ - shift_; }

  /// Absorbs one point (the recursive mass/estimate update) and returns the
  /// realized gain F_n = e^{-nu f}/(m_{n-1} + e^{-nu f}) in (0, 1]. The gain
  /// can round to exactly 0 when the new weight underflows relative to the
  /// accumulated mass (nu*(f - f_min) beyond ~745); the estimate is then
  /// unchanged, which is the correct limit.
  double update(const TestPoint& point, const WeightExponent& nu);

  /// Mass-weighted combination of two partial aggregations over disjoint
  /// point sets; associative up to floating-point error, enabling parallel
  /// reduction. Empty states are identities (the left estimate wins when
  /// both are empty).
  static BarycenterState merged(const BarycenterState& a,
                                const BarycenterState& b);

 private:
  std::size_t n_ = 0;
  double log_mass_ = -std::numeric_limits<double>::infinity();
  double shift_ = std::numeric_limits<double>::infinity();
  Vec estimate_;
};

/// Convenience accessor mirroring BarycenterState::estimate().
inline const Vec& estimate(const BarycenterState& s) { return s.estimate(); }

/// Direct evaluation of the batch barycenter
///   sum_i x_i e^{-nu f_i} / sum_i e^{-nu f_i}
/// with shifted exponents (single pass to find the minimum f, second pass to
/// accumulate). Requires a real exponent and at least one point.
Vec batch_barycenter(const std::vector<TestPoint>& points,
                     const WeightExponent& nu);

/// Normalized weights w_i = e^{-nu(f_i - f_min)} / sum, i.e. the convex
/// combination coefficients realized by batch_barycenter.
std::vector<double> barycentric_weights(const std::vector<TestPoint>& points,
                                        const WeightExponent& nu);

/// Complex-weight accumulator: per-component running sums of the complex
/// barycenter numerator and the shared denominator, with the real part of
/// the exponent shifted exactly like the real method (the imaginary part
/// only rotates phases and needs no stabilization).
///
/// The method requires nonnegative coordinates. For general domains the
/// accumulator takes a fixed translation chosen at construction; points are
/// translated into the nonnegative orthant on entry and the estimate is
/// translated back on exit. The translation must be fixed per run because
/// the final modulus is not translation-equivariant.
class ComplexAccumulator {
 public:
  /// `translation` is added to every incoming point (empty = no shift).
  explicit ComplexAccumulator(std::size_t dimension, Vec translation = {});

  std::size_t count() const { return n_; }
  std::size_t dimension() const { return numerator_.size(); }
  const Vec& translation() const { return translation_; }

  /// Accumulates x e^{-nu f} into the numerator and e^{-nu f} into the
  /// denominator. Throws std::domain_error if a translated coordinate is
  /// negative.
  void accumulate(const TestPoint& point, const WeightExponent& nu);

  /// |denominator| on the true (unshifted) log scale:
  /// log |sum_i e^{-nu f_i}|. Used to compare aggregate weight magnitudes
  /// across clusters with different shifts.
  double log_denominator_magnitude() const;

  /// The estimate x\hat^a = |eta^a| per component, translated back to the
  /// original coordinates. Throws DegenerateInterferenceError when the
  /// denominator magnitude has cancelled below 1e-300 (in shifted units).
  Vec estimate() const;

  /// Componentwise sum of two accumulators sharing dimension/translation,
  /// with exponent shifts aligned; associative up to rounding.
  static ComplexAccumulator merged(const ComplexAccumulator& a,
                                   const ComplexAccumulator& b);

 private:
  std::vector<std::complex<double>> numerator_;
  std::complex<double> denominator_{0.0, 0.0};
  double shift_ = std::numeric_limits<double>::infinity();
  Vec translation_;
  std::size_t n_ = 0;
};

}  // namespace baryopt
