#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "baryopt/linalg.hpp"

namespace baryopt {

/// A black-box objective: a pure evaluation x -> f(x) plus metadata. The
/// gradient/hessian callbacks are optional and present only where the
/// function is analytically differentiable (the quadratic family); the
/// benchmark objectives expose evaluation only.
struct Objective {
  std::string name;
  std::size_t dimension = 0;
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> gradient;    // may be empty
  std::function<Matrix(const Vec&)> hessian;  // may be empty
  std::optional<Vec> known_minimizer;
  std::optional<double> known_minimum;
  /// True when evaluations consume a sequential noise stream; such
  /// objectives must be queried from a single thread, in query order.
  bool noisy = false;

  double operator()(const Vec& x) const { return eval(x); }
};

/// Additive Gaussian oracle noise: each query answers f(x) + w with
/// w ~ N(0, sigma_w^2) drawn from a seeded stream, one draw per query.
struct NoiseModel {
  double sigma_w = 0.0;
  std::uint64_t seed = 0;
};

/// Rosenbrock banana 100(x^2 - y)^2 + (1 - x)^2; minimum 0 at (1, 1).
Objective make_rosenbrock();

/// The perturbed quadratic
///   10x^2 (1 + (75/100) cos(70x)/12) + cos^2(100x)/24
///   + 2y^2 (1 + (75/100) cos(70y)/12) + cos^2(100y)/24 + 4xy,
/// implemented exactly as displayed. With this grouping the oscillation
/// factors stay within [1 - 1/16, 1 + 1/16], making the function globally
/// nonnegative; its minimum sits near (but not at) the origin and has no
/// closed form, so no minimizer metadata is declared.
Objective make_perturbed_quadratic();

/// The "canoe" function (1 - e^{-||x||^2}) max(||x - c||^2, ||x - d||^2)
/// with c = (30, 40), d = -c; minimum 0 at the origin, nondifferentiable on
/// the bisector ridge. `verbatim_sign` evaluates the variant with a positive
/// exponent, (1 - e^{+||x||^2}) max(...), which is unbounded below and kept
/// only for inspection.
Objective make_canoe(bool verbatim_sign = false);

/// Quadratic (1/2)(x - x0)^T H (x - x0) with symmetric H; analytic gradient
/// and Hessian attached.
Objective make_quadratic(Matrix H, Vec x0);

/// Lookup by name: "rosenbrock" | "perturbed_quadratic" | "canoe" |
/// "quadratic" (identity Hessian at the origin, any dimension via `dim`).
/// Throws std::invalid_argument for unknown names.
Objective make_objective(const std::string& name, std::size_t dim = 2);

/// Wraps an objective with additive Gaussian noise. sigma_w = 0 returns the
/// objective unchanged. The result holds a sequential draw stream and is
/// flagged noisy.
Objective with_noise(Objective obj, const NoiseModel& noise);

/// Failure of one evaluation inside batch_evaluate, carrying the index of
/// the offending point.
class BatchEvaluationError : public std::runtime_error {
 public:
  BatchEvaluationError(std::size_t index, const std::string& message)
      : std::runtime_error("point " + std::to_string(index) + ": " + message),
        index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Evaluates a noiseless objective at many points, possibly concurrently.
/// Results are identical to the sequential map regardless of thread count.
/// Throws std::domain_error for noisy objectives (their draw streams are
/// sequential) and BatchEvaluationError when an evaluation fails.
std::vector<double> batch_evaluate(const Objective& obj,
                                   const std::vector<Vec>& points);

}  // namespace baryopt
