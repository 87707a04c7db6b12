#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "baryopt/barycenter.hpp"
#include "baryopt/linalg.hpp"
#include "baryopt/objectives.hpp"

namespace baryopt {

/// Context for the one-step gain functions: the prior mass and estimate the
/// step starts from, the (real) exponent, and the objective being probed.
struct GainContext {
  double prior_mass = 1.0;  // m_{n-1} >= 0
  Vec prior_estimate;       // x-hat_{n-1}
  double nu = 1.0;          // real exponent, > 0
  const Objective* objective = nullptr;
  /// Permit central finite differences when the objective lacks an analytic
  /// gradient. Disabling makes gradient-dependent predictions throw.
  bool allow_finite_difference = true;
};

/// F(z) = e^{-nu f(xhat+z)} / (m + e^{-nu f(xhat+z)}), in (0, 1] for m >= 0.
double gain_F(const GainContext& ctx, const Vec& z);

/// F-bar(z) = m e^{-nu f}/(m + e^{-nu f})^2 = F (1 - F), in [0, 1).
double gain_Fbar(const GainContext& ctx, const Vec& z);

/// Central-difference gradient, step tuned for ~1e-10 relative accuracy on
/// smooth functions.
Vec finite_difference_gradient(const std::function<double(const Vec&)>& f,
                               const Vec& x);

/// Mean vector with per-component Monte Carlo standard errors.
struct MeanEstimate {
  Vec value;
  Vec stderr_;
  std::size_t trials = 0;
};

/// Covariance matrix with standard errors for its diagonal entries
/// (computed from fourth central moments).
struct VarianceEstimate {
  Matrix cov;
  Vec diag_stderr;
  std::size_t trials = 0;
};

/// Diagonal Gaussian law for the curiosity step z.
struct GaussianSpec {
  Vec mean;
  Vec stddev;  // per-component standard deviations
};

/// Monte Carlo average of the realized step F(z) z over i.i.d. draws of z.
/// Trial t draws from stream t of `seed`, so results are independent of any
/// batching or threading of the trials.
MeanEstimate empirical_mean_step(const GainContext& ctx, const GaussianSpec& z,
                                 std::size_t trials, std::uint64_t seed);

/// Monte Carlo evaluation of the predicted mean step
///   E[F(z)] zbar - nu Sigma E[F-bar(z) grad f(xhat + z)]
/// using the same single-integrand estimator per trial; `seed` should be
/// independent of the empirical estimator's seed.
MeanEstimate predicted_mean_step(const GainContext& ctx, const GaussianSpec& z,
                                 std::size_t trials, std::uint64_t seed);

/// Sample covariance of the realized step F(z) z (zbar is taken from `z`).
VarianceEstimate empirical_variance_step(const GainContext& ctx,
                                         const GaussianSpec& z,
                                         std::size_t trials,
                                         std::uint64_t seed);

/// The predicted step covariance
///   Sigma E[F^2] - 2 nu Sigma^T E[F F-bar grad^2 f] Sigma
/// with Monte Carlo expectations; requires an analytic Hessian.
Matrix predicted_variance_step(const GainContext& ctx, const GaussianSpec& z,
                               std::size_t trials, std::uint64_t seed);

/// Outcome of one Monte Carlo comparison. pass holds iff every component's
/// |zscore| <= threshold; one-sided checks (monotone ladders) encode their
/// margin violation as a nonnegative zscore with threshold 0, so the same
/// invariant applies.
struct MCReport {
  std::string quantity;
  Vec empirical;
  Vec stderr_;
  Vec predicted;
  Vec zscore;
  double threshold = 3.0;
  bool pass = false;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::string note;
};

/// Line-oriented serialization: one record per component, fields
/// quantity, component, empirical, stderr, predicted, zscore, pass.
std::string to_line_records(const std::vector<MCReport>& reports);

/// One mean-step scenario: quadratic objective (1/2) x^T H x probed from
/// prior estimate xhat with exponent nu, isotropic spread sigma, and
/// curiosity mean zbar.
struct MeanStepScenario {
  Matrix H;
  Vec xhat;
  double nu = 1.0;
  double sigma = 0.1;
  Vec zbar;
  std::string label;
};

/// The default scenario grid: H in {I, diag(4,1)}, xhat in {(1,1),(2,0)},
/// nu in {0.5, 1}, sigma in {0.05, 0.1}, zbar in {0, (0.06, 0)}.
std::vector<MeanStepScenario> default_mean_step_grid();

/// Empirical-vs-predicted mean step across scenarios, 3-sigma agreement per
/// component (combined standard errors). Empirical and predicted estimators
/// use seeds derived independently from `seed`.
std::vector<MCReport> check_theorem1(const std::vector<MeanStepScenario>& grid,
                                     std::size_t trials, std::uint64_t seed);

struct VarianceCheckConfig {
  double sigma = 0.05;
  double nu = 1.0;
  double h_main = 4.0;          // scenario for the 10% agreement check
  double rel_tolerance = 0.10;
  std::vector<double> h_ladder{1.0, 4.0, 16.0};   // at nu = 1
  std::vector<double> nu_ladder{0.5, 1.0, 2.0};   // at h = 4
  std::size_t trials_main = 1'000'000;
  std::size_t trials_ladder = 4'000'000;  // tighter SEs for interval separation
  std::uint64_t seed = 20260815;
};

/// Predicted-vs-empirical step variance at a quadratic minimum, plus the
/// monotone variance-reduction ladders (intervals separated by 3 combined
/// standard errors) and the flat-objective baseline.
std::vector<MCReport> check_theorem2(const VarianceCheckConfig& config);

/// Aggregate complex weight magnitude |sum_i e^{-nu f_i}| of a steep cluster
/// compared against a flat cluster with equal mean f. Returns a report whose
/// empirical entries are the two log-magnitudes. When the clusters' f values
/// coincide the magnitudes must agree to 1e-12; otherwise the steep cluster
/// must come out strictly smaller.
MCReport check_complex_interference(const std::vector<TestPoint>& flat,
                                    const std::vector<TestPoint>& steep,
                                    const WeightExponent& nu);

struct InterferenceConfig {
  std::size_t points_per_cluster = 64;
  double mean_f = 1.0;
  std::vector<double> slope_ladder{0.0, 0.5, 1.0, 2.0};
  WeightExponent nu{1.0, 4.0};
  std::vector<double> imag_ladder{2.0, 4.0, 6.0};  // at slope 1, nu_r = 1
};

/// The qualitative interference suite: slope-0 equality, strict decrease of
/// the steep-cluster magnitude along the slope ladder, and strict decrease
/// along the |nu|/nu_r ladder.
std::vector<MCReport> check_theorem3(const InterferenceConfig& config);

/// The five noise-free aggregates entering the oracle-noise predictions.
struct NoiseMoments {
  double m_bar = 0.0;   // sum e^{-nu f_i}; may underflow for extreme nu*f
  double m_bbar = 0.0;  // sum e^{-2 nu f_i}
  Vec eta_bar;          // sum x e^{-nu f} / m_bar
  Vec eta_bbar;         // sum x e^{-2 nu f} / m_bbar
  Matrix eta_breve;     // sum x x^T e^{-2 nu f} / m_bbar
  /// m_bbar / m_bar^2 computed in shifted arithmetic (exact under uniform
  /// weight rescaling, usable even when the raw masses underflow).
  double mass_ratio = 0.0;
};

NoiseMoments noise_moments(const std::vector<TestPoint>& points, double nu);

/// Predictions and Monte Carlo measurements for the oracle-noise response of
/// the barycenter of a fixed point set.
struct NoiseCheckResult {
  MCReport mean_report;  // empirical mean vs eta_bar + mass_ratio (eta_bar -
                         // eta_bbar) nu^2 sigma_w^2, 3-sigma per component
  MCReport cov_report;   // empirical covariance vs the symmetrized
                         // mass_ratio (eta_bar eta_bar^T - eta_bar eta_bbar^T
                         // - eta_bbar eta_bar^T + eta_breve) nu^2 sigma_w^2,
                         // relative Frobenius tolerance
  Vec empirical_mean;
  Matrix empirical_cov;
  Vec predicted_mean;
  Matrix predicted_cov;
  NoiseMoments moments;
};

/// Perturbs the f values of a fixed point sequence with i.i.d. Gaussian
/// noise (sigma_w), recomputes the barycenter per trial, and compares the
/// resulting mean and covariance against the second-order predictions.
/// `cov_rel_tolerance` is the relative Frobenius acceptance for the
/// covariance report.
NoiseCheckResult check_theorem4(const std::vector<TestPoint>& points,
                                double nu, double sigma_w, std::size_t trials,
                                std::uint64_t seed,
                                double cov_rel_tolerance = 0.15);

/// The noise check at sigma_w and at sigma_w/2 (the halved run gets 4x the
/// trials to keep its relative resolution), plus the first-order scaling
/// report: mean-bias norm and covariance norm must both shrink by a factor
/// in [3, 5] (the nu^2 sigma^2 law predicts 4).
struct NoiseScalingResult {
  NoiseCheckResult base;
  NoiseCheckResult halved;
  MCReport scaling_report;
};

NoiseScalingResult check_theorem4_scaling(const std::vector<TestPoint>& points,
                                          double nu, double sigma_w,
                                          std::size_t trials,
                                          std::uint64_t seed,
                                          double cov_rel_tolerance = 0.15);

/// The standard five-point planar fixture for the oracle-noise checks:
/// asymmetric enough that eta_bar != eta_bbar (a measurable bias), spread
/// enough that the bias dominates Monte Carlo noise at 10^6 trials.
std::vector<TestPoint> default_noise_fixture();

/// Derives decorrelated child seeds (for independent estimator streams).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace baryopt
