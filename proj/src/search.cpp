#include "baryopt/search.hpp"

#include <cmath>
#include <limits>

namespace baryopt {

CovarianceMode CovarianceMode::diagonal(Vec variance_multipliers) {
  if (variance_multipliers.empty())
    throw std::domain_error("CovarianceMode::diagonal: empty multipliers");
  for (double m : variance_multipliers)
    if (!(m > 0.0) || !std::isfinite(m))
      throw std::domain_error(
          "CovarianceMode::diagonal: multipliers must be positive and finite");
  CovarianceMode mode;
  mode.kind_ = Kind::kDiagonal;
  mode.multipliers_ = std::move(variance_multipliers);
  return mode;
}

double CovarianceMode::component_stddev(double sigma_n, std::size_t k) const {
  if (kind_ == Kind::kIsotropic) return sigma_n;
  return sigma_n * std::sqrt(multipliers_[k]);
}

std::string CovarianceMode::describe() const {
  if (kind_ == Kind::kIsotropic) return "isotropic";
  std::string s = "diagonal(";
  for (std::size_t k = 0; k < multipliers_.size(); ++k) {
    if (k) s += ",";
    s += std::to_string(multipliers_[k]);
  }
  return s + ")";
}

SearchConfig::SearchConfig(WeightExponent nu_, double xi_,
                           VarianceSchedule schedule_, std::size_t budget_,
                           std::uint64_t seed_, Vec initial_guess_,
                           CovarianceMode covariance_)
    : nu(nu_),
      xi(xi_),
      schedule(schedule_),
      budget(budget_),
      seed(seed_),
      initial_guess(std::move(initial_guess_)),
      covariance(std::move(covariance_)) {
  if (!nu.is_real())
    throw std::domain_error(
        "SearchConfig: the search driver uses the real method (nu_i = 0)");
  if (!(xi >= 0.0 && xi < 1.0))
    throw std::domain_error("SearchConfig: xi must lie in [0, 1)");
  if (budget < 1) throw std::domain_error("SearchConfig: budget must be >= 1");
  if (initial_guess.empty())
    throw std::domain_error("SearchConfig: empty initial guess");
  require_finite(initial_guess, "SearchConfig initial guess");
  if (covariance.kind() == CovarianceMode::Kind::kDiagonal)
    require_dimension(covariance.multipliers(), initial_guess.size(),
                      "SearchConfig covariance multipliers");
}

std::pair<Vec, Vec> propose(const BarycenterState& state, const Vec& prev_delta,
                            double sigma_n, double xi,
                            const CovarianceMode& covariance,
                            GaussianStream& rng) {
  if (!(sigma_n > 0.0))
    throw std::domain_error("propose: sigma_n must be positive");
  require_dimension(prev_delta, state.dimension(), "propose prev_delta");

  const std::size_t dim = state.dimension();
  Vec z(dim), x(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    z[k] = xi * prev_delta[k] +
           covariance.component_stddev(sigma_n, k) * rng.normal();
    x[k] = state.estimate()[k] + z[k];
  }
  return {std::move(z), std::move(x)};
}

StepOutcome step(const BarycenterState& state, const Vec& prev_delta,
                 const SearchConfig& config, std::size_t step_index,
                 const Objective& oracle, GaussianStream& rng) {
  if (step_index >= config.budget)
    throw std::domain_error("step: step_index beyond budget");

  const double sigma_n = config.schedule.sigma(step_index);
  auto [z, x] = propose(state, prev_delta, sigma_n, config.xi,
                        config.covariance, rng);
  const double f = oracle(x);

  StepOutcome out{state, Vec(), StepRecord()};
  const Vec before = out.state.estimate();
  const double gain = out.state.update(TestPoint(x, f), config.nu);
  if (!(gain >= 0.0 && gain <= 1.0))
    throw std::logic_error("step: gain outside [0, 1]");
  out.delta = out.state.estimate() - before;

  out.record.n = step_index + 1;
  out.record.x = x;
  out.record.f_value = f;
  out.record.estimate = out.state.estimate();
  out.record.sigma_n = sigma_n;
  out.record.z = std::move(z);
  out.record.gain = gain;
  return out;
}

RunTrace run(const SearchConfig& config, const Objective& oracle) {
  if (oracle.dimension != config.initial_guess.size())
    throw std::domain_error("run: oracle/initial guess dimension mismatch");

  GaussianStream rng(config.seed, /*stream=*/0);
  BarycenterState state(config.initial_guess);
  Vec prev_delta(config.initial_guess.size(), 0.0);  // no motion before step 1

  RunTrace trace;
  trace.records.reserve(config.budget);
  trace.best_f = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < config.budget; ++i) {
    try {
      StepOutcome outcome = step(state, prev_delta, config, i, oracle, rng);
      state = std::move(outcome.state);
      prev_delta = std::move(outcome.delta);
      if (outcome.record.f_value < trace.best_f) {
        trace.best_f = outcome.record.f_value;
        trace.best_x = outcome.record.x;
      }
      outcome.record.best_f = trace.best_f;
      trace.records.push_back(std::move(outcome.record));
    } catch (const std::exception& e) {
      trace.valid = false;
      trace.error_message = e.what();
      break;
    }
  }
  trace.final_estimate = state.estimate();
  return trace;
}

}  // namespace baryopt
