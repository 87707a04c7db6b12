#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "baryopt/objectives.hpp"
#include "baryopt/schedule.hpp"
#include "baryopt/search.hpp"

using namespace baryopt;

namespace {

SearchConfig banana_config(std::uint64_t seed) {
  return SearchConfig(WeightExponent(4.0), 0.6,
                      VarianceSchedule::parse("linear:2:0.4:80"), 80, seed,
                      {-1.5, 1.5}, CovarianceMode::isotropic());
}

}  // namespace

TEST_CASE("constant schedule") {
  const VarianceSchedule s = VarianceSchedule::constant(2.0);
  for (std::size_t n : {0, 1, 7, 1000}) CHECK(s.sigma(n) == 2.0);
  CHECK_THROWS_AS(VarianceSchedule::constant(0.0), std::domain_error);
  CHECK_THROWS_AS(VarianceSchedule::constant(-1.0), std::domain_error);
}

TEST_CASE("linear schedule hits both endpoints exactly") {
  const VarianceSchedule s = VarianceSchedule::linear(2.0, 0.4, 80);
  CHECK(s.sigma(0) == 2.0);
  CHECK(s.sigma(79) == 0.4);
  CHECK(s.sigma(80) == 0.4);   // clamped beyond the ramp
  CHECK(s.sigma(500) == 0.4);
  for (std::size_t n = 1; n < 80; ++n) {
    CHECK(s.sigma(n) < s.sigma(n - 1));
    CHECK(s.sigma(n) > 0.0);
  }
  CHECK(s.sigma(40) ==
        doctest::Approx(2.0 + (0.4 - 2.0) * 40.0 / 79.0).epsilon(1e-15));
  CHECK_THROWS_AS(VarianceSchedule::linear(2.0, 0.0, 80), std::domain_error);
  CHECK_THROWS_AS(VarianceSchedule::linear(0.0, 0.4, 80), std::domain_error);
  CHECK_THROWS_AS(VarianceSchedule::linear(2.0, 0.4, 1), std::domain_error);
}

TEST_CASE("geometric schedule keeps an exact ratio") {
  const VarianceSchedule s = VarianceSchedule::geometric(1.0, 0.982);
  CHECK(s.sigma(0) == 1.0);
  for (std::size_t n = 0; n < 300; ++n) {
    const double ratio = s.sigma(n + 1) / s.sigma(n);
    CHECK(std::abs(ratio - 0.982) <= 1e-15);
  }
  CHECK(VarianceSchedule::geometric(3.0, 1.0).sigma(99) == 3.0);
  CHECK_THROWS_AS(VarianceSchedule::geometric(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(VarianceSchedule::geometric(1.0, 1.5), std::domain_error);
}

TEST_CASE("schedule parsing round-trips through describe") {
  for (const char* text :
       {"constant:1.5", "linear:2:0.4:80", "geometric:2.4:0.966",
        "geometric:1:0.982", "linear:0.5:0.25:10"}) {
    const VarianceSchedule s = VarianceSchedule::parse(text);
    CHECK(s.describe() == text);
    const VarianceSchedule again = VarianceSchedule::parse(s.describe());
    for (std::size_t n : {0, 3, 50}) CHECK(again.sigma(n) == s.sigma(n));
  }
  for (const char* bad :
       {"", "constant", "constant:abc", "constant:1:2", "linear:2:0.4",
        "linear:2:0.4:80:9", "linear:2:0.4:x", "geometric:1",
        "geometric:1:1.5", "geometric:0:0.9", "banana:1", "linear:2:-1:10"}) {
    CHECK_THROWS_AS(VarianceSchedule::parse(bad), std::invalid_argument);
  }
}

TEST_CASE("covariance modes") {
  const CovarianceMode iso = CovarianceMode::isotropic();
  CHECK(iso.component_stddev(0.5, 0) == 0.5);
  CHECK(iso.component_stddev(0.5, 7) == 0.5);

  const CovarianceMode diag = CovarianceMode::diagonal({4.0, 1.0});
  CHECK(diag.component_stddev(0.5, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(diag.component_stddev(0.5, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(CovarianceMode::diagonal({}), std::domain_error);
  CHECK_THROWS_AS(CovarianceMode::diagonal({1.0, -2.0}), std::domain_error);
  CHECK_THROWS_AS(CovarianceMode::diagonal({0.0}), std::domain_error);
}

TEST_CASE("search config validation") {
  CHECK_THROWS_AS(SearchConfig(WeightExponent(1.0, 2.0), 0.5,
                               VarianceSchedule::constant(1.0), 10, 1, {0.0},
                               CovarianceMode::isotropic()),
                  std::domain_error);
  CHECK_THROWS_AS(SearchConfig(WeightExponent(1.0), 1.0,
                               VarianceSchedule::constant(1.0), 10, 1, {0.0},
                               CovarianceMode::isotropic()),
                  std::domain_error);
  CHECK_THROWS_AS(SearchConfig(WeightExponent(1.0), -0.1,
                               VarianceSchedule::constant(1.0), 10, 1, {0.0},
                               CovarianceMode::isotropic()),
                  std::domain_error);
  CHECK_THROWS_AS(SearchConfig(WeightExponent(1.0), 0.5,
                               VarianceSchedule::constant(1.0), 0, 1, {0.0},
                               CovarianceMode::isotropic()),
                  std::domain_error);
  CHECK_THROWS_AS(SearchConfig(WeightExponent(1.0), 0.5,
                               VarianceSchedule::constant(1.0), 10, 1, {},
                               CovarianceMode::isotropic()),
                  std::domain_error);
  CHECK_THROWS_AS(SearchConfig(WeightExponent(1.0), 0.5,
                               VarianceSchedule::constant(1.0), 10, 1,
                               {0.0, 0.0}, CovarianceMode::diagonal({1.0})),
                  std::domain_error);
}

TEST_CASE("propose") {
  SUBCASE("vanishing spread with no momentum returns the estimate") {
    BarycenterState state({0.7, -0.3});
    GaussianStream rng(5, 0);
    const auto [z, x] = propose(state, {0.0, 0.0}, 1e-300, 0.0,
                                CovarianceMode::isotropic(), rng);
    CHECK(x[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(-0.3).epsilon(1e-15));
    CHECK(std::abs(z[0]) < 1e-290);
  }
  SUBCASE("fixed seed gives identical draws") {
    BarycenterState state({1.0, 2.0});
    GaussianStream a(99, 0), b(99, 0);
    const auto [za, xa] = propose(state, {0.5, 0.0}, 1.5, 0.6,
                                  CovarianceMode::isotropic(), a);
    const auto [zb, xb] = propose(state, {0.5, 0.0}, 1.5, 0.6,
                                  CovarianceMode::isotropic(), b);
    CHECK(za == zb);
    CHECK(xa == xb);
  }
  SUBCASE("nonpositive sigma rejected") {
    BarycenterState state({0.0});
    GaussianStream rng(1, 0);
    CHECK_THROWS_AS(propose(state, {0.0}, 0.0, 0.0,
                            CovarianceMode::isotropic(), rng),
                    std::domain_error);
  }
  SUBCASE("law of large numbers on the proposal mean") {
    BarycenterState state({0.0, 0.0});
    GaussianStream rng(20260815, 0);
    const Vec prev_delta{1.0, 0.0};
    const double xi = 0.6, sigma = 2.0;
    const int n = 100000;
    Vec sum(2, 0.0);
    for (int i = 0; i < n; ++i) {
      const auto [z, x] = propose(state, prev_delta, sigma, xi,
                                  CovarianceMode::isotropic(), rng);
      sum = sum + z;
    }
    const double bound = 3.0 * sigma / std::sqrt(double(n));
    CHECK(std::abs(sum[0] / n - 0.6) <= bound);
    CHECK(std::abs(sum[1] / n - 0.0) <= bound);
  }
  SUBCASE("diagonal mode scales per-component spread") {
    BarycenterState state({0.0, 0.0});
    GaussianStream rng(31337, 0);
    const CovarianceMode mode = CovarianceMode::diagonal({4.0, 0.25});
    const double sigma = 1.0;
    const int n = 100000;
    double s0 = 0.0, s1 = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto [z, x] = propose(state, {0.0, 0.0}, sigma, 0.0, mode, rng);
      s0 += z[0] * z[0];
      s1 += z[1] * z[1];
    }
    CHECK(std::abs(s0 / n - 4.0) <= 0.05 * 4.0);
    CHECK(std::abs(s1 / n - 0.25) <= 0.05 * 0.25);
  }
}

TEST_CASE("single step") {
  const Objective banana = make_rosenbrock();
  SUBCASE("first step moves exactly by z with gain 1") {
    const SearchConfig config = banana_config(3);
    BarycenterState state(config.initial_guess);
    GaussianStream rng(config.seed, 0);
    const StepOutcome out = step(state, {0.0, 0.0}, config, 0, banana, rng);
    CHECK(out.record.gain == 1.0);
    CHECK(out.record.n == 1);
    for (int k = 0; k < 2; ++k)
      CHECK(out.delta[k] ==
            doctest::Approx(out.record.z[k]).epsilon(1e-13));
  }
  SUBCASE("every step realizes a single scalar gain in (0,1]") {
    // A gentle quadratic keeps nu * (f - f_min) far below the exponent
    // range, so no weight can underflow: strict positivity is exact here.
    Matrix H(2, 2);
    H(0, 0) = 2.0;
    H(1, 1) = 1.0;
    const Objective quad = make_quadratic(std::move(H), {0.0, 0.0});
    const SearchConfig config(WeightExponent(1.0), 0.6,
                              VarianceSchedule::linear(2.0, 0.4, 80), 80, 17,
                              {-1.5, 1.5}, CovarianceMode::isotropic());
    BarycenterState state(config.initial_guess);
    GaussianStream rng(config.seed, 0);
    Vec prev(2, 0.0);
    for (std::size_t i = 0; i < config.budget; ++i) {
      const StepOutcome out = step(state, prev, config, i, quad, rng);
      CHECK(out.record.gain > 0.0);
      CHECK(out.record.gain <= 1.0);
      for (int k = 0; k < 2; ++k)
        CHECK(std::abs(out.delta[k] - out.record.gain * out.record.z[k]) <=
              1e-12 * (std::abs(out.record.z[k]) + 1.0));
      state = out.state;
      prev = out.delta;
    }
  }
  SUBCASE("a hopeless probe can round the gain to zero, freezing the step") {
    // The banana run at nu = 4 spans f values in the thousands, so some
    // probes underflow against the accumulated mass. Those steps must
    // report gain exactly 0 and leave the estimate untouched; all other
    // steps keep the strict (0,1] bound and the delta = gain * z law.
    const SearchConfig config = banana_config(17);
    BarycenterState state(config.initial_guess);
    GaussianStream rng(config.seed, 0);
    Vec prev(2, 0.0);
    std::size_t frozen_steps = 0;
    for (std::size_t i = 0; i < config.budget; ++i) {
      const StepOutcome out = step(state, prev, config, i, banana, rng);
      CHECK(out.record.gain >= 0.0);
      CHECK(out.record.gain <= 1.0);
      if (out.record.gain == 0.0) {
        ++frozen_steps;
        CHECK(out.state.estimate() == state.estimate());
        CHECK(out.delta == Vec{0.0, 0.0});
      } else {
        for (int k = 0; k < 2; ++k)
          CHECK(std::abs(out.delta[k] - out.record.gain * out.record.z[k]) <=
                1e-12 * (std::abs(out.record.z[k]) + 1.0));
      }
      state = out.state;
      prev = out.delta;
    }
    CHECK(frozen_steps > 0);  // seed 17 is known to hit the underflow edge
  }
  SUBCASE("constant oracle gains follow 1/n") {
    Objective flat;
    flat.name = "flat";
    flat.dimension = 2;
    flat.eval = [](const Vec&) { return 42.0; };
    const SearchConfig config(WeightExponent(1.0), 0.0,
                              VarianceSchedule::constant(1.0), 50, 5,
                              {0.0, 0.0}, CovarianceMode::isotropic());
    const RunTrace trace = run(config, flat);
    REQUIRE(trace.records.size() == 50);
    for (std::size_t i = 0; i < trace.records.size(); ++i)
      CHECK(trace.records[i].gain ==
            doctest::Approx(1.0 / double(i + 1)).epsilon(1e-12));
  }
}

TEST_CASE("full run") {
  const Objective banana = make_rosenbrock();
  SUBCASE("budget one: estimate equals the single probe") {
    SearchConfig config(WeightExponent(4.0), 0.6,
                        VarianceSchedule::constant(2.0), 1, 9, {-1.5, 1.5},
                        CovarianceMode::isotropic());
    const RunTrace trace = run(config, banana);
    REQUIRE(trace.records.size() == 1);
    CHECK(trace.records[0].n == 1);
    CHECK(trace.final_estimate == trace.records[0].x);
    CHECK(trace.best_f == trace.records[0].f_value);
    CHECK(trace.valid);
  }
  SUBCASE("same config and seed reproduce the trace bit for bit") {
    const RunTrace a = run(banana_config(1234), banana);
    const RunTrace b = run(banana_config(1234), banana);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      CHECK(a.records[i].x == b.records[i].x);
      CHECK(a.records[i].f_value == b.records[i].f_value);
      CHECK(a.records[i].estimate == b.records[i].estimate);
      CHECK(a.records[i].z == b.records[i].z);
      CHECK(a.records[i].sigma_n == b.records[i].sigma_n);
      CHECK(a.records[i].best_f == b.records[i].best_f);
    }
    const RunTrace c = run(banana_config(1235), banana);
    CHECK(a.records[0].x != c.records[0].x);
  }
  SUBCASE("trace bookkeeping") {
    const RunTrace trace = run(banana_config(42), banana);
    REQUIRE(trace.records.size() == 80);
    double best = INFINITY;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      const StepRecord& r = trace.records[i];
      CHECK(r.n == i + 1);
      best = std::min(best, r.f_value);
      CHECK(r.best_f == best);
      if (i > 0) CHECK(r.best_f <= trace.records[i - 1].best_f);
      CHECK(r.sigma_n ==
            doctest::Approx(banana_config(42).schedule.sigma(i))
                .epsilon(1e-15));
    }
    CHECK(trace.best_f == best);
    CHECK(banana(trace.best_x) == doctest::Approx(trace.best_f));
    CHECK(trace.final_estimate == trace.records.back().estimate);
  }
  SUBCASE("oracle failure flags a partial trace") {
    int calls = 0;
    Objective flaky;
    flaky.name = "flaky";
    flaky.dimension = 2;
    flaky.eval = [&calls](const Vec& x) {
      if (++calls == 5) throw std::runtime_error("probe rejected");
      return x[0] * x[0] + x[1] * x[1];
    };
    const RunTrace trace = run(banana_config(7), flaky);
    CHECK_FALSE(trace.valid);
    CHECK(trace.records.size() == 4);
    CHECK(trace.error_message.find("probe rejected") != std::string::npos);
    CHECK(std::isfinite(trace.best_f));
  }
  SUBCASE("dimension mismatch rejected up front") {
    CHECK_THROWS_AS(run(banana_config(1), make_objective("quadratic", 3)),
                    std::domain_error);
  }
}
