#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "baryopt/barycenter.hpp"

using namespace baryopt;

namespace {

double vec_rel_error(const Vec& got, const Vec& want) {
  REQUIRE(got.size() == want.size());
  double diff = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    diff = std::max(diff, std::abs(got[k] - want[k]));
    scale = std::max(scale, std::abs(want[k]));
  }
  return diff / (scale + 1e-30);
}

std::vector<TestPoint> random_points(std::mt19937_64& rng, std::size_t count,
                                     std::size_t dim, double f_lo,
                                     double f_hi) {
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::uniform_real_distribution<double> fval(f_lo, f_hi);
  std::vector<TestPoint> points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec x(dim);
    for (double& c : x) c = coord(rng);
    points.emplace_back(std::move(x), fval(rng));
  }
  return points;
}

}  // namespace

TEST_CASE("weight exponent validation") {
  CHECK(WeightExponent(4.0).real() == 4.0);
  CHECK(WeightExponent(4.0).is_real());
  CHECK(WeightExponent(1.0, 4.0).imag() == 4.0);
  CHECK_FALSE(WeightExponent(1.0, 4.0).is_real());
  CHECK_THROWS_AS(WeightExponent(0.0), std::domain_error);
  CHECK_THROWS_AS(WeightExponent(-1.0), std::domain_error);
  CHECK_THROWS_AS(WeightExponent(std::nan("")), std::domain_error);
  CHECK_THROWS_AS(WeightExponent(1.0, std::nan("")), std::domain_error);
}

TEST_CASE("test point validation") {
  CHECK(TestPoint({1.0, 2.0}, 3.0).dimension() == 2);
  CHECK_THROWS_AS(TestPoint({}, 1.0), std::domain_error);
  CHECK_THROWS_AS(TestPoint({1.0}, std::nan("")), std::domain_error);
  CHECK_THROWS_AS(TestPoint({1.0}, INFINITY), std::domain_error);
  CHECK_THROWS_AS(TestPoint({std::nan("")}, 1.0), std::domain_error);
}

TEST_CASE("batch barycenter examples") {
  SUBCASE("single point: weights cancel") {
    const Vec got = batch_barycenter({TestPoint({2.0, 3.0}, 5.0)},
                                     WeightExponent(4.0));
    CHECK(got[0] == 2.0);
    CHECK(got[1] == 3.0);
  }
  SUBCASE("equal f values give the arithmetic mean") {
    const Vec got = batch_barycenter(
        {TestPoint({0.0, 0.0}, 7.0), TestPoint({4.0, 2.0}, 7.0)},
        WeightExponent(1.0));
    CHECK(got[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(got[1] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("weights 1 and 1/2 put the mean at 1/3") {
    for (double nu : {0.7, 1.0, 3.0}) {
      const Vec got = batch_barycenter(
          {TestPoint({0.0}, 0.0), TestPoint({1.0}, std::log(2.0) / nu)},
          WeightExponent(nu));
      CHECK(got[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
  }
  SUBCASE("empty input rejected") {
    CHECK_THROWS_AS(batch_barycenter({}, WeightExponent(1.0)),
                    std::domain_error);
  }
  SUBCASE("complex exponent rejected") {
    CHECK_THROWS_AS(
        batch_barycenter({TestPoint({1.0}, 0.0)}, WeightExponent(1.0, 2.0)),
        std::domain_error);
  }
}

TEST_CASE("recursive init and first update") {
  BarycenterState fresh({1.0, 1.0});
  CHECK(fresh.count() == 0);
  CHECK(fresh.estimate() == Vec{1.0, 1.0});
  CHECK(std::isinf(fresh.true_log_mass()));
  CHECK_THROWS_AS(BarycenterState({}), std::domain_error);
  CHECK_THROWS_AS(BarycenterState({std::nan("")}), std::domain_error);

  // The first absorbed point replaces the estimate no matter the guess.
  for (Vec guess : {Vec{0.0, 0.0}, Vec{5.0, -5.0}, Vec{123.0, -9.0}}) {
    BarycenterState state(guess);
    state.update(TestPoint({4.0, 4.0}, 17.5), WeightExponent(2.5));
    CHECK(state.estimate() == Vec{4.0, 4.0});
    CHECK(state.count() == 1);
  }
}

TEST_CASE("recursive update examples") {
  SUBCASE("first point dominates and sets the mass") {
    BarycenterState state({9.0, 9.0});
    const double gain = state.update(TestPoint({1.0, 2.0}, 3.0),
                                     WeightExponent(2.0));
    CHECK(gain == 1.0);
    CHECK(state.estimate() == Vec{1.0, 2.0});
    CHECK(state.true_log_mass() == doctest::Approx(-6.0).epsilon(1e-15));
  }
  SUBCASE("three sequential points match the batch formula") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
      const auto points = random_points(rng, 3, 2, -4.0, 4.0);
      const WeightExponent nu(1.7);
      BarycenterState state({0.0, 0.0});
      for (const auto& p : points) state.update(p, nu);
      CHECK(vec_rel_error(state.estimate(), batch_barycenter(points, nu)) <=
            1e-12);
    }
  }
  SUBCASE("gigantic f underflows harmlessly under shifting") {
    BarycenterState state({0.0, 0.0});
    const WeightExponent nu(4.0);
    state.update(TestPoint({1.0, 1.0}, 1.0), nu);
    const Vec before = state.estimate();
    const double gain = state.update(TestPoint({100.0, -50.0}, 1e6), nu);
    CHECK(gain == 0.0);
    CHECK(state.estimate() == before);
    CHECK(state.count() == 2);
  }
  SUBCASE("dimension mismatch rejected") {
    BarycenterState state({0.0, 0.0});
    CHECK_THROWS_AS(state.update(TestPoint({1.0}, 0.0), WeightExponent(1.0)),
                    std::domain_error);
  }
}

TEST_CASE("estimate accessor") {
  BarycenterState state({1.0, 1.0});
  CHECK(estimate(state) == Vec{1.0, 1.0});
  state.update(TestPoint({4.0, 4.0}, 2.0), WeightExponent(1.0));
  CHECK(estimate(state) == Vec{4.0, 4.0});
  BarycenterState pair({9.0, 9.0});
  pair.update(TestPoint({0.0, 0.0}, 1.0), WeightExponent(2.0));
  pair.update(TestPoint({2.0, 2.0}, 1.0), WeightExponent(2.0));
  CHECK(pair.estimate()[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pair.estimate()[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gains of a constant objective follow 1/n") {
  BarycenterState state({0.0});
  const WeightExponent nu(4.0);
  for (int n = 1; n <= 40; ++n) {
    const double gain = state.update(TestPoint({double(n)}, 42.0), nu);
    CHECK(gain == doctest::Approx(1.0 / n).epsilon(1e-13));
  }
}

TEST_CASE("batch/recursive equivalence over random sequences") {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<std::size_t> length(1, 300);
  std::uniform_real_distribution<double> nu_draw(0.1, 3.0);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto points = random_points(rng, length(rng), 3, -100.0, 100.0);
    const WeightExponent nu(nu_draw(rng));
    BarycenterState state({0.0, 0.0, 0.0});
    for (const auto& p : points) state.update(p, nu);
    worst = std::max(worst,
                     vec_rel_error(state.estimate(),
                                   batch_barycenter(points, nu)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("barycentric weights form a convex combination") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    const auto points = random_points(rng, 12, 2, -30.0, 30.0);
    const WeightExponent nu(2.0);
    const auto weights = barycentric_weights(points, nu);
    REQUIRE(weights.size() == points.size());
    double total = 0.0;
    Vec combo(2, 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
      CHECK(weights[i] >= 0.0);
      CHECK(weights[i] <= 1.0);
      total += weights[i];
      combo = combo + weights[i] * points[i].x();
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(vec_rel_error(batch_barycenter(points, nu), combo) <= 1e-12);
  }
}

TEST_CASE("estimate invariances") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> shift_draw(-50.0, 50.0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto points = random_points(rng, 10, 2, -20.0, 20.0);
    const WeightExponent nu(1.3);
    const Vec base = batch_barycenter(points, nu);

    // Shift invariance: f -> f + c rescales all weights uniformly.
    const double c = shift_draw(rng);
    std::vector<TestPoint> shifted;
    for (const auto& p : points) shifted.emplace_back(p.x(), p.f_value() + c);
    CHECK(vec_rel_error(batch_barycenter(shifted, nu), base) <= 1e-12);

    // Permutation invariance.
    std::vector<TestPoint> shuffled(points);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(vec_rel_error(batch_barycenter(shuffled, nu), base) <= 1e-12);

    // nu-scaling: moving a power-of-two factor between nu and f is exact.
    const double a = 4.0;
    std::vector<TestPoint> scaled;
    for (const auto& p : points) scaled.emplace_back(p.x(), a * p.f_value());
    const Vec left = batch_barycenter(points, WeightExponent(a * 1.3));
    const Vec right = batch_barycenter(scaled, WeightExponent(1.3));
    CHECK(left == right);

    // General factors agree to rounding.
    const double b = 0.77;
    std::vector<TestPoint> scaled_b;
    for (const auto& p : points) scaled_b.emplace_back(p.x(), b * p.f_value());
    CHECK(vec_rel_error(batch_barycenter(points, WeightExponent(b * 1.3)),
                        batch_barycenter(scaled_b, WeightExponent(1.3))) <=
          1e-12);
  }
}

TEST_CASE("state merge") {
  std::mt19937_64 rng(17);
  const WeightExponent nu(0.9);

  SUBCASE("split sequence equals full sequence") {
    for (int rep = 0; rep < 50; ++rep) {
      const auto points = random_points(rng, 20, 2, -10.0, 10.0);
      BarycenterState full({0.0, 0.0}), left({0.0, 0.0}), right({0.0, 0.0});
      for (std::size_t i = 0; i < points.size(); ++i) {
        full.update(points[i], nu);
        (i < 9 ? left : right).update(points[i], nu);
      }
      const BarycenterState merged = BarycenterState::merged(left, right);
      CHECK(merged.count() == full.count());
      CHECK(vec_rel_error(merged.estimate(), full.estimate()) <= 1e-12);
      CHECK(merged.true_log_mass() ==
            doctest::Approx(full.true_log_mass()).epsilon(1e-12));
    }
  }
  SUBCASE("associativity") {
    for (int rep = 0; rep < 50; ++rep) {
      BarycenterState a({0.0, 0.0}), b({0.0, 0.0}), c({0.0, 0.0});
      for (auto* s : {&a, &b, &c})
        for (const auto& p : random_points(rng, 6, 2, -10.0, 10.0))
          s->update(p, nu);
      const auto ab_c = BarycenterState::merged(BarycenterState::merged(a, b), c);
      const auto a_bc = BarycenterState::merged(a, BarycenterState::merged(b, c));
      CHECK(vec_rel_error(ab_c.estimate(), a_bc.estimate()) <= 1e-12);
      CHECK(ab_c.true_log_mass() ==
            doctest::Approx(a_bc.true_log_mass()).epsilon(1e-12));
    }
  }
  SUBCASE("empty states are identities") {
    BarycenterState loaded({0.0, 0.0});
    loaded.update(TestPoint({3.0, -1.0}, 0.5), nu);
    loaded.update(TestPoint({1.0, 2.0}, -0.5), nu);
    const BarycenterState empty({7.0, 7.0});
    for (const auto& m : {BarycenterState::merged(empty, loaded),
                          BarycenterState::merged(loaded, empty)}) {
      CHECK(m.count() == loaded.count());
      CHECK(vec_rel_error(m.estimate(), loaded.estimate()) <= 1e-15);
      CHECK(m.true_log_mass() ==
            doctest::Approx(loaded.true_log_mass()).epsilon(1e-15));
    }
    const BarycenterState both =
        BarycenterState::merged(empty, BarycenterState({2.0, 2.0}));
    CHECK(both.count() == 0);
    CHECK(both.estimate() == Vec{7.0, 7.0});  // left estimate wins
  }
  SUBCASE("dimension mismatch rejected") {
    CHECK_THROWS_AS(BarycenterState::merged(BarycenterState({1.0}),
                                            BarycenterState({1.0, 2.0})),
                    std::domain_error);
  }
}

TEST_CASE("complex accumulator examples") {
  SUBCASE("single 1-D point") {
    ComplexAccumulator acc(1);
    acc.accumulate(TestPoint({3.0}, 0.0), WeightExponent(1.0, 5.0));
    CHECK(acc.estimate()[0] == doctest::Approx(3.0).epsilon(1e-15));
  }
  SUBCASE("single 2-D point") {
    ComplexAccumulator acc(2);
    acc.accumulate(TestPoint({3.0, 4.0}, 1.25), WeightExponent(2.0, 1.0));
    const Vec est = acc.estimate();
    CHECK(est[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(est[1] == doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("zero imaginary part reproduces the real pipeline") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> coord(0.0, 9.0);
    std::uniform_real_distribution<double> fval(-3.0, 3.0);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<TestPoint> points;
      for (int i = 0; i < 8; ++i)
        points.emplace_back(Vec{coord(rng), coord(rng)}, fval(rng));
      ComplexAccumulator acc(2);
      const WeightExponent nu(2.0, 0.0);
      for (const auto& p : points) acc.accumulate(p, nu);
      CHECK(vec_rel_error(acc.estimate(), batch_barycenter(points, nu)) <=
            1e-12);
    }
  }
  SUBCASE("pure-phase weights 1 and -i") {
    // f values 0 and pi/(2 nu_i) with nu_r -> 0+ give weights 1 and -i:
    // |eta| = |1 - 2i| / |1 - i| = sqrt(5/2).
    ComplexAccumulator acc(1);
    const WeightExponent nu(1e-9, 1.0);
    acc.accumulate(TestPoint({1.0}, 0.0), nu);
    acc.accumulate(TestPoint({2.0}, std::numbers::pi / 2.0), nu);
    CHECK(acc.estimate()[0] ==
          doctest::Approx(std::sqrt(2.5)).epsilon(1e-8));
  }
}

TEST_CASE("complex accumulator domain handling") {
  SUBCASE("negative coordinate without translation") {
    ComplexAccumulator acc(1);
    CHECK_THROWS_AS(acc.accumulate(TestPoint({-0.5}, 0.0),
                                   WeightExponent(1.0, 1.0)),
                    std::domain_error);
  }
  SUBCASE("translation restores the real barycenter on shifted points") {
    std::vector<TestPoint> points{TestPoint({-2.0}, 0.0),
                                  TestPoint({-4.0}, 0.0)};
    const WeightExponent nu(1.0, 0.0);
    ComplexAccumulator acc(1, {5.0});
    for (const auto& p : points) acc.accumulate(p, nu);
    CHECK(acc.estimate()[0] == doctest::Approx(-3.0).epsilon(1e-12));
  }
  SUBCASE("degenerate denominator") {
    CHECK_THROWS_AS(ComplexAccumulator(2).estimate(),
                    DegenerateInterferenceError);
  }
  SUBCASE("log denominator magnitude of one point") {
    ComplexAccumulator acc(1);
    acc.accumulate(TestPoint({1.0}, 2.5), WeightExponent(3.0, 4.0));
    CHECK(acc.log_denominator_magnitude() ==
          doctest::Approx(-7.5).epsilon(1e-12));
  }
}

TEST_CASE("complex accumulator merge") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> coord(0.0, 6.0);
  std::uniform_real_distribution<double> fval(-2.0, 2.0);
  const WeightExponent nu(1.0, 3.0);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<TestPoint> points;
    for (int i = 0; i < 10; ++i)
      points.emplace_back(Vec{coord(rng), coord(rng)}, fval(rng));
    ComplexAccumulator full(2), left(2), right(2);
    for (std::size_t i = 0; i < points.size(); ++i) {
      full.accumulate(points[i], nu);
      (i < 4 ? left : right).accumulate(points[i], nu);
    }
    const ComplexAccumulator merged = ComplexAccumulator::merged(left, right);
    CHECK(merged.count() == full.count());
    CHECK(vec_rel_error(merged.estimate(), full.estimate()) <= 1e-12);
    CHECK(merged.log_denominator_magnitude() ==
          doctest::Approx(full.log_denominator_magnitude()).epsilon(1e-12));
  }
  CHECK_THROWS_AS(
      ComplexAccumulator::merged(ComplexAccumulator(2, {1.0, 1.0}),
                                 ComplexAccumulator(2, {2.0, 2.0})),
      std::domain_error);
}

TEST_CASE("shifted arithmetic stays finite under extreme spans") {
  const WeightExponent nu(10.0);
  std::vector<TestPoint> points{TestPoint({1.0}, 0.0),
                                TestPoint({2.0}, 1e8),
                                TestPoint({3.0}, -1e8)};
  const Vec got = batch_barycenter(points, nu);
  CHECK(std::isfinite(got[0]));
  CHECK(got[0] == doctest::Approx(3.0).epsilon(1e-15));  // minimum wins

  BarycenterState state({0.0});
  for (const auto& p : points) state.update(p, nu);  // shift rescales twice
  CHECK(std::isfinite(state.estimate()[0]));
  CHECK(state.estimate()[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(state.true_log_mass() == doctest::Approx(1e9).epsilon(1e-12));
}
