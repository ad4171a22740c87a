#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "echelon/tradeoff.hpp"

using namespace echelon;

// Reference values below are frozen from a 40-digit evaluation of the
// closed forms, independent of the implementation.

TEST_CASE("error_fraction matches the closed form at pinned points") {
  const SCurve c{10.0, 2.0};
  CHECK(error_fraction(c, 12.0) == doctest::Approx(0.73105857863000487925).epsilon(1e-15));
  CHECK(error_fraction(c, 8.0) == doctest::Approx(0.26894142136999512075).epsilon(1e-15));
  CHECK(error_fraction(c, 0.0) == doctest::Approx(0.0066928509242848555594).epsilon(1e-15));
  CHECK(error_fraction(c, 50.0) == doctest::Approx(0.99999999793884638181).epsilon(1e-15));
  CHECK(error_fraction(c, -5.0) == doctest::Approx(0.00055277863692359951608).epsilon(1e-15));
}

TEST_CASE("error_fraction midpoint identity") {
  // e^0 is exact, so f(a) must be exactly one half.
  CHECK(error_fraction({10.0, 2.0}, 10.0) == 0.5);
  CHECK(error_fraction({-3.0, 0.25}, -3.0) == 0.5);
}

TEST_CASE("error_fraction is strictly increasing with range (0,1)") {
  const SCurve c{10.0, 2.0};
  double prev = -1.0;
  for (double x = -40.0; x <= 60.0; x += 0.25) {
    const double v = error_fraction(c, x);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("error_fraction is symmetric about the midpoint") {
  const SCurve c{7.0, 1.5};
  for (double d = 0.0; d <= 20.0; d += 0.5) {
    const double lo = error_fraction(c, 7.0 - d);
    const double hi = error_fraction(c, 7.0 + d);
    CHECK(lo + hi == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("error_fraction does not overflow far in the tails") {
  const SCurve c{0.0, 1.0};
  CHECK(error_fraction(c, 800.0) == 1.0);   // saturates cleanly
  CHECK(error_fraction(c, -800.0) == 0.0);  // underflows to zero, no NaN
  CHECK(std::isfinite(error_fraction(c, 1e12)));
}

TEST_CASE("error_fraction rejects bad input") {
  CHECK_THROWS_AS(error_fraction({10.0, 0.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(error_fraction({10.0, -2.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(error_fraction({10.0, 2.0}, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(
      error_fraction({10.0, 2.0}, std::numeric_limits<double>::infinity()),
      std::invalid_argument);
}

TEST_CASE("error_fraction_slope matches pinned values and the 1/(4b) peak") {
  const SCurve c{10.0, 2.0};
  CHECK(error_fraction_slope(c, 14.0) ==
        doctest::Approx(0.052496792701753258674).epsilon(1e-15));
  CHECK(error_fraction_slope(c, 3.0) ==
        doctest::Approx(0.01422651193986777992).epsilon(1e-15));
  // s(1-s)/b at s = 1/2 is exactly 0.25/b.
  CHECK(error_fraction_slope(c, 10.0) == 0.125);
  CHECK(error_fraction_slope({4.0, 0.5}, 4.0) == 0.5);
}

TEST_CASE("error_fraction_slope agrees with central differences") {
  // Extended-precision differencing of the closed form; a plain double
  // difference loses too many digits in the tails to serve as an oracle.
  auto logistic_l = [](long double z) -> long double {
    if (z >= 0.0L) return 1.0L / (1.0L + std::exp(-z));
    const long double e = std::exp(z);
    return e / (1.0L + e);
  };
  std::mt19937_64 rng(20260817);
  std::uniform_real_distribution<double> ua(1.0, 20.0);
  std::uniform_real_distribution<double> ub(0.5, 5.0);
  std::uniform_real_distribution<double> uz(-12.0, 12.0);
  const long double h = 1e-5L;
  for (int i = 0; i < 10000; ++i) {
    const double a = ua(rng);
    const double b = ub(rng);
    const double x = a + uz(rng) * b;
    const long double zp = (static_cast<long double>(x) + h - a) / b;
    const long double zm = (static_cast<long double>(x) - h - a) / b;
    const long double fd = (logistic_l(zp) - logistic_l(zm)) / (2.0L * h);
    const double got = error_fraction_slope({a, b}, x);
    CHECK(std::abs(got - static_cast<double>(fd)) <=
          1e-6 * std::abs(static_cast<double>(fd)));
  }
}

TEST_CASE("error_fraction_slope is positive and peaks at the midpoint") {
  const SCurve c{10.0, 2.0};
  const double peak = error_fraction_slope(c, 10.0);
  for (double x = -20.0; x <= 40.0; x += 0.1) {
    const double s = error_fraction_slope(c, x);
    CHECK(s > 0.0);
    CHECK(s <= peak);
  }
}

TEST_CASE("decision_accuracy pinned values") {
  DecisionAccuracyModel m{0.9, 4, {10.0, 1.0}};
  CHECK(decision_accuracy(m, 0.0) ==
        doctest::Approx(0.89997049138534341764).epsilon(1e-15));
  CHECK(decision_accuracy(m, 10.0) == doctest::Approx(0.575).epsilon(1e-15));
  CHECK(decision_accuracy(m, 40.0) ==
        doctest::Approx(0.25000000000006082455).epsilon(1e-15));
  DecisionAccuracyModel sharp{1.0, 2, {3.0, 0.7}};
  CHECK(decision_accuracy(sharp, 0.5) ==
        doctest::Approx(0.98632660660190855986).epsilon(1e-15));
}

TEST_CASE("decision_accuracy stays inside [chance floor, discriminability]") {
  DecisionAccuracyModel m{0.8, 3, {5.0, 1.3}};
  double prev = 2.0;
  for (double tp = 0.0; tp <= 30.0; tp += 0.2) {
    const double a = decision_accuracy(m, tp);
    CHECK(a >= 1.0 / 3.0);
    CHECK(a <= 0.8);
    CHECK(a <= prev);  // non-increasing in time pressure
    prev = a;
  }
}

TEST_CASE("decision_accuracy rejects bad models") {
  CHECK_THROWS_AS(decision_accuracy({0.9, 1, {10.0, 1.0}}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(decision_accuracy({0.0, 4, {10.0, 1.0}}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(decision_accuracy({1.1, 4, {10.0, 1.0}}, 0.0), std::invalid_argument);
  // Ceiling below the chance floor makes the model meaningless.
  CHECK_THROWS_AS(decision_accuracy({0.2, 4, {10.0, 1.0}}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(decision_accuracy({0.9, 4, {10.0, 1.0}}, -1.0), std::invalid_argument);
}
