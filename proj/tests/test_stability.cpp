#include <doctest.h>

#include <vector>

#include "echelon/stability.hpp"

using namespace echelon;

TEST_CASE("saturation always classifies unstable") {
  const std::vector<double> flat(100, 1.0);
  CHECK(classify_peak_series(flat, 3, {1e6, 10.0}) == Stability::unstable);
  CHECK(classify_peak_series(flat, std::nullopt, {1e6, 10.0}) == Stability::stable);
}

TEST_CASE("growth over the last quarter flags instability") {
  // Peak grows 20x between three-quarters point and the end.
  std::vector<double> growing;
  for (int i = 0; i <= 100; ++i) growing.push_back(1.0 + 0.0001 * i);
  growing[75] = 1.0;
  growing[100] = 20.0;
  CHECK(classify_peak_series(growing, std::nullopt, {1e6, 10.0}) == Stability::unstable);
  growing[100] = 9.0;  // below the factor
  CHECK(classify_peak_series(growing, std::nullopt, {1e6, 10.0}) == Stability::stable);
}

TEST_CASE("settled series is stable regardless of early transient") {
  std::vector<double> series;
  for (int i = 0; i < 50; ++i) series.push_back(100.0 - i);  // decaying transient
  for (int i = 0; i < 150; ++i) series.push_back(50.0);
  CHECK(classify_peak_series(series, std::nullopt, {1e6, 10.0}) == Stability::stable);
}

TEST_CASE("a system leaving rest is not declared stable by zero division") {
  std::vector<double> series(200, 0.0);
  series[199] = 5.0;  // silent until the very end
  CHECK(classify_peak_series(series, std::nullopt, {1e6, 10.0}) == Stability::unstable);
  CHECK(classify_peak_series(std::vector<double>(200, 0.0), std::nullopt, {1e6, 10.0}) ==
        Stability::stable);
}

TEST_CASE("short series default to stable without saturation") {
  const std::vector<double> tiny{0.0, 5.0, 100.0};
  CHECK(classify_peak_series(tiny, std::nullopt, {1e6, 10.0}) == Stability::stable);
  CHECK(classify_peak_series(tiny, 1, {1e6, 10.0}) == Stability::unstable);
}
