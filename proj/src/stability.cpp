#include "echelon/stability.hpp"

namespace echelon {

Stability classify_peak_series(std::span<const double> peak_series,
                               std::optional<int> first_saturation_step,
                               const StabilityCriterion& criterion) {
  if (first_saturation_step.has_value()) {
    return Stability::unstable;
  }
  if (peak_series.size() < 4) {
    return Stability::stable;
  }
  const std::size_t last = peak_series.size() - 1;
  const std::size_t quarter_ago = last - last / 4;
  const double then = peak_series[quarter_ago];
  const double now = peak_series[last];
  if (then <= 0.0) {
    return now > 0.0 ? Stability::unstable : Stability::stable;
  }
  return (now / then > criterion.growth_factor) ? Stability::unstable
                                                : Stability::stable;
}

}  // namespace echelon
