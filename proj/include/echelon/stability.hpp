#pragma once

#include <optional>
#include <span>

namespace echelon {

enum class Stability { stable, unstable };

// Empirical instability test shared by the dyad and network simulations.
// A run is unstable when any rate reached the saturation ceiling, or when
// the peak rate kept growing by more than growth_factor over the last
// quarter of the horizon.
struct StabilityCriterion {
  double saturation_ceiling = 1e6;
  double growth_factor = 10.0;
};

// peak_series[k] is the largest rate anywhere in the system at step k.
Stability classify_peak_series(std::span<const double> peak_series,
                               std::optional<int> first_saturation_step,
                               const StabilityCriterion& criterion);

}  // namespace echelon
