#pragma once

#include <optional>
#include <span>
#include <vector>

#include "echelon/stability.hpp"
#include "echelon/tradeoff.hpp"

namespace echelon {

// Two-layer command/field loop. The command layer turns incoming requests
// plus exogenous orders into commands; the field layer turns erroneous
// commands into new requests, scaled by the confusion gain.
struct DyadModel {
  SCurve curve;
  double confusion_gain = 0.0;       // K, >= 0
  double saturation_ceiling = 1e6;   // rates are clamped to [0, ceiling]
};

struct DyadState {
  double command_rate = 0.0;  // x1
  double request_rate = 0.0;  // x2
};

// One synchronous update:
//   x1' = x2 + u        (commands issued next step)
//   x2' = x1 * K * f(x1)  (requests spawned by erroneous commands)
// both clamped to [0, ceiling].
DyadState dyad_step(const DyadModel& model, const DyadState& state, double order_rate);

struct DyadTrajectory {
  std::vector<DyadState> states;  // states[0] == initial, size horizon+1
  std::optional<int> first_saturation_step;
  bool saturated() const { return first_saturation_step.has_value(); }
};

DyadTrajectory simulate_dyad(const DyadModel& model, DyadState initial, int horizon,
                             double order_rate);
DyadTrajectory simulate_dyad(const DyadModel& model, DyadState initial, int horizon,
                             std::span<const double> order_rates);

struct Equilibrium {
  double command_rate = 0.0;  // x1_bar
  double request_rate = 0.0;  // x2_bar = x1_bar * K * f(x1_bar)
  double residual = 0.0;      // |u - x1_bar*(1 - K*f(x1_bar))|
};

// Roots of u = x1*(1 - K*f(x1)) inside [lo, hi], found by sign-change
// bracketing on a uniform grid followed by bisection, ascending in x1.
// An empty result means no sign change in the interval.
std::vector<Equilibrium> equilibria(const DyadModel& model, double order_rate,
                                    double lo, double hi, int grid_points = 4096);

// Same, over the default interval [0, 10*(a + u*(1+K))].
std::vector<Equilibrium> equilibria(const DyadModel& model, double order_rate);

double default_equilibrium_search_upper(const DyadModel& model, double order_rate);

// Spectral radius of the step map's Jacobian [[0,1],[K*(x f(x))', 0]] at
// x1_bar: sqrt(|K*(f + x1*f')|). The equilibrium is locally stable iff < 1.
double spectral_radius_at(const DyadModel& model, double x1_bar);

struct DyadSweepCell {
  double confusion_gain = 0.0;
  double order_rate = 0.0;
  Stability cls = Stability::stable;
  // Populated for stable cells only.
  double x1_bar = 0.0;
  double error_fraction_at_eq = 0.0;
  double spectral_radius = 0.0;
  bool has_equilibrium = false;
  // First cell along the u axis whose equilibrium error fraction crosses
  // the 20% / 80% level within its K row.
  bool contour20 = false;
  bool contour80 = false;
};

struct DyadSweepConfig {
  int horizon = 2000;
  double growth_factor = 10.0;
};

struct DyadStabilityGrid {
  std::vector<double> k_values;
  std::vector<double> u_values;
  std::vector<DyadSweepCell> cells;  // k-major: cells[ik * u_count + iu]

  const DyadSweepCell& at(std::size_t ik, std::size_t iu) const {
    return cells[ik * u_values.size() + iu];
  }
};

// Classifies every (K, u) cell by simulation from rest with saturation
// detection and annotates stable cells with the equilibrium reached.
DyadStabilityGrid stability_region_sweep(const SCurve& curve,
                                         std::span<const double> k_grid,
                                         std::span<const double> u_grid,
                                         double saturation_ceiling = 1e6,
                                         const DyadSweepConfig& config = {},
                                         unsigned workers = 1);

}  // namespace echelon
