#pragma once

namespace echelon {

// Workload -> error-fraction trade-off curve. The midpoint sits at x = a
// (error 0.5) and b sets the width of the transition band. b must be > 0.
struct SCurve {
  double a = 10.0;  // workload offset, messages per unit time
  double b = 2.0;   // workload scale, messages per unit time
};

// Fraction of erroneous decisions at workload rate x:
//   f(x) = 1 - 1/(1 + e^((x-a)/b))
// Strictly increasing, range (0,1), f(a) = 0.5. Total for all finite x;
// non-finite x is rejected.
double error_fraction(const SCurve& curve, double x);

// df/dx. Always positive; equals 1/(4b) at x = a.
double error_fraction_slope(const SCurve& curve, double x);

// Accuracy of a single decision as a function of time pressure, bounded
// above by the discriminability of the decision and below by the chance
// floor 1/n_options.
struct DecisionAccuracyModel {
  double discriminability = 1.0;  // in (0, 1]
  int n_options = 2;              // >= 2
  SCurve pressure_curve;          // over time-pressure units
};

// floor + (ceiling - floor) * (1 - f(tp)) with floor = 1/n_options and
// ceiling = discriminability. Non-increasing in tp; rejects models whose
// ceiling sits below the chance floor.
double decision_accuracy(const DecisionAccuracyModel& model, double time_pressure);

}  // namespace echelon
