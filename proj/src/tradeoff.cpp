#include "echelon/tradeoff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace echelon {

namespace {

void check_curve(const SCurve& curve) {
  if (!(curve.b > 0.0) || !std::isfinite(curve.a) || !std::isfinite(curve.b)) {
    throw std::invalid_argument("SCurve: b must be finite and > 0, a finite");
  }
}

// Numerically stable logistic; never forms e^z for large positive z.
double logistic(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

}  // namespace

double error_fraction(const SCurve& curve, double x) {
  check_curve(curve);
  if (!std::isfinite(x)) {
    throw std::invalid_argument("error_fraction: x must be finite");
  }
  // 1 - 1/(1+e^((x-a)/b)) == logistic((x-a)/b)
  return logistic((x - curve.a) / curve.b);
}

double error_fraction_slope(const SCurve& curve, double x) {
  // e^z / (b*(1+e^z)^2) == s(1-s)/b with s = logistic(z)
  const double s = error_fraction(curve, x);
  return s * (1.0 - s) / curve.b;
}

double decision_accuracy(const DecisionAccuracyModel& model, double time_pressure) {
  if (!(model.n_options >= 2)) {
    throw std::invalid_argument("decision_accuracy: n_options must be >= 2");
  }
  if (!(model.discriminability > 0.0) || model.discriminability > 1.0) {
    throw std::invalid_argument("decision_accuracy: discriminability must be in (0,1]");
  }
  const double floor = 1.0 / static_cast<double>(model.n_options);
  const double ceiling = model.discriminability;
  if (ceiling < floor) {
    throw std::invalid_argument(
        "decision_accuracy: discriminability " + std::to_string(ceiling) +
        " is below the chance floor 1/" + std::to_string(model.n_options));
  }
  if (!(time_pressure >= 0.0)) {
    throw std::invalid_argument("decision_accuracy: time_pressure must be >= 0");
  }
  const double f = error_fraction(model.pressure_curve, time_pressure);
  return floor + (ceiling - floor) * (1.0 - f);
}

}  // namespace echelon
