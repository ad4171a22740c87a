#include "echelon/dyad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "echelon/parallel.hpp"

namespace echelon {

namespace {

void check_model(const DyadModel& model) {
  if (!(model.confusion_gain >= 0.0)) {
    throw std::invalid_argument("DyadModel: confusion_gain must be >= 0");
  }
  if (!(model.saturation_ceiling > 0.0)) {
    throw std::invalid_argument("DyadModel: saturation_ceiling must be > 0");
  }
}

double clamp_rate(double v, double ceiling) {
  return std::clamp(v, 0.0, ceiling);
}

// Equilibrium defect g(x) = x*(1 - K*f(x)) - u. Roots are equilibria.
double equilibrium_defect(const DyadModel& model, double x, double order_rate) {
  const double f = error_fraction(model.curve, x);
  return x * (1.0 - model.confusion_gain * f) - order_rate;
}

}  // namespace

DyadState dyad_step(const DyadModel& model, const DyadState& state, double order_rate) {
  check_model(model);
  if (!(order_rate >= 0.0) || !std::isfinite(order_rate)) {
    throw std::invalid_argument("dyad_step: order_rate must be finite and >= 0");
  }
  const double x1 = state.command_rate;
  const double x2 = state.request_rate;
  const double f = error_fraction(model.curve, x1);
  DyadState next;
  next.command_rate = clamp_rate(x2 + order_rate, model.saturation_ceiling);
  next.request_rate = clamp_rate(x1 * model.confusion_gain * f, model.saturation_ceiling);
  return next;
}

static DyadTrajectory simulate_impl(const DyadModel& model, DyadState initial,
                                    int horizon,
                                    const std::vector<double>& order_rates) {
  if (horizon < 1) {
    throw std::invalid_argument("simulate_dyad: horizon must be >= 1");
  }
  DyadTrajectory out;
  out.states.reserve(static_cast<std::size_t>(horizon) + 1);
  out.states.push_back(initial);
  for (int k = 0; k < horizon; ++k) {
    const DyadState next = dyad_step(model, out.states.back(), order_rates[static_cast<std::size_t>(k)]);
    if (!out.first_saturation_step &&
        (next.command_rate >= model.saturation_ceiling ||
         next.request_rate >= model.saturation_ceiling)) {
      out.first_saturation_step = k + 1;
    }
    out.states.push_back(next);
  }
  return out;
}

DyadTrajectory simulate_dyad(const DyadModel& model, DyadState initial, int horizon,
                             double order_rate) {
  std::vector<double> rates(static_cast<std::size_t>(std::max(horizon, 0)), order_rate);
  return simulate_impl(model, initial, horizon, rates);
}

DyadTrajectory simulate_dyad(const DyadModel& model, DyadState initial, int horizon,
                             std::span<const double> order_rates) {
  if (order_rates.size() < static_cast<std::size_t>(horizon)) {
    throw std::invalid_argument("simulate_dyad: order_rates shorter than horizon");
  }
  return simulate_impl(model, initial, horizon,
                       std::vector<double>(order_rates.begin(), order_rates.end()));
}

double default_equilibrium_search_upper(const DyadModel& model, double order_rate) {
  return 10.0 * (model.curve.a + order_rate * (1.0 + model.confusion_gain));
}

std::vector<Equilibrium> equilibria(const DyadModel& model, double order_rate,
                                    double lo, double hi, int grid_points) {
  check_model(model);
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || hi <= lo) {
    throw std::invalid_argument("equilibria: need finite 0 <= lo < hi");
  }
  if (grid_points < 2) {
    throw std::invalid_argument("equilibria: grid_points must be >= 2");
  }

  std::vector<Equilibrium> roots;
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  double x_prev = lo;
  double g_prev = equilibrium_defect(model, x_prev, order_rate);
  for (int i = 1; i < grid_points; ++i) {
    const double x = lo + step * static_cast<double>(i);
    const double g = equilibrium_defect(model, x, order_rate);
    if (g_prev == 0.0 || g_prev * g < 0.0) {
      // Bisect [x_prev, x] down to machine resolution.
      double a = x_prev, b = x, ga = g_prev;
      if (ga == 0.0) {
        b = a;
      }
      while (b - a > 0.0) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double gm = equilibrium_defect(model, mid, order_rate);
        if (gm == 0.0) {
          a = b = mid;
          break;
        }
        if (ga * gm < 0.0) {
          b = mid;
        } else {
          a = mid;
          ga = gm;
        }
      }
      const double x_root = 0.5 * (a + b);
      Equilibrium eq;
      eq.command_rate = x_root;
      eq.request_rate = x_root * model.confusion_gain * error_fraction(model.curve, x_root);
      eq.residual = std::abs(equilibrium_defect(model, x_root, order_rate));
      roots.push_back(eq);
    }
    x_prev = x;
    g_prev = g;
  }
  return roots;
}

std::vector<Equilibrium> equilibria(const DyadModel& model, double order_rate) {
  return equilibria(model, order_rate, 0.0,
                    default_equilibrium_search_upper(model, order_rate));
}

double spectral_radius_at(const DyadModel& model, double x1_bar) {
  const double f = error_fraction(model.curve, x1_bar);
  const double fp = error_fraction_slope(model.curve, x1_bar);
  return std::sqrt(std::abs(model.confusion_gain * (f + x1_bar * fp)));
}

DyadStabilityGrid stability_region_sweep(const SCurve& curve,
                                         std::span<const double> k_grid,
                                         std::span<const double> u_grid,
                                         double saturation_ceiling,
                                         const DyadSweepConfig& config,
                                         unsigned workers) {
  if (k_grid.empty() || u_grid.empty()) {
    throw std::invalid_argument("stability_region_sweep: grids must be nonempty");
  }
  if (!std::is_sorted(k_grid.begin(), k_grid.end()) ||
      !std::is_sorted(u_grid.begin(), u_grid.end())) {
    throw std::invalid_argument("stability_region_sweep: grids must be ascending");
  }

  DyadStabilityGrid grid;
  grid.k_values.assign(k_grid.begin(), k_grid.end());
  grid.u_values.assign(u_grid.begin(), u_grid.end());
  grid.cells.resize(k_grid.size() * u_grid.size());

  const StabilityCriterion criterion{saturation_ceiling, config.growth_factor};

  parallel_for(grid.cells.size(), workers, [&](std::size_t idx) {
    const std::size_t ik = idx / u_grid.size();
    const std::size_t iu = idx % u_grid.size();
    DyadModel model{curve, k_grid[ik], saturation_ceiling};
    DyadSweepCell cell;
    cell.confusion_gain = k_grid[ik];
    cell.order_rate = u_grid[iu];

    const DyadTrajectory traj =
        simulate_dyad(model, DyadState{}, config.horizon, u_grid[iu]);
    std::vector<double> peaks;
    peaks.reserve(traj.states.size());
    for (const DyadState& s : traj.states) {
      peaks.push_back(std::max(s.command_rate, s.request_rate));
    }
    cell.cls = classify_peak_series(peaks, traj.first_saturation_step, criterion);

    if (cell.cls == Stability::stable) {
      const double settled = traj.states.back().command_rate;
      const auto roots = equilibria(model, u_grid[iu]);
      if (!roots.empty()) {
        // Annotate with the root the trajectory settled nearest to.
        const Equilibrium* best = &roots.front();
        for (const Equilibrium& r : roots) {
          if (std::abs(r.command_rate - settled) <
              std::abs(best->command_rate - settled)) {
            best = &r;
          }
        }
        cell.has_equilibrium = true;
        cell.x1_bar = best->command_rate;
        cell.error_fraction_at_eq = error_fraction(curve, best->command_rate);
        cell.spectral_radius = spectral_radius_at(model, best->command_rate);
      }
    }
    grid.cells[idx] = cell;
  });

  // Mark the first crossing of the 20% / 80% equilibrium-error levels
  // along the u axis within each K row.
  const std::size_t nu = u_grid.size();
  for (std::size_t ik = 0; ik < k_grid.size(); ++ik) {
    bool seen20 = false, seen80 = false;
    for (std::size_t iu = 0; iu < nu; ++iu) {
      DyadSweepCell& cell = grid.cells[ik * nu + iu];
      if (cell.cls != Stability::stable || !cell.has_equilibrium) continue;
      if (!seen20 && cell.error_fraction_at_eq >= 0.2) {
        cell.contour20 = true;
        seen20 = true;
      }
      if (!seen80 && cell.error_fraction_at_eq >= 0.8) {
        cell.contour80 = true;
        seen80 = true;
      }
    }
  }
  return grid;
}

}  // namespace echelon
