#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pmon/model.hpp"
#include "pmon/simulator.hpp"

namespace pmon {

/// Position of every agent at t computed directly from (theta, w), without
/// the simulator's segment machinery.
std::vector<double> direct_positions(const MissionConfig& config, const Policy& policy, double t);

struct DenseResult {
  double cost = 0.0;
  std::size_t steps = 0;
  std::vector<std::string> warnings;
};

/// Forward Euler on a uniform grid with R clamped at zero; J by the
/// trapezoidal rule. `rates` (optional) replaces the constant growth rates.
DenseResult dense_simulate(const MissionConfig& config, const Policy& policy, double dt,
                           const GrowthSchedule* rates = nullptr);

struct GradComponent {
  std::size_t index = 0;  // flattened position
  std::size_t agent = 0;
  bool is_theta = true;
  std::size_t xi = 0;  // 1-based
  double value = 0.0;
  double ipa = 0.0;
  double fd = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;  // abs_error / max(1, |fd|)
  bool one_sided = false;  // perturbation would leave the feasible set
  bool unreliable = false; // coincident events or h-unstable estimate
  bool excluded() const { return one_sided || unreliable; }
};

struct GradCheckReport {
  std::vector<GradComponent> components;
  double step = 0.0;
  double tolerance = 0.0;
  double max_rel_error = 0.0;  // over non-excluded components
  std::size_t worst = 0;       // index of the worst non-excluded component
  std::size_t excluded = 0;
  bool pass = false;
  bool ipa_valid = true;  // base trajectory free of near-coincident events
};

struct FiniteDifferenceSettings {
  double step = 1e-5;
  /// Relative agreement required between estimates at h and h/2.
  double stability = 1e-5;
  NumericSettings numeric{};
};

/// Central differences of the exact simulator's J. Components whose +-h
/// perturbation leaves the feasible set fall back to a one-sided difference
/// and are flagged. Returns one FD value per flattened component.
std::vector<GradComponent> finite_difference_gradient(const MissionConfig& config, const Policy& policy,
                                                      const FiniteDifferenceSettings& settings = {});

/// IPA against finite differences.
GradCheckReport gradient_check(const MissionConfig& config, const Policy& policy, double tolerance = 1e-4,
                               const FiniteDifferenceSettings& settings = {});

}  // namespace pmon
