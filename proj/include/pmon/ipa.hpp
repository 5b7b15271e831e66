#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pmon/model.hpp"
#include "pmon/simulator.hpp"

namespace pmon {

/// Everything sensitivity propagation may know about the mission. The
/// growth rates are deliberately absent: gradients are computed from the
/// observed event log alone.
struct SensingModel {
  std::vector<double> points;
  std::vector<double> ranges;
  double decay = 0.0;
  double horizon = 0.0;

  static SensingModel from(const MissionConfig& config);
};

/// Position and uncertainty sensitivities with respect to every (theta, w)
/// component. Parameter layout matches Policy::flatten.
struct SensitivityState {
  std::vector<std::size_t> offsets;  // start of each agent's block
  std::vector<std::size_t> counts;   // switching points per agent
  std::vector<std::vector<double>> dsdtheta;  // [agent][xi - 1]
  std::vector<std::vector<double>> dsdw;      // [agent][xi - 1]
  std::vector<std::vector<double>> dR;        // [point][flat parameter]
  std::vector<char> boundary;                 // per point, on a boundary arc
  std::vector<double> gradient;               // dJ / d(theta, w), flattened
  double time = 0.0;
  bool valid = true;  // false when the event log had near-coincident events

  SensitivityState() = default;
  SensitivityState(std::span<const std::size_t> switching_counts, std::size_t num_points);

  std::size_t dimension() const { return gradient.size(); }
  std::size_t theta_index(std::size_t agent, std::size_t xi) const { return offsets[agent] + xi - 1; }
  std::size_t dwell_index(std::size_t agent, std::size_t xi) const {
    return offsets[agent] + counts[agent] + xi - 1;
  }
};

/// Reset of every component of dR_i when R_i reaches zero.
void apply_boundary_hit(SensitivityState& state, std::size_t point);

/// Agent comes to rest at theta_xi (incoming slope +-1).
void apply_arrival(SensitivityState& state, std::size_t agent, std::size_t xi, int incoming_slope);

/// Agent leaves theta_xi with outgoing slope +-1.
void apply_departure(SensitivityState& state, std::size_t agent, std::size_t xi, int outgoing_slope);

/// Agent stops at a mission bound: its position no longer depends on any parameter.
void apply_halt(SensitivityState& state, std::size_t agent);

/// One agent's motion over an inter-event segment.
struct AgentOnSegment {
  double start_position = 0.0;
  int slope = 0;
  int approach = 1;
  double range = 1.0;
};

/// d(dR_i)/dt = sum_n c_n(t) ds_n on a segment. For each agent this gives
/// the integral of c_n over the segment and the double integral
/// int_0^D int_0^tau c_n, which drives the cost-gradient accumulation.
struct SensitivityIncrement {
  std::vector<double> rate_integral;
  std::vector<double> cost_integral;
  bool active = false;  // any nonzero coefficient
};

SensitivityIncrement segment_sensitivity_increment(std::span<const AgentOnSegment> agents, double alpha,
                                                   double decay, double duration, bool boundary);

/// Called after each event has been applied.
using SensitivityObserver = std::function<void(const Event&, const SensitivityState&)>;

/// Walks the event log, propagating sensitivities and accumulating the
/// cost gradient over [0, T].
SensitivityState propagate(const PositionProfile& profile, const EventLog& log, const SensingModel& model,
                           const SensitivityObserver& observer = {});

/// Convenience overload; only the sensing geometry of `config` is used.
SensitivityState propagate(const Trajectory& trajectory, const MissionConfig& config,
                           const SensitivityObserver& observer = {});

}  // namespace pmon
