#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmon/model.hpp"
#include "pmon/polynomial.hpp"

namespace pmon {

/// Tolerances shared by the simulator and its consumers.
struct NumericSettings {
  /// Events closer than this (time units) count as coincident.
  double time_tolerance = 1e-9;
  /// Keep the per-point uncertainty polynomials. Cost and event log are
  /// produced either way; exports and stability diagnostics need them.
  bool record_uncertainty = true;
};

inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// Constant-slope piece of one agent's motion.
struct MotionSegment {
  double start = 0.0;
  double end = 0.0;
  double origin = 0.0;  // position at `start`
  int slope = 0;        // +1, -1 or 0
  int approach = 1;     // for dwells: direction of the leg that led here

  double position_at(double t) const { return origin + slope * (t - start); }
};

struct AgentProfile {
  std::vector<MotionSegment> segments;  // tile [0, T], zero-length pieces omitted
  std::vector<double> arrivals;         // per switching index, kNever if unreached
  std::vector<double> departures;       // per switching index, kNever if still dwelling at T
  std::size_t reached = 0;              // number of switching points reached within (0, T]
  double halt = kNever;                 // time the agent stops at a bound after its last switch

  double position(double t) const;
  int slope(double t) const;
  std::size_t switching_count() const { return arrivals.size(); }
};

struct PositionProfile {
  std::vector<AgentProfile> agents;
  double horizon = 0.0;
};

/// Piecewise-linear motion: full speed toward each switching point in
/// turn (initial direction +1), dwell, reverse. After the last switching
/// point the agent keeps moving until it meets a bound and stays there.
PositionProfile build_profile(const MissionConfig& config, const Policy& policy);

enum class EventClass {
  RateJump,      // exogenous change of a growth rate (stochastic runs)
  Kink,          // agent crosses alpha_i - r, alpha_i or alpha_i + r
  Arrival,       // agent comes to rest at a switching point
  Departure,     // agent leaves a switching point
  Halt,          // agent stops at a bound after its last switching point
  BoundaryExit,  // R_i leaves zero
  BoundaryHit,   // R_i reaches zero
};

std::string_view to_string(EventClass kind);

struct Event {
  double time = 0.0;
  EventClass kind = EventClass::Kink;
  int agent = -1;     // 0-based, motion and kink events
  int point = -1;     // 0-based, kink, boundary and rate events
  int index = -1;     // switching index (1-based) for motion; 0/1/2 = alpha-r/alpha/alpha+r for kinks
  int slope = 0;      // incoming slope for Arrival/Halt, outgoing slope for Departure
  int sequence = 0;   // per-agent order of motion events
};

/// Sorted union of motion event times, kink crossing times, {0, T}.
std::vector<double> segment_breakpoints(const PositionProfile& profile, const MissionConfig& config);

/// Kink crossings of every moving segment, in time order.
std::vector<Event> kink_events(const PositionProfile& profile, const MissionConfig& config);

/// Motion events (arrivals, departures, halts) of every agent.
std::vector<Event> motion_events(const PositionProfile& profile);

/// Piecewise-constant growth rates. Point i holds values[i][k] on
/// [jumps[i][k-1], jumps[i][k]) with jumps[i][-1] = 0.
struct GrowthSchedule {
  std::vector<std::vector<double>> jumps;
  std::vector<std::vector<double>> values;

  static GrowthSchedule constant(const std::vector<double>& rates);
  double rate(std::size_t point, double t) const;
};

/// Uncertainty of one point on [start, end]; polynomials are in t - origin.
struct UncertaintyPiece {
  double start = 0.0;
  double end = 0.0;
  double origin = 0.0;
  Polynomial value;      // R_i
  Polynomial detection;  // P_i
  double growth = 0.0;   // A_i on this piece
  bool boundary = false; // held at zero

  double at(double t) const { return value(t - origin); }
};

/// Event log in the form consumed by sensitivity propagation. Carries no
/// growth-rate information.
struct EventLog {
  std::vector<Event> events;           // time order, coincident ties in fixed class order
  std::vector<char> initial_boundary;  // per point, R_i(0) = 0 on a boundary arc
  std::size_t coincidences = 0;        // validity-degrading near-coincident events
};

struct Trajectory {
  PositionProfile profile;
  EventLog log;
  std::vector<std::vector<UncertaintyPiece>> uncertainty;  // per point, empty unless recorded
  std::vector<double> integrals;  // per point, integral of R_i over [0, T]
  std::vector<double> final_uncertainty;
  double cost = 0.0;
  double horizon = 0.0;
  double decay = 0.0;
  std::vector<std::string> warnings;

  /// R_i(t) from the recorded pieces.
  double uncertainty_at(std::size_t point, double t) const;
};

Trajectory simulate(const MissionConfig& config, const Policy& policy, const NumericSettings& settings = {});

/// Same as simulate with the growth rates replaced by a schedule; its jump
/// times become breakpoints and RateJump events.
Trajectory simulate(const MissionConfig& config, const Policy& policy, const GrowthSchedule& rates,
                    const NumericSettings& settings = {});

/// J = (1/T) sum_i integral R_i.
double cost(const Trajectory& trajectory);

struct PointStability {
  double max = 0.0;
  double min = 0.0;
  double mean = 0.0;
  bool emptied = false;
  double growth_integral = 0.0;   // integral of A_i
  double sensing_integral = 0.0;  // integral of B P_i
  bool stable = false;            // growth_integral < sensing_integral
};

/// Per-point diagnostics; needs recorded uncertainty.
std::vector<PointStability> stability_report(const Trajectory& trajectory);

}  // namespace pmon
