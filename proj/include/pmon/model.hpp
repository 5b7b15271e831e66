#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pmon {

struct AgentSpec {
  double range = 4.0;             // sensing range r_n
  double initial_position = 0.0;  // s_n(0)
};

/// Static description of a 1-D persistent monitoring mission.
struct MissionConfig {
  double length = 20.0;  // mission space [0, length]
  double lower = 0.0;    // feasible bounds [lower, upper] for agent positions
  double upper = 20.0;
  std::vector<double> points;               // sampling points, ascending
  std::vector<double> growth;               // per-point uncertainty growth rate
  double decay = 3.0;                       // sensing decay rate B
  std::vector<AgentSpec> agents;
  std::vector<double> initial_uncertainty;  // R_i(0)
  double horizon = 400.0;
  bool no_crossing = false;

  std::size_t num_points() const { return points.size(); }
  std::size_t num_agents() const { return agents.size(); }
  std::vector<double> ranges() const;
};

/// Throws ConfigError listing every violated field. Returns non-fatal
/// warnings (e.g. sampling points no agent can ever sense).
std::vector<std::string> validate(const MissionConfig& config);

/// Centers of M equal cells of [0, length].
std::vector<double> partition_centers(double length, std::size_t count);
/// M points evenly spaced over [0, length], both endpoints included.
std::vector<double> evenly_spaced(double length, std::size_t count);

/// Switching locations and dwell times of one agent.
struct AgentPolicy {
  std::vector<double> theta;
  std::vector<double> dwell;

  std::size_t size() const { return theta.size(); }

  friend bool operator==(const AgentPolicy&, const AgentPolicy&) = default;
};

/// Decision variable: one (theta, dwell) pair per agent.
/// Flattened order is agent-major, all theta of an agent then all its dwells.
struct Policy {
  std::vector<AgentPolicy> agents;

  std::size_t dimension() const;
  std::vector<double> flatten() const;
  /// Same shape as this policy, values taken from flat.
  Policy with_values(std::span<const double> flat) const;
  /// Offset of agent n's block in the flattened vector.
  std::size_t offset(std::size_t agent) const;

  friend bool operator==(const Policy&, const Policy&) = default;
};

/// True if policy has matching dwell/theta sizes, bounds, and the
/// alternating order constraint (odd index moves up, even moves down).
bool is_feasible(const Policy& policy, const MissionConfig& config, double tol = 0.0);

/// Linear-decay detection probability of an event at x by an agent at s.
double sensing_probability(double x, double s, double range);

/// dp/ds of the linear sensing model for an agent at s. Exactly at a kink
/// (s == alpha or |alpha - s| == range) the one-sided derivative on the side
/// the agent approached from is used: approach = +1 means from below.
double sensing_gradient(double alpha, double s, double range, int approach);

/// Probability that at least one agent detects an event at alpha.
double joint_detection(double alpha, std::span<const double> positions, std::span<const double> ranges);

/// Right-hand side of the uncertainty dynamics. The boundary branch uses
/// exact equality on R.
double uncertainty_rate(double R, double growth, double decay, double detection);

}  // namespace pmon
