#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pmon/model.hpp"

namespace pmon {

struct ArmijoStep {
  double beta = 0.5;
  double gamma = 1e-4;
  double initial = 1.0;
  std::size_t max_backtracks = 40;
};

struct ConstantStep {
  double theta = 0.1;
  double dwell = 0.1;
};

struct OptimizerSettings {
  double sigma = 5.0;
  double epsilon = 2e-10;
  std::size_t max_iters = 1000;
  std::variant<ArmijoStep, ConstantStep> step = ArmijoStep{};
  std::uint64_t seed = 0;
};

/// Throws ConfigError on out-of-range settings.
void validate(const OptimizerSettings& settings);

enum class RunStatus { converged, max_iters, stalled };
std::string_view to_string(RunStatus status);

struct Iterate {
  std::size_t index = 0;
  Policy policy;
  double cost = 0.0;
  std::vector<double> gradient;
  double projected_norm = 0.0;
  double step = 0.0;  // accepted eta (0 when no step was taken)
  std::size_t backtracks = 0;
};

struct OptimizationRun {
  std::vector<Iterate> history;
  Policy final_policy;  // untrimmed, last accepted iterate
  Policy trimmed;       // first zeta_n switching points of each agent
  std::vector<std::size_t> zeta;
  RunStatus status = RunStatus::max_iters;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double final_projected_norm = 0.0;
  std::vector<std::string> warnings;
};

/// Evenly spaced centers D_n, theta alternating D_n + sigma / D_n - sigma,
/// zero dwells, Gamma_n from the ceiling formula. Out-of-bound values are
/// clipped by project; `warnings` (optional) receives a note when that happens.
Policy initialize(const MissionConfig& config, double sigma, std::vector<std::string>* warnings = nullptr);

/// Gamma_n = ceil((T - theta_{n,1} + s_n(0)) / (2 sigma)), at least 1.
std::size_t switching_budget(double horizon, double first_theta, double initial_position, double sigma);

/// Clamp to bounds and w >= 0, then a forward ordering pass. Idempotent.
Policy project(const Policy& policy, const MissionConfig& config);

/// Gradient with components that would push through an active bound,
/// nonnegativity or ordering constraint set to zero.
std::vector<double> projected_gradient(const Policy& policy, std::span<const double> gradient,
                                       const MissionConfig& config);

double norm(std::span<const double> v);

/// Cost and (when asked) IPA gradient at a policy. `iteration` lets
/// stochastic objectives draw a fresh sample per iteration.
struct Evaluation {
  double cost = 0.0;
  std::vector<double> gradient;
  bool valid = true;
};
using Objective = std::function<Evaluation(const Policy&, std::size_t iteration, bool with_gradient)>;
using CostFunction = std::function<double(const Policy&)>;

struct StepResult {
  Policy policy;
  double cost = 0.0;  // cost of the returned policy (evaluated with cost_of)
  double step = 0.0;
  std::size_t backtracks = 0;
  bool stalled = false;
};

/// One projected-gradient update. Armijo mode backtracks eta <- beta * eta
/// until J(c) <= J + gamma * g . (c - p); constant mode scales theta and w
/// components by their own fixed step.
StepResult step(const Policy& policy, double cost, std::span<const double> gradient, const MissionConfig& config,
                const OptimizerSettings& settings, const CostFunction& cost_of);

/// Deterministic objective: exact simulation plus IPA.
Objective deterministic_objective(const MissionConfig& config);

/// Generic loop over an objective.
OptimizationRun optimize(const MissionConfig& config, const OptimizerSettings& settings, const Objective& objective,
                         std::optional<Policy> start = std::nullopt);

/// Deterministic mission: initialize (or warm start), descend, trim.
OptimizationRun optimize(const MissionConfig& config, const OptimizerSettings& settings,
                         std::optional<Policy> start = std::nullopt);

/// Keep the switching points each agent reaches within (0, T].
Policy trim(const Policy& policy, const MissionConfig& config, std::vector<std::size_t>* zeta = nullptr);

}  // namespace pmon
