#include "pmon/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "pmon/error.hpp"
#include "pmon/ipa.hpp"

namespace pmon {

namespace {

// Corner points (time, position) of one agent's path; linear in between,
// constant after the last one.
struct Path {
  std::vector<double> times;
  std::vector<double> positions;
};

Path corners(const MissionConfig& config, std::size_t n, const AgentPolicy& ap) {
  Path path;
  double t = 0.0;
  double s = config.agents[n].initial_position;
  path.times.push_back(t);
  path.positions.push_back(s);
  for (std::size_t k = 0; k < ap.size(); ++k) {
    t += std::abs(ap.theta[k] - s);
    s = ap.theta[k];
    path.times.push_back(t);
    path.positions.push_back(s);
    t += ap.dwell[k];
    path.times.push_back(t);
    path.positions.push_back(s);
  }
  const double bound = ap.size() % 2 == 0 ? config.upper : config.lower;
  t += std::abs(bound - s);
  path.times.push_back(t);
  path.positions.push_back(bound);
  return path;
}

class Walker {
 public:
  explicit Walker(Path p) : path_(std::move(p)) {}

  // Non-decreasing t across calls.
  double at(double t) {
    const auto& T = path_.times;
    while (k_ + 1 < T.size() && T[k_ + 1] <= t) ++k_;
    if (k_ + 1 >= T.size()) return path_.positions.back();
    const double span = T[k_ + 1] - T[k_];
    if (span <= 0.0) return path_.positions[k_ + 1];
    const double f = (t - T[k_]) / span;
    return path_.positions[k_] + f * (path_.positions[k_ + 1] - path_.positions[k_]);
  }

 private:
  Path path_;
  std::size_t k_ = 0;
};

}  // namespace

std::vector<double> direct_positions(const MissionConfig& config, const Policy& policy, double t) {
  std::vector<double> out;
  for (std::size_t n = 0; n < config.num_agents(); ++n) out.push_back(Walker(corners(config, n, policy.agents[n])).at(t));
  return out;
}

DenseResult dense_simulate(const MissionConfig& config, const Policy& policy, double dt, const GrowthSchedule* rates) {
  if (!(dt > 0.0)) throw PreconditionError("dense_simulate needs dt > 0");
  validate(config);
  if (!is_feasible(policy, config)) throw PreconditionError("dense_simulate needs a feasible policy");
  DenseResult out;
  const double T = config.horizon;
  if (dt > T) out.warnings.emplace_back("dt exceeds the horizon; a single Euler step is taken");

  const std::size_t N = config.num_agents();
  const std::size_t M = config.num_points();
  const auto ranges = config.ranges();
  std::vector<Walker> walkers;
  for (std::size_t n = 0; n < N; ++n) walkers.emplace_back(corners(config, n, policy.agents[n]));

  std::vector<double> R = config.initial_uncertainty;
  std::vector<double> s(N);
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  double total = 0.0;
  double sum_prev = 0.0;
  for (double v : R) sum_prev += v;

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double h = std::min(dt, T - t);
    for (std::size_t n = 0; n < N; ++n) s[n] = walkers[n].at(t);
    double sum = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      const double A = rates != nullptr ? rates->rate(i, t) : config.growth[i];
      const double P = joint_detection(config.points[i], s, ranges);
      R[i] = std::max(0.0, R[i] + h * (A - config.decay * P));
      sum += R[i];
    }
    total += 0.5 * h * (sum_prev + sum);
    sum_prev = sum;
  }
  out.steps = steps;
  out.cost = total / T;
  return out;
}

std::vector<GradComponent> finite_difference_gradient(const MissionConfig& config, const Policy& policy,
                                                      const FiniteDifferenceSettings& settings) {
  const double h = settings.step;
  if (!(h > 0.0)) throw PreconditionError("finite-difference step must be > 0");
  const std::vector<double> base = policy.flatten();
  NumericSettings ns = settings.numeric;
  ns.record_uncertainty = false;

  struct Sample {
    double cost;
    bool clean;
  };
  auto eval = [&](std::size_t k, double delta) -> std::optional<Sample> {
    std::vector<double> v = base;
    v[k] += delta;
    const Policy p = policy.with_values(v);
    if (!is_feasible(p, config)) return std::nullopt;
    const Trajectory tr = simulate(config, p, ns);
    return Sample{tr.cost, tr.log.coincidences == 0};
  };

  const bool base_clean = base.empty() || eval(0, 0.0)->clean;
  std::vector<GradComponent> out;
  for (std::size_t n = 0; n < policy.agents.size(); ++n) {
    const std::size_t off = policy.offset(n);
    const std::size_t G = policy.agents[n].size();
    for (std::size_t j = 0; j < 2 * G; ++j) {
      GradComponent c;
      c.index = off + j;
      c.agent = n;
      c.is_theta = j < G;
      c.xi = (j % G) + 1;
      c.value = base[c.index];

      auto estimate = [&](double step, bool& one_sided, bool& clean) -> std::optional<double> {
        const auto plus = eval(c.index, step);
        const auto minus = eval(c.index, -step);
        one_sided = !(plus && minus);
        if (plus && minus) {
          clean = plus->clean && minus->clean;
          return (plus->cost - minus->cost) / (2.0 * step);
        }
        const auto mid = eval(c.index, 0.0);
        if (plus) {
          clean = plus->clean && mid->clean;
          return (plus->cost - mid->cost) / step;
        }
        if (minus) {
          clean = minus->clean && mid->clean;
          return (mid->cost - minus->cost) / step;
        }
        return std::nullopt;
      };

      bool os1 = false, os2 = false, cl1 = true, cl2 = true;
      const auto f1 = estimate(h, os1, cl1);
      const auto f2 = estimate(0.5 * h, os2, cl2);
      c.one_sided = os1 || os2;
      if (!f1 || !f2) {
        c.unreliable = true;
      } else {
        c.fd = *f1;
        const double drift = std::abs(*f1 - *f2) / std::max(1.0, std::abs(*f1));
        c.unreliable = !base_clean || !cl1 || !cl2 || drift > settings.stability;
      }
      out.push_back(c);
    }
  }
  return out;
}

GradCheckReport gradient_check(const MissionConfig& config, const Policy& policy, double tolerance,
                               const FiniteDifferenceSettings& settings) {
  GradCheckReport rep;
  rep.step = settings.step;
  rep.tolerance = tolerance;
  NumericSettings ns = settings.numeric;
  ns.record_uncertainty = false;
  const Trajectory tr = simulate(config, policy, ns);
  const SensitivityState st = propagate(tr, config);
  rep.ipa_valid = st.valid;
  rep.components = finite_difference_gradient(config, policy, settings);
  rep.pass = true;
  for (auto& c : rep.components) {
    c.ipa = st.gradient[c.index];
    c.abs_error = std::abs(c.ipa - c.fd);
    c.rel_error = c.abs_error / std::max(1.0, std::abs(c.fd));
    if (c.excluded()) {
      ++rep.excluded;
      continue;
    }
    if (c.rel_error >= rep.max_rel_error) {
      rep.max_rel_error = c.rel_error;
      rep.worst = c.index;
    }
    if (!(c.rel_error < tolerance)) rep.pass = false;
  }
  return rep;
}

}  // namespace pmon
