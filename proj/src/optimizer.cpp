#include "pmon/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmon/error.hpp"
#include "pmon/ipa.hpp"
#include "pmon/simulator.hpp"

namespace pmon {

void validate(const OptimizerSettings& s) {
  std::vector<std::string> errors;
  if (!(s.sigma > 0.0)) errors.emplace_back("optimizer.sigma must be > 0");
  if (!(s.epsilon > 0.0)) errors.emplace_back("optimizer.epsilon must be > 0");
  if (s.max_iters == 0) errors.emplace_back("optimizer.max_iters must be >= 1");
  if (const auto* a = std::get_if<ArmijoStep>(&s.step)) {
    if (!(a->beta > 0.0 && a->beta < 1.0)) errors.emplace_back("optimizer.armijo.beta must lie in (0, 1)");
    if (!(a->gamma > 0.0 && a->gamma < 1.0)) errors.emplace_back("optimizer.armijo.gamma must lie in (0, 1)");
    if (!(a->initial > 0.0)) errors.emplace_back("optimizer.armijo.initial must be > 0");
  } else {
    const auto& c = std::get<ConstantStep>(s.step);
    if (!(c.theta >= 0.0 && c.dwell >= 0.0 && c.theta + c.dwell > 0.0))
      errors.emplace_back("optimizer.constant step sizes must be >= 0 and not both zero");
  }
  if (!errors.empty()) {
    std::ostringstream os;
    os << "invalid optimizer settings:";
    for (const auto& e : errors) os << "\n  - " << e;
    throw ConfigError(os.str());
  }
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged:
      return "converged";
    case RunStatus::max_iters:
      return "max_iters";
    case RunStatus::stalled:
      return "stalled";
  }
  return "unknown";
}

std::size_t switching_budget(double horizon, double first_theta, double initial_position, double sigma) {
  const double g = std::ceil((horizon - first_theta + initial_position) / (2.0 * sigma));
  return g < 1.0 ? 1 : static_cast<std::size_t>(g);
}

Policy initialize(const MissionConfig& config, double sigma, std::vector<std::string>* warnings) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
  const std::size_t N = config.num_agents();
  const double a = config.lower;
  const double b = config.upper;
  Policy p;
  bool clipped = false;
  for (std::size_t n = 0; n < N; ++n) {
    const double D = a + static_cast<double>(2 * n + 1) * (b - a) / static_cast<double>(2 * N);
    const double hi = D + sigma;
    const double lo = D - sigma;
    clipped = clipped || hi > b || lo < a;
    const double first = std::clamp(hi, a, b);
    const std::size_t gamma =
        switching_budget(config.horizon, first, config.agents[n].initial_position, sigma);
    AgentPolicy ap;
    for (std::size_t k = 0; k < gamma; ++k) ap.theta.push_back(k % 2 == 0 ? hi : lo);
    ap.dwell.assign(gamma, 0.0);
    p.agents.push_back(std::move(ap));
  }
  if (clipped && warnings != nullptr)
    warnings->emplace_back("initial switching points D_n +- sigma clipped to the feasible bounds");
  return project(p, config);
}

Policy project(const Policy& policy, const MissionConfig& config) {
  Policy out = policy;
  for (std::size_t n = 0; n < out.agents.size(); ++n) {
    auto& ap = out.agents[n];
    double prev = n < config.num_agents() ? config.agents[n].initial_position : config.lower;
    for (std::size_t k = 0; k < ap.theta.size(); ++k) {
      double th = std::clamp(ap.theta[k], config.lower, config.upper);
      th = (k % 2 == 0) ? std::max(th, prev) : std::min(th, prev);
      ap.theta[k] = th;
      prev = th;
    }
    for (double& w : ap.dwell) w = std::max(w, 0.0);
  }
  return out;
}

std::vector<double> projected_gradient(const Policy& policy, std::span<const double> gradient,
                                       const MissionConfig& config) {
  if (gradient.size() != policy.dimension()) throw PreconditionError("gradient has wrong dimension");
  std::vector<double> out(gradient.begin(), gradient.end());
  for (std::size_t n = 0; n < policy.agents.size(); ++n) {
    const auto& ap = policy.agents[n];
    const std::size_t off = policy.offset(n);
    const std::size_t G = ap.size();
    for (std::size_t k = 0; k < G; ++k) {
      const double th = ap.theta[k];
      const double d = -gradient[off + k];  // descent direction
      const double prev = k == 0 ? config.agents[n].initial_position : ap.theta[k - 1];
      const bool odd = (k % 2) == 0;
      bool blocked = (th <= config.lower && d < 0.0) || (th >= config.upper && d > 0.0);
      // Own ordering constraint against the previous point.
      if (odd) blocked = blocked || (th <= prev && d < 0.0);
      else blocked = blocked || (th >= prev && d > 0.0);
      // Constraint of the next point against this one.
      if (k + 1 < G) {
        const double next = ap.theta[k + 1];
        if (odd) blocked = blocked || (next >= th && d < 0.0);
        else blocked = blocked || (next <= th && d > 0.0);
      }
      if (blocked) out[off + k] = 0.0;
      const double w = ap.dwell[k];
      if (w <= 0.0 && gradient[off + G + k] > 0.0) out[off + G + k] = 0.0;
    }
  }
  return out;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

namespace {

Policy move(const Policy& p, std::span<const double> g, double eta_theta, double eta_w, const MissionConfig& config) {
  std::vector<double> flat = p.flatten();
  for (std::size_t n = 0; n < p.agents.size(); ++n) {
    const std::size_t off = p.offset(n);
    const std::size_t G = p.agents[n].size();
    for (std::size_t k = 0; k < G; ++k) {
      flat[off + k] -= eta_theta * g[off + k];
      flat[off + G + k] -= eta_w * g[off + G + k];
    }
  }
  return project(p.with_values(flat), config);
}

double inner_step(std::span<const double> g, const Policy& from, const Policy& to) {
  const auto a = from.flatten();
  const auto b = to.flatten();
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += g[k] * (b[k] - a[k]);
  return s;
}

}  // namespace

StepResult step(const Policy& policy, double cost, std::span<const double> gradient, const MissionConfig& config,
                const OptimizerSettings& settings, const CostFunction& cost_of) {
  StepResult r;
  if (const auto* c = std::get_if<ConstantStep>(&settings.step)) {
    r.policy = move(policy, gradient, c->theta, c->dwell, config);
    r.cost = cost_of(r.policy);
    r.step = c->theta;
    return r;
  }
  const auto& arm = std::get<ArmijoStep>(settings.step);
  if (norm(gradient) == 0.0) {
    r.policy = policy;
    r.cost = cost;
    return r;
  }
  double eta = arm.initial;
  for (std::size_t k = 0; k <= arm.max_backtracks; ++k) {
    Policy cand = move(policy, gradient, eta, eta, config);
    const double decrease = inner_step(gradient, policy, cand);
    if (decrease < 0.0) {
      const double jc = cost_of(cand);
      if (jc <= cost + arm.gamma * decrease) {
        r.policy = std::move(cand);
        r.cost = jc;
        r.step = eta;
        r.backtracks = k;
        return r;
      }
    }
    eta *= arm.beta;
  }
  r.policy = policy;
  r.cost = cost;
  r.backtracks = arm.max_backtracks;
  r.stalled = true;
  return r;
}

Objective deterministic_objective(const MissionConfig& config) {
  return [config](const Policy& p, std::size_t, bool with_gradient) {
    NumericSettings ns;
    ns.record_uncertainty = false;
    const Trajectory tr = simulate(config, p, ns);
    if (!with_gradient) return Evaluation{tr.cost, {}, tr.log.coincidences == 0};
    const SensitivityState st = propagate(tr, config);
    return Evaluation{tr.cost, st.gradient, st.valid};
  };
}

Policy trim(const Policy& policy, const MissionConfig& config, std::vector<std::size_t>* zeta) {
  const PositionProfile prof = build_profile(config, policy);
  Policy out = policy;
  if (zeta != nullptr) zeta->clear();
  for (std::size_t n = 0; n < out.agents.size(); ++n) {
    const std::size_t z = prof.agents[n].reached;
    out.agents[n].theta.resize(z);
    out.agents[n].dwell.resize(z);
    if (zeta != nullptr) zeta->push_back(z);
  }
  return out;
}

OptimizationRun optimize(const MissionConfig& config, const OptimizerSettings& settings, const Objective& objective,
                         std::optional<Policy> start) {
  validate(settings);
  OptimizationRun run;
  Policy p = start ? project(*start, config) : initialize(config, settings.sigma, &run.warnings);
  if (start && !(p == *start)) run.warnings.emplace_back("warm-start policy was projected onto the feasible set");

  bool flagged = false;
  auto check = [&](const Evaluation& e) {
    if (!std::isfinite(e.cost)) throw NumericError("non-finite cost during optimization");
    for (double g : e.gradient)
      if (!std::isfinite(g)) throw NumericError("non-finite gradient component during optimization");
    if (!e.valid && !flagged) {
      run.warnings.emplace_back("near-coincident events encountered; some gradients are degraded");
      flagged = true;
    }
  };

  run.status = RunStatus::max_iters;
  Evaluation ev = objective(p, 0, true);
  check(ev);
  run.initial_cost = ev.cost;
  for (std::size_t l = 0;; ++l) {
    const auto pg = projected_gradient(p, ev.gradient, config);
    Iterate it;
    it.index = l;
    it.policy = p;
    it.cost = ev.cost;
    it.gradient = ev.gradient;
    it.projected_norm = norm(pg);
    if (it.projected_norm < settings.epsilon) {
      run.history.push_back(std::move(it));
      run.status = RunStatus::converged;
      break;
    }
    if (l >= settings.max_iters) {
      run.history.push_back(std::move(it));
      run.status = RunStatus::max_iters;
      break;
    }
    const std::size_t iter = l;
    const StepResult sr = step(p, ev.cost, pg, config, settings,
                               [&](const Policy& c) { return objective(c, iter, false).cost; });
    it.step = sr.step;
    it.backtracks = sr.backtracks;
    run.history.push_back(std::move(it));
    if (sr.stalled) {
      run.status = RunStatus::stalled;
      break;
    }
    p = sr.policy;
    ev = objective(p, l + 1, true);
    check(ev);
  }

  const Iterate& last = run.history.back();
  run.final_policy = last.policy;
  run.final_cost = last.cost;
  run.final_projected_norm = last.projected_norm;
  run.trimmed = trim(run.final_policy, config, &run.zeta);
  return run;
}

OptimizationRun optimize(const MissionConfig& config, const OptimizerSettings& settings, std::optional<Policy> start) {
  return optimize(config, settings, deterministic_objective(config), std::move(start));
}

}  // namespace pmon
