#include "pmon/ipa.hpp"

#include <algorithm>
#include <cmath>

#include "pmon/error.hpp"

namespace pmon {

SensingModel SensingModel::from(const MissionConfig& config) {
  return {config.points, config.ranges(), config.decay, config.horizon};
}

SensitivityState::SensitivityState(std::span<const std::size_t> switching_counts, std::size_t num_points) {
  std::size_t off = 0;
  for (std::size_t c : switching_counts) {
    offsets.push_back(off);
    counts.push_back(c);
    dsdtheta.emplace_back(c, 0.0);
    dsdw.emplace_back(c, 0.0);
    off += 2 * c;
  }
  dR.assign(num_points, std::vector<double>(off, 0.0));
  boundary.assign(num_points, 0);
  gradient.assign(off, 0.0);
}

void apply_boundary_hit(SensitivityState& state, std::size_t point) {
  std::fill(state.dR.at(point).begin(), state.dR[point].end(), 0.0);
}

void apply_arrival(SensitivityState& state, std::size_t agent, std::size_t xi, int incoming_slope) {
  if (incoming_slope == 0) throw PreconditionError("arrival must come from motion");
  auto& th = state.dsdtheta.at(agent);
  auto& w = state.dsdw.at(agent);
  if (xi == 0 || xi > th.size()) throw PreconditionError("switching index out of range");
  std::fill(th.begin(), th.end(), 0.0);
  th[xi - 1] = 1.0;
  std::fill(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(xi), 0.0);
}

void apply_departure(SensitivityState& state, std::size_t agent, std::size_t xi, int outgoing_slope) {
  if (outgoing_slope != 1 && outgoing_slope != -1) throw PreconditionError("departure needs slope +-1");
  auto& th = state.dsdtheta.at(agent);
  auto& w = state.dsdw.at(agent);
  if (xi == 0 || xi > th.size()) throw PreconditionError("switching index out of range");
  th[xi - 1] += 1.0;
  for (std::size_t j = 1; j < xi; ++j) {
    const bool even = (j % 2) == 0;
    const bool up = (outgoing_slope == 1) == even;
    th[j - 1] += up ? 2.0 : -2.0;
  }
  for (std::size_t j = 1; j <= xi; ++j) w[j - 1] = -static_cast<double>(outgoing_slope);
}

void apply_halt(SensitivityState& state, std::size_t agent) {
  std::fill(state.dsdtheta.at(agent).begin(), state.dsdtheta[agent].end(), 0.0);
  std::fill(state.dsdw.at(agent).begin(), state.dsdw[agent].end(), 0.0);
}

SensitivityIncrement segment_sensitivity_increment(std::span<const AgentOnSegment> agents, double alpha,
                                                   double decay, double duration, bool boundary) {
  const std::size_t N = agents.size();
  SensitivityIncrement out;
  out.rate_integral.assign(N, 0.0);
  out.cost_integral.assign(N, 0.0);
  if (boundary || !(duration > 0.0)) return out;

  std::vector<double> grad(N, 0.0);
  std::vector<Polynomial> miss(N);
  bool any = false;
  for (std::size_t n = 0; n < N; ++n) {
    const auto& a = agents[n];
    const double probe = a.slope != 0 ? a.start_position + 0.5 * a.slope * duration : a.start_position;
    grad[n] = sensing_gradient(alpha, probe, a.range, a.slope != 0 ? a.slope : a.approach);
    const double p0 = grad[n] != 0.0 ? sensing_probability(alpha, a.start_position, a.range) : 0.0;
    miss[n] = Polynomial({1.0 - p0, -grad[n] * a.slope});
    any = any || grad[n] != 0.0;
  }
  if (!any) return out;

  for (std::size_t n = 0; n < N; ++n) {
    if (grad[n] == 0.0) continue;
    Polynomial c = Polynomial::constant(-decay * grad[n]);
    for (std::size_t d = 0; d < N; ++d) {
      if (d != n) c = c * miss[d];
    }
    const Polynomial once = c.antiderivative();
    const Polynomial twice = once.antiderivative();
    out.rate_integral[n] = once(duration);
    out.cost_integral[n] = twice(duration);
    out.active = true;
  }
  return out;
}

namespace {

class Propagator {
 public:
  Propagator(const PositionProfile& profile, const EventLog& log, const SensingModel& model)
      : profile_(profile), log_(log), model_(model) {
    std::vector<std::size_t> counts;
    for (const auto& a : profile.agents) counts.push_back(a.switching_count());
    state_ = SensitivityState(counts, model.points.size());
    if (log.initial_boundary.size() == model.points.size()) {
      for (std::size_t i = 0; i < state_.boundary.size(); ++i) state_.boundary[i] = log.initial_boundary[i];
    }
    state_.valid = log.coincidences == 0;
    pending_.assign(model.points.size(), 0.0);
    cursor_.assign(profile.agents.size(), 0);
    on_segment_.resize(profile.agents.size());
  }

  SensitivityState run(const SensitivityObserver& observer) {
    if (profile_.agents.size() != model_.ranges.size())
      throw PreconditionError("sensing model and profile disagree on the number of agents");
    for (const auto& e : log_.events) {
      advance_to(std::min(e.time, model_.horizon));
      apply(e);
      if (observer) observer(e, state_);
    }
    advance_to(model_.horizon);
    for (std::size_t i = 0; i < pending_.size(); ++i) flush(i);
    return std::move(state_);
  }

 private:
  void flush(std::size_t i) {
    if (pending_[i] == 0.0) return;
    const double scale = pending_[i] / model_.horizon;
    const auto& row = state_.dR[i];
    for (std::size_t k = 0; k < row.size(); ++k) state_.gradient[k] += row[k] * scale;
    pending_[i] = 0.0;
  }

  void advance_to(double t1) {
    const double t0 = state_.time;
    const double dt = t1 - t0;
    if (!(dt > 0.0)) return;
    for (std::size_t n = 0; n < profile_.agents.size(); ++n) {
      const auto& segs = profile_.agents[n].segments;
      while (cursor_[n] + 1 < segs.size() && segs[cursor_[n]].end <= t0) ++cursor_[n];
      const auto& seg = segs[cursor_[n]];
      on_segment_[n] = {seg.position_at(t0), seg.slope, seg.approach, model_.ranges[n]};
    }
    const double invT = 1.0 / model_.horizon;
    for (std::size_t i = 0; i < model_.points.size(); ++i) {
      if (state_.boundary[i]) continue;  // dR_i is zero and stays zero on a boundary arc
      const auto inc = segment_sensitivity_increment(on_segment_, model_.points[i], model_.decay, dt, false);
      if (!inc.active) {
        pending_[i] += dt;
        continue;
      }
      flush(i);
      auto& row = state_.dR[i];
      for (std::size_t k = 0; k < row.size(); ++k) state_.gradient[k] += row[k] * dt * invT;
      for (std::size_t n = 0; n < on_segment_.size(); ++n) {
        const double c1 = inc.rate_integral[n];
        const double c2 = inc.cost_integral[n];
        if (c1 == 0.0 && c2 == 0.0) continue;
        const auto& th = state_.dsdtheta[n];
        const auto& w = state_.dsdw[n];
        for (std::size_t x = 1; x <= th.size(); ++x) {
          const std::size_t kt = state_.theta_index(n, x);
          const std::size_t kw = state_.dwell_index(n, x);
          state_.gradient[kt] += c2 * th[x - 1] * invT;
          state_.gradient[kw] += c2 * w[x - 1] * invT;
          row[kt] += c1 * th[x - 1];
          row[kw] += c1 * w[x - 1];
        }
      }
    }
    state_.time = t1;
  }

  void apply(const Event& e) {
    switch (e.kind) {
      case EventClass::Arrival:
        apply_arrival(state_, static_cast<std::size_t>(e.agent), static_cast<std::size_t>(e.index), e.slope);
        break;
      case EventClass::Departure:
        apply_departure(state_, static_cast<std::size_t>(e.agent), static_cast<std::size_t>(e.index), e.slope);
        break;
      case EventClass::Halt:
        apply_halt(state_, static_cast<std::size_t>(e.agent));
        break;
      case EventClass::BoundaryHit: {
        const auto i = static_cast<std::size_t>(e.point);
        flush(i);
        apply_boundary_hit(state_, i);
        state_.boundary[i] = 1;
        break;
      }
      case EventClass::BoundaryExit:
        state_.boundary[static_cast<std::size_t>(e.point)] = 0;
        break;
      case EventClass::Kink:
      case EventClass::RateJump:
        break;
    }
  }

  const PositionProfile& profile_;
  const EventLog& log_;
  const SensingModel& model_;
  SensitivityState state_;
  std::vector<double> pending_;
  std::vector<std::size_t> cursor_;
  std::vector<AgentOnSegment> on_segment_;
};

}  // namespace

SensitivityState propagate(const PositionProfile& profile, const EventLog& log, const SensingModel& model,
                           const SensitivityObserver& observer) {
  return Propagator(profile, log, model).run(observer);
}

SensitivityState propagate(const Trajectory& trajectory, const MissionConfig& config,
                           const SensitivityObserver& observer) {
  return propagate(trajectory.profile, trajectory.log, SensingModel::from(config), observer);
}

}  // namespace pmon
