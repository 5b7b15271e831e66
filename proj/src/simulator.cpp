#include "pmon/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "pmon/error.hpp"

namespace pmon {

namespace {

void check_policy(const MissionConfig& config, const Policy& policy) {
  if (policy.agents.size() != config.num_agents())
    throw PreconditionError("policy has " + std::to_string(policy.agents.size()) + " agents, mission has " +
                            std::to_string(config.num_agents()));
  if (!is_feasible(policy, config))
    throw PreconditionError("policy violates bounds, dwell nonnegativity or switching order; project it first");
}

AgentProfile build_agent(const MissionConfig& config, const AgentSpec& spec, const AgentPolicy& ap) {
  const double T = config.horizon;
  AgentProfile out;
  const std::size_t gamma = ap.size();
  out.arrivals.assign(gamma, kNever);
  out.departures.assign(gamma, kNever);

  double t = 0.0;
  double s = spec.initial_position;
  auto push = [&](double t1, int slope, int approach) {
    if (t1 > t) out.segments.push_back({t, t1, s, slope, approach});
  };

  bool done = false;
  for (std::size_t k = 0; k < gamma && !done; ++k) {
    const int dir = (k % 2 == 0) ? 1 : -1;
    const double dist = dir * (ap.theta[k] - s);
    if (t + dist > T) {
      push(T, dir, dir);
      done = true;
      break;
    }
    push(t + dist, dir, dir);
    t += dist;
    s = ap.theta[k];
    out.arrivals[k] = t;
    out.reached = k + 1;
    if (t + ap.dwell[k] >= T) {
      push(T, 0, dir);
      t = T;
      done = true;
      break;
    }
    push(t + ap.dwell[k], 0, dir);
    t += ap.dwell[k];
    out.departures[k] = t;
  }

  if (!done) {
    // Reverse after the last switching point and run to the bound.
    const int dir = (gamma % 2 == 0) ? 1 : -1;
    const double bound = dir > 0 ? config.upper : config.lower;
    const double dist = std::max(0.0, dir * (bound - s));
    if (t + dist >= T) {
      push(T, dir, dir);
    } else {
      push(t + dist, dir, dir);
      t += dist;
      s = bound;
      out.halt = t;
      push(T, 0, dir);
    }
  }
  if (out.segments.empty()) out.segments.push_back({0.0, T, spec.initial_position, 0, 1});
  return out;
}

// Ordering of coincident events. Motion events keep per-agent causal order
// and boundary events per-point causal order.
int rank(EventClass k) {
  switch (k) {
    case EventClass::RateJump:
      return 0;
    case EventClass::Kink:
      return 1;
    case EventClass::Arrival:
    case EventClass::Departure:
    case EventClass::Halt:
      return 2;
    case EventClass::BoundaryExit:
    case EventClass::BoundaryHit:
      return 3;
  }
  return 4;
}

auto sort_key(const Event& e) {
  const int r = rank(e.kind);
  const int group = r == 3 ? e.point : e.agent;
  return std::make_tuple(e.time, r, group, e.sequence, e.point, e.index);
}

bool is_motion(EventClass k) {
  return k == EventClass::Arrival || k == EventClass::Departure || k == EventClass::Halt;
}

bool is_boundary(EventClass k) { return k == EventClass::BoundaryHit || k == EventClass::BoundaryExit; }

std::size_t count_coincidences(const std::vector<Event>& ev, double tol) {
  std::size_t count = 0;
  for (std::size_t k = 0; k < ev.size(); ++k) {
    if (!is_boundary(ev[k].kind)) continue;
    auto clash = [&](const Event& o) {
      return is_motion(o.kind) || (o.kind == EventClass::Kink && o.point == ev[k].point);
    };
    bool hit = false;
    for (std::size_t j = k; j-- > 0 && ev[k].time - ev[j].time < tol;) hit = hit || clash(ev[j]);
    for (std::size_t j = k + 1; j < ev.size() && ev[j].time - ev[k].time < tol; ++j) hit = hit || clash(ev[j]);
    if (hit) ++count;
  }
  return count;
}

// Agents at rest exactly where some p_i has a corner make J nonsmooth in theta.
std::size_t count_resting_on_kinks(const PositionProfile& profile, const MissionConfig& config, double tol) {
  std::size_t count = 0;
  for (std::size_t n = 0; n < profile.agents.size(); ++n) {
    const auto& a = profile.agents[n];
    const double r = config.agents[n].range;
    for (std::size_t k = 0; k < a.reached; ++k) {
      if (!(a.departures[k] - a.arrivals[k] > tol)) continue;
      const double s = a.position(a.arrivals[k]);
      for (double alpha : config.points)
        if (std::abs(s - alpha) < tol || std::abs(std::abs(s - alpha) - r) < tol) {
          ++count;
          break;
        }
    }
  }
  return count;
}

struct AgentState {
  double s0 = 0.0;
  double mid = 0.0;
  int slope = 0;
  int approach = 1;
};

Trajectory run(const MissionConfig& config, const Policy& policy, const GrowthSchedule* rates,
               const NumericSettings& settings) {
  Trajectory traj;
  traj.warnings = validate(config);
  check_policy(config, policy);

  const double T = config.horizon;
  const std::size_t M = config.num_points();
  const std::size_t N = config.num_agents();
  traj.horizon = T;
  traj.decay = config.decay;
  traj.profile = build_profile(config, policy);

  std::vector<Event> events = motion_events(traj.profile);
  {
    auto kinks = kink_events(traj.profile, config);
    events.insert(events.end(), kinks.begin(), kinks.end());
  }
  std::vector<double> grid = segment_breakpoints(traj.profile, config);
  if (rates != nullptr) {
    if (rates->jumps.size() != M || rates->values.size() != M)
      throw PreconditionError("growth schedule must cover every sampling point");
    for (std::size_t i = 0; i < M; ++i) {
      for (double tj : rates->jumps[i]) {
        if (tj > 0.0 && tj < T) {
          grid.push_back(tj);
          events.push_back({tj, EventClass::RateJump, -1, static_cast<int>(i), -1, 0, 0});
        }
      }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }

  std::vector<double> R = config.initial_uncertainty;
  traj.log.initial_boundary.assign(M, 0);
  std::vector<char> arc(M, 0);
  std::vector<int> seq(M, 0);
  traj.integrals.assign(M, 0.0);
  if (settings.record_uncertainty) traj.uncertainty.assign(M, {});

  std::vector<std::size_t> cursor(N, 0);
  std::vector<AgentState> agents(N);
  const auto ranges = config.ranges();
  const double B = config.decay;

  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double t0 = grid[k];
    const double t1 = grid[k + 1];
    const double dt = t1 - t0;
    if (!(dt > 0.0)) continue;

    for (std::size_t n = 0; n < N; ++n) {
      const auto& segs = traj.profile.agents[n].segments;
      while (cursor[n] + 1 < segs.size() && segs[cursor[n]].end <= t0) ++cursor[n];
      const auto& seg = segs[cursor[n]];
      agents[n].s0 = seg.position_at(t0);
      agents[n].slope = seg.slope;
      agents[n].approach = seg.approach;
      agents[n].mid = agents[n].s0 + 0.5 * seg.slope * dt;
    }

    for (std::size_t i = 0; i < M; ++i) {
      const double alpha = config.points[i];
      const double A = rates != nullptr ? rates->rate(i, t0 + 0.5 * dt) : config.growth[i];

      Polynomial miss = Polynomial::constant(1.0);
      bool sensed = false;
      for (std::size_t n = 0; n < N; ++n) {
        const auto& a = agents[n];
        const double dp = a.slope != 0 ? sensing_gradient(alpha, a.mid, ranges[n], a.slope)
                                       : sensing_gradient(alpha, a.s0, ranges[n], a.approach);
        if (dp == 0.0) continue;
        const double p0 = sensing_probability(alpha, a.s0, ranges[n]);
        miss = miss * Polynomial({1.0 - p0, -dp * a.slope});
        sensed = true;
      }

      if (!sensed && !arc[i]) {
        // Pure growth.
        traj.integrals[i] += R[i] * dt + 0.5 * A * dt * dt;
        if (settings.record_uncertainty)
          traj.uncertainty[i].push_back({t0, t1, t0, Polynomial({R[i], A}), Polynomial(), A, false});
        R[i] += A * dt;
        continue;
      }

      const Polynomial P = Polynomial::constant(1.0) - miss;
      const Polynomial g = Polynomial::constant(A) - B * P;
      const Polynomial G = g.antiderivative();

      if (t0 == 0.0 && R[i] == 0.0 && sign_right_of(g, 0.0) <= 0) {
        arc[i] = 1;
        traj.log.initial_boundary[i] = 1;
      }

      auto record = [&](double lo, double hi, Polynomial value, bool boundary) {
        if (settings.record_uncertainty && hi > lo)
          traj.uncertainty[i].push_back({t0 + lo, t0 + hi, t0, std::move(value), P, A, boundary});
      };
      auto emit = [&](double tau, EventClass kind) {
        events.push_back({t0 + tau, kind, -1, static_cast<int>(i), -1, 0, seq[i]++});
      };

      double lo = 0.0;
      int guard = 0;
      while (lo < dt) {
        if (++guard > 64) {
          std::ostringstream os;
          os << "boundary event localization did not settle for point " << i << " on segment [" << t0 << ", "
             << t1 << "]";
          throw NumericError(os.str());
        }
        if (arc[i]) {
          const auto te = first_upcrossing(g, lo, dt);
          if (!te) {
            record(lo, dt, Polynomial(), true);
            lo = dt;
          } else {
            record(lo, *te, Polynomial(), true);
            emit(*te, EventClass::BoundaryExit);
            arc[i] = 0;
            lo = *te;
          }
          continue;
        }
        if (R[i] == 0.0 && sign_right_of(g, lo) <= 0) {
          emit(lo, EventClass::BoundaryHit);
          arc[i] = 1;
          continue;
        }
        const Polynomial value = G + Polynomial::constant(R[i] - G(lo));
        std::optional<double> th;
        if (R[i] > 0.0) {
          th = first_nonpositive(value, lo, dt);
        } else {
          // Leaving zero with positive rate: skip the initial rise.
          const auto crit = roots_in(g, lo, dt);
          auto it = std::find_if(crit.begin(), crit.end(), [&](double c) { return c > lo; });
          if (it != crit.end() && value(*it) > 0.0) th = first_nonpositive(value, *it, dt);
        }
        const double hi = th ? *th : dt;
        const Polynomial H = value.antiderivative();
        traj.integrals[i] += H(hi) - H(lo);
        record(lo, hi, value, false);
        if (th) {
          emit(hi, EventClass::BoundaryHit);
          R[i] = 0.0;
          arc[i] = 1;
        } else {
          R[i] = std::max(0.0, value(dt));
        }
        lo = hi;
      }
    }
  }

  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return sort_key(a) < sort_key(b); });
  traj.log.events = std::move(events);
  traj.log.coincidences = count_coincidences(traj.log.events, settings.time_tolerance) +
                          count_resting_on_kinks(traj.profile, config, settings.time_tolerance);
  if (traj.log.coincidences > 0) {
    traj.warnings.push_back(std::to_string(traj.log.coincidences) +
                            " boundary event(s) coincide with motion or kink events within the time tolerance; "
                            "gradient validity is degraded there");
  }

  traj.final_uncertainty = R;
  double total = 0.0;
  for (double v : traj.integrals) total += v;
  traj.cost = total / T;
  if (!std::isfinite(traj.cost)) throw NumericError("non-finite cost");
  return traj;
}

}  // namespace

double AgentProfile::position(double t) const {
  auto it = std::upper_bound(segments.begin(), segments.end(), t,
                             [](double v, const MotionSegment& s) { return v < s.start; });
  if (it != segments.begin()) --it;
  return it->position_at(std::min(t, it->end));
}

int AgentProfile::slope(double t) const {
  auto it = std::upper_bound(segments.begin(), segments.end(), t,
                             [](double v, const MotionSegment& s) { return v < s.start; });
  if (it != segments.begin()) --it;
  return it->slope;
}

PositionProfile build_profile(const MissionConfig& config, const Policy& policy) {
  check_policy(config, policy);
  PositionProfile out;
  out.horizon = config.horizon;
  for (std::size_t n = 0; n < config.num_agents(); ++n)
    out.agents.push_back(build_agent(config, config.agents[n], policy.agents[n]));
  return out;
}

std::string_view to_string(EventClass kind) {
  switch (kind) {
    case EventClass::RateJump:
      return "rate_jump";
    case EventClass::Kink:
      return "kink";
    case EventClass::Arrival:
      return "arrival";
    case EventClass::Departure:
      return "departure";
    case EventClass::Halt:
      return "halt";
    case EventClass::BoundaryExit:
      return "boundary_exit";
    case EventClass::BoundaryHit:
      return "boundary_hit";
  }
  return "unknown";
}

std::vector<Event> motion_events(const PositionProfile& profile) {
  std::vector<Event> out;
  for (std::size_t n = 0; n < profile.agents.size(); ++n) {
    const auto& ap = profile.agents[n];
    int seq = 0;
    for (std::size_t k = 0; k < ap.arrivals.size(); ++k) {
      const int dir = (k % 2 == 0) ? 1 : -1;
      const int xi = static_cast<int>(k + 1);
      if (ap.arrivals[k] <= profile.horizon)
        out.push_back({ap.arrivals[k], EventClass::Arrival, static_cast<int>(n), -1, xi, dir, seq++});
      if (ap.departures[k] < profile.horizon)
        out.push_back({ap.departures[k], EventClass::Departure, static_cast<int>(n), -1, xi, -dir, seq++});
    }
    if (ap.halt <= profile.horizon) {
      const int dir = (ap.arrivals.size() % 2 == 0) ? 1 : -1;
      out.push_back({ap.halt, EventClass::Halt, static_cast<int>(n), -1, -1, dir, seq++});
    }
  }
  return out;
}

std::vector<Event> kink_events(const PositionProfile& profile, const MissionConfig& config) {
  std::vector<Event> out;
  for (std::size_t n = 0; n < profile.agents.size(); ++n) {
    const double r = config.agents[n].range;
    for (const auto& seg : profile.agents[n].segments) {
      if (seg.slope == 0) continue;
      for (std::size_t i = 0; i < config.num_points(); ++i) {
        const double alpha = config.points[i];
        const double marks[3] = {alpha - r, alpha, alpha + r};
        for (int m = 0; m < 3; ++m) {
          const double t = seg.start + (marks[m] - seg.origin) / seg.slope;
          if (t > seg.start && t < seg.end)
            out.push_back({t, EventClass::Kink, static_cast<int>(n), static_cast<int>(i), m, seg.slope, 0});
        }
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
  return out;
}

std::vector<double> segment_breakpoints(const PositionProfile& profile, const MissionConfig& config) {
  std::vector<double> grid{0.0, profile.horizon};
  for (const auto& e : motion_events(profile)) grid.push_back(e.time);
  for (const auto& e : kink_events(profile, config)) grid.push_back(e.time);
  for (const auto& ap : profile.agents) {
    for (const auto& seg : ap.segments) grid.push_back(seg.start);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  while (!grid.empty() && grid.back() > profile.horizon) grid.pop_back();
  return grid;
}

GrowthSchedule GrowthSchedule::constant(const std::vector<double>& rates) {
  GrowthSchedule g;
  g.jumps.assign(rates.size(), {});
  for (double r : rates) g.values.push_back({r});
  return g;
}

double GrowthSchedule::rate(std::size_t point, double t) const {
  const auto& j = jumps[point];
  const auto k = static_cast<std::size_t>(std::upper_bound(j.begin(), j.end(), t) - j.begin());
  return values[point][k];
}

double Trajectory::uncertainty_at(std::size_t point, double t) const {
  if (uncertainty.empty()) throw PreconditionError("trajectory was simulated without recording uncertainty");
  const auto& pieces = uncertainty[point];
  auto it = std::upper_bound(pieces.begin(), pieces.end(), t,
                             [](double v, const UncertaintyPiece& p) { return v < p.start; });
  if (it != pieces.begin()) --it;
  return it->boundary ? 0.0 : it->at(t);
}

Trajectory simulate(const MissionConfig& config, const Policy& policy, const NumericSettings& settings) {
  return run(config, policy, nullptr, settings);
}

Trajectory simulate(const MissionConfig& config, const Policy& policy, const GrowthSchedule& rates,
                    const NumericSettings& settings) {
  return run(config, policy, &rates, settings);
}

double cost(const Trajectory& trajectory) {
  double total = 0.0;
  for (double v : trajectory.integrals) total += v;
  return total / trajectory.horizon;
}

std::vector<PointStability> stability_report(const Trajectory& trajectory) {
  if (trajectory.uncertainty.empty())
    throw PreconditionError("stability_report needs a trajectory with recorded uncertainty");
  std::vector<PointStability> out(trajectory.uncertainty.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& st = out[i];
    st.max = -kNever;
    st.min = kNever;
    for (const auto& piece : trajectory.uncertainty[i]) {
      const double lo = piece.start - piece.origin;
      const double hi = piece.end - piece.origin;
      std::vector<double> probes{lo, hi};
      if (!piece.boundary) {
        for (double c : roots_in(piece.value.derivative(), lo, hi)) probes.push_back(c);
      }
      for (double x : probes) {
        const double v = piece.boundary ? 0.0 : std::max(0.0, piece.value(x));
        st.max = std::max(st.max, v);
        st.min = std::min(st.min, v);
      }
      st.emptied = st.emptied || piece.boundary;
      st.growth_integral += piece.growth * (piece.end - piece.start);
      st.sensing_integral += trajectory.decay * piece.detection.integrate(lo, hi);
    }
    st.mean = trajectory.integrals[i] / trajectory.horizon;
    st.emptied = st.emptied || st.min == 0.0;
    st.stable = st.growth_integral < st.sensing_integral;
  }
  return out;
}

}  // namespace pmon
