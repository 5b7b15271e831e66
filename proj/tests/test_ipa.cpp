#include <cmath>
#include <random>
#include <type_traits>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "pmon/ipa.hpp"
#include "pmon/oracle.hpp"
#include "pmon/scenario.hpp"

using namespace pmon;

namespace {

SensitivityState three_switch_state() {
  const std::vector<std::size_t> counts{3};
  return SensitivityState(counts, 2);
}

// Simpson rule on [0, D] for the product integrand of two moving agents.
double simpson(const std::function<double(double)>& f, double D, int n = 2000) {
  const double h = D / n;
  double s = f(0.0) + f(D);
  for (int k = 1; k < n; ++k) s += f(k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST(ApplyBoundaryHit, ResetsOnlyThatRow) {
  auto st = three_switch_state();
  for (std::size_t k = 0; k < st.dimension(); ++k) {
    st.dR[0][k] = 0.7 - 0.3 * static_cast<double>(k);
    st.dR[1][k] = 1.0 + static_cast<double>(k);
  }
  const auto other = st.dR[1];
  const auto ds = st.dsdtheta;
  apply_boundary_hit(st, 0);
  for (double v : st.dR[0]) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(st.dR[1], other);
  EXPECT_EQ(st.dsdtheta, ds);
  apply_boundary_hit(st, 0);
  for (double v : st.dR[0]) EXPECT_EQ(v, 0.0);
}

TEST(ApplyArrival, SetsUnitVectorAndZerosDwells) {
  auto st = three_switch_state();
  st.dsdtheta[0] = {2.0, -2.0, 0.0};
  st.dsdw[0] = {1.0, 1.0, 0.0};
  apply_arrival(st, 0, 3, 1);
  EXPECT_EQ(st.dsdtheta[0], (std::vector<double>{0.0, 0.0, 1.0}));
  EXPECT_EQ(st.dsdw[0], (std::vector<double>{0.0, 0.0, 0.0}));

  auto first = three_switch_state();
  apply_arrival(first, 0, 1, 1);
  EXPECT_EQ(first.dsdtheta[0], (std::vector<double>{1.0, 0.0, 0.0}));
}

TEST(ApplyDeparture, ZeroDwellComposite) {
  // xi = 1 odd, outgoing slope -1: 1 + 1 = 2 = (-1)^1 * 2 * (-1).
  auto st = three_switch_state();
  apply_arrival(st, 0, 1, 1);
  apply_departure(st, 0, 1, -1);
  EXPECT_EQ(st.dsdtheta[0][0], 2.0);
  EXPECT_EQ(st.dsdw[0][0], 1.0);
  EXPECT_EQ(st.dsdtheta[0][1], 0.0);
  EXPECT_EQ(st.dsdtheta[0][2], 0.0);
  EXPECT_EQ(st.dsdw[0][1], 0.0);
}

TEST(ApplyDeparture, EarlierIndicesShiftByTwo) {
  auto st = three_switch_state();
  apply_arrival(st, 0, 1, 1);
  apply_departure(st, 0, 1, -1);
  apply_arrival(st, 0, 2, -1);
  apply_departure(st, 0, 2, 1);
  // xi = 2 even, u+ = +1: own entry 1 + 1 = 2, j = 1 odd gets -2.
  EXPECT_EQ(st.dsdtheta[0], (std::vector<double>{-2.0, 2.0, 0.0}));
  EXPECT_EQ(st.dsdw[0], (std::vector<double>{-1.0, -1.0, 0.0}));
}

TEST(ApplyHalt, ClearsAgentRows) {
  auto st = three_switch_state();
  apply_arrival(st, 0, 1, 1);
  apply_departure(st, 0, 1, -1);
  apply_halt(st, 0);
  for (double v : st.dsdtheta[0]) EXPECT_EQ(v, 0.0);
  for (double v : st.dsdw[0]) EXPECT_EQ(v, 0.0);
}

TEST(SegmentIncrement, SingleAgentLeftOfPoint) {
  const double B = 3.0, r = 4.0, D = 1.7;
  const AgentOnSegment ag{7.0, 1, 1, r};  // alpha = 10, agent moving right from 7
  const auto inc = segment_sensitivity_increment(std::span(&ag, 1), 10.0, B, D, false);
  ASSERT_TRUE(inc.active);
  // Times a position sensitivity of 2 this is -(2B/r) D.
  EXPECT_NEAR(2.0 * inc.rate_integral[0], -(2.0 * B / r) * D, 1e-14);
  EXPECT_NEAR(inc.cost_integral[0], -(B / r) * D * D / 2.0, 1e-14);
}

TEST(SegmentIncrement, BoundaryArcAndOutOfRangeAreZero) {
  const AgentOnSegment ag{7.0, 1, 1, 4.0};
  const auto arc = segment_sensitivity_increment(std::span(&ag, 1), 10.0, 3.0, 1.0, true);
  EXPECT_FALSE(arc.active);
  EXPECT_EQ(arc.rate_integral[0], 0.0);
  const AgentOnSegment far{0.0, 0, 1, 4.0};
  const auto out = segment_sensitivity_increment(std::span(&far, 1), 10.0, 3.0, 1.0, false);
  EXPECT_EQ(out.rate_integral[0], 0.0);
  EXPECT_EQ(out.cost_integral[0], 0.0);
}

TEST(SegmentIncrement, TwoAgentProductIntegratedExactly) {
  const double B = 3.0, D = 2.0, alpha = 10.0;
  const AgentOnSegment ags[2] = {{7.0, 1, 1, 4.0}, {12.5, -1, -1, 5.0}};
  const auto inc = segment_sensitivity_increment(ags, alpha, B, D, false);
  auto s = [&](int n, double t) { return ags[n].start_position + ags[n].slope * t; };
  auto p = [&](int n, double t) { return 1.0 - std::abs(alpha - s(n, t)) / ags[n].range; };
  for (int n = 0; n < 2; ++n) {
    const int d = 1 - n;
    const double dp = (alpha > s(n, 0.0) ? 1.0 : -1.0) / ags[n].range;
    const double rate = simpson([&](double t) { return -B * dp * (1.0 - p(d, t)); }, D);
    const double cost = simpson([&](double tau) { return (D - tau) * (-B * dp * (1.0 - p(d, tau))); }, D);
    EXPECT_NEAR(inc.rate_integral[n], rate, 1e-12);
    EXPECT_NEAR(inc.cost_integral[n], cost, 1e-12);
  }
}

TEST(Propagate, UnreachedComponentsAreExactlyZero) {
  const auto sc = builtin_scenario("one-agent-a");
  Policy p;
  p.agents.push_back({{15.0, 5.0, 15.0, 5.0, 18.0, 2.0}, {380.0, 0.0, 0.0, 0.0, 1.0, 1.0}});
  const auto tr = simulate(sc.mission, p);
  const auto st = propagate(tr, sc.mission);
  ASSERT_EQ(tr.profile.agents[0].reached, 1u);
  for (std::size_t xi = 2; xi <= 6; ++xi) {
    EXPECT_EQ(st.gradient[st.theta_index(0, xi)], 0.0);
    EXPECT_EQ(st.gradient[st.dwell_index(0, xi)], 0.0);
  }
  EXPECT_NE(st.gradient[st.theta_index(0, 1)], 0.0);
}

TEST(Propagate, DwellingForeverHasNoLaterDwellGradient) {
  auto sc = builtin_scenario("two-agent-full");
  Policy p;
  for (const auto& a : sc.mission.agents)
    p.agents.push_back({{a.initial_position, a.initial_position}, {1000.0, 0.0}});
  const auto st = propagate(simulate(sc.mission, p), sc.mission);
  for (std::size_t n = 0; n < 2; ++n) EXPECT_EQ(st.gradient[st.dwell_index(n, 2)], 0.0);
}

TEST(Propagate, MatchesFiniteDifferencesOneAgent) {
  const auto sc = builtin_scenario("one-agent-a");
  std::mt19937_64 rng(17);
  for (int k = 0; k < 3; ++k) {
    const auto rep = gradient_check(sc.mission, fixture::random_policy(sc.mission, rng, 24));
    EXPECT_TRUE(rep.pass) << "max rel error " << rep.max_rel_error;
    EXPECT_LT(rep.max_rel_error, 1e-4);
  }
}

TEST(Propagate, MatchesFiniteDifferencesZeroDwellInterior) {
  const auto sc = builtin_scenario("one-agent-a");
  Policy p;
  p.agents.push_back({{17.3, 3.1, 16.2, 2.4, 18.1, 2.9}, {0.4, 0.8, 0.3, 0.6, 0.2, 0.5}});
  const auto rep = gradient_check(sc.mission, p);
  EXPECT_TRUE(rep.pass);
}

TEST(Propagate, ResetAfterEveryBoundaryHit) {
  const auto sc = builtin_scenario("one-agent-c");
  std::mt19937_64 rng(23);
  int hits = 0;
  const auto tr = simulate(sc.mission, fixture::random_policy(sc.mission, rng, 30));
  propagate(tr, sc.mission, [&](const Event& e, const SensitivityState& st) {
    if (e.kind != EventClass::BoundaryHit) return;
    ++hits;
    for (double v : st.dR[static_cast<std::size_t>(e.point)]) ASSERT_EQ(v, 0.0);
  });
  EXPECT_GT(hits, 0);
}

TEST(Propagate, MotionEventsTouchOnlyTheirAgent) {
  const auto sc = builtin_scenario("two-agent-full");
  std::mt19937_64 rng(29);
  const auto tr = simulate(sc.mission, fixture::random_policy(sc.mission, rng, 10));
  std::vector<std::vector<double>> theta_rows, dwell_rows;
  int checked = 0;
  propagate(tr, sc.mission, [&](const Event& e, const SensitivityState& st) {
    if (!theta_rows.empty() && e.agent >= 0 &&
        (e.kind == EventClass::Arrival || e.kind == EventClass::Departure || e.kind == EventClass::Halt)) {
      const std::size_t other = 1 - static_cast<std::size_t>(e.agent);
      EXPECT_EQ(st.dsdtheta[other], theta_rows[other]);
      EXPECT_EQ(st.dsdw[other], dwell_rows[other]);
      ++checked;
    }
    theta_rows = st.dsdtheta;
    dwell_rows = st.dsdw;
  });
  EXPECT_GT(checked, 10);
}

TEST(Propagate, InterfaceCarriesNoGrowthRates) {
  static_assert(std::is_invocable_r_v<SensitivityState, decltype(static_cast<SensitivityState (*)(
                                          const PositionProfile&, const EventLog&, const SensingModel&,
                                          const SensitivityObserver&)>(&propagate)),
                                      const PositionProfile&, const EventLog&, const SensingModel&,
                                      const SensitivityObserver&>);
  const auto sc = builtin_scenario("one-agent-a");
  const auto m = SensingModel::from(sc.mission);
  EXPECT_EQ(m.points, sc.mission.points);
  EXPECT_EQ(m.ranges, sc.mission.ranges());
  EXPECT_EQ(m.decay, sc.mission.decay);
  EXPECT_EQ(m.horizon, sc.mission.horizon);
}

TEST(Propagate, GrowthVariantsWithSameLogGiveSameGradient) {
  // End points of the restricted mission never empty, so changing their
  // growth rates leaves the event log untouched.
  const auto sc = builtin_scenario("one-agent-b");
  std::mt19937_64 rng(31);
  Policy p = fixture::random_policy(sc.mission, rng, 24);
  MissionConfig other = sc.mission;
  other.growth.front() = 0.4;
  other.growth.back() = 0.25;
  const auto ta = simulate(sc.mission, p);
  const auto tb = simulate(other, p);
  ASSERT_EQ(ta.log.events.size(), tb.log.events.size());
  for (std::size_t k = 0; k < ta.log.events.size(); ++k) {
    ASSERT_EQ(ta.log.events[k].time, tb.log.events[k].time);
    ASSERT_EQ(ta.log.events[k].kind, tb.log.events[k].kind);
  }
  EXPECT_NE(ta.cost, tb.cost);
  const auto ga = propagate(ta, sc.mission).gradient;
  const auto gb = propagate(tb, other).gradient;
  ASSERT_EQ(ga.size(), gb.size());
  for (std::size_t k = 0; k < ga.size(); ++k) EXPECT_EQ(ga[k], gb[k]);
}
