// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "helpers.hpp"
#include "pmon/cli.hpp"
#include "pmon/ipa.hpp"
#include "pmon/oracle.hpp"
#include "pmon/scenario.hpp"

using namespace pmon;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kReproduceTol = 0.05;
constexpr double kReproduceSeconds = 60.0;
constexpr double kStochasticTol = 0.10;
constexpr double kGradTol = 1e-4;
constexpr double kFdStep = 1e-5;
constexpr double kExcludedFraction = 0.05;
constexpr double kDenseTol = 1e-3;
constexpr double kDenseStep = 1e-4;
constexpr double kMinOrder = 0.9;
constexpr double kMinReduction = 0.5;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::vector<std::pair<int, Outcome>> results;

void report(int id, const std::string& title, Outcome o) {
  std::printf("[%s] criterion %d: %s | %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str());
  std::fflush(stdout);
  results.emplace_back(id, std::move(o));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Converged {
  Scenario scenario;
  OptimizationRun run;
  double seconds = 0.0;
  std::optional<RateProcess> process;  // stochastic scenarios: sample used for exact/dense comparison
};

Converged run_builtin(const std::string& name) {
  Converged c;
  c.scenario = builtin_scenario(name);
  const auto t0 = std::chrono::steady_clock::now();
  c.run = optimize(c.scenario.mission, c.scenario.optimizer);
  c.seconds = seconds_since(t0);
  return c;
}

Converged run_stochastic(const Scenario& sc, std::uint64_t seed, const OptimizerSettings& settings, bool resample) {
  Converged c;
  c.scenario = sc;
  const auto t0 = std::chrono::steady_clock::now();
  c.run = optimize(sc.mission, settings,
                   stochastic_objective(sc.mission, sc.stochastic.generator, seed, resample));
  c.seconds = seconds_since(t0);
  c.process = sample_rate_process(seed, sc.mission.horizon, sc.stochastic.generator, sc.mission.num_points());
  return c;
}

Trajectory exact(const Converged& c, const Policy& p) {
  if (c.process) return simulate_with_process(c.scenario.mission, p, *c.process);
  return simulate(c.scenario.mission, p);
}

double dense(const Converged& c, const Policy& p, double dt) {
  if (c.process) {
    const GrowthSchedule g = c.process->schedule();
    return dense_simulate(c.scenario.mission, p, dt, &g).cost;
  }
  return dense_simulate(c.scenario.mission, p, dt).cost;
}

bool nonincreasing(const OptimizationRun& r) {
  for (std::size_t k = 1; k < r.history.size(); ++k)
    if (r.history[k].cost > r.history[k - 1].cost) return false;
  return true;
}

// Resets after every boundary hit; returns the number of hits seen.
std::size_t check_resets(const Trajectory& tr, const MissionConfig& m, bool& ok) {
  std::size_t hits = 0;
  propagate(tr, m, [&](const Event& e, const SensitivityState& st) {
    if (e.kind != EventClass::BoundaryHit) return;
    ++hits;
    for (double v : st.dR[static_cast<std::size_t>(e.point)]) ok = ok && v == 0.0;
  });
  return hits;
}

// Least-squares slope of log(error) against log(dt).
double fitted_order(const std::vector<double>& dts, const std::vector<double>& errs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(dts.size());
  for (std::size_t k = 0; k < dts.size(); ++k) {
    const double x = std::log(dts[k]), y = std::log(errs[k]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<std::string> csv_files(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(fs::relative(e.path(), dir).string());
  std::sort(out.begin(), out.end());
  return out;
}

// SensingModel is exactly {points, ranges, decay, horizon}: four initializers
// compile, a fifth does not.
template <class T>
concept FourFieldAggregate = requires { T{std::vector<double>{}, std::vector<double>{}, 0.0, 0.0}; } &&
                             !requires { T{std::vector<double>{}, std::vector<double>{}, 0.0, 0.0, 0.0}; };
static_assert(FourFieldAggregate<SensingModel>);
static_assert(std::is_same_v<decltype(static_cast<SensitivityState (*)(const PositionProfile&, const EventLog&,
                                                                      const SensingModel&,
                                                                      const SensitivityObserver&)>(&propagate)),
                             SensitivityState (*)(const PositionProfile&, const EventLog&, const SensingModel&,
                                                  const SensitivityObserver&)>);

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "pmon_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  std::map<std::string, Converged> runs;
  for (const char* name : {"one-agent-a", "one-agent-b", "one-agent-c", "two-agent-full", "two-agent-restricted"}) {
    runs[name] = run_builtin(name);
    const auto& r = runs[name].run;
    std::printf("  run %-22s status %-9s iterations %4zu  J %.4f -> %.4f  %.1f s\n", name,
                std::string(to_string(r.status)).c_str(), r.history.size() - 1, r.initial_cost, r.final_cost,
                runs[name].seconds);
  }

  // Criterion 1.
  {
    Outcome o;
    for (const char* name : {"one-agent-a", "one-agent-b", "one-agent-c"}) {
      const auto& c = runs[name];
      const double ref = *c.scenario.reference_cost;
      const double rel = (c.run.final_cost - ref) / ref;
      const bool ok = std::abs(rel) <= kReproduceTol && c.seconds <= kReproduceSeconds;
      o.pass = o.pass && ok;
      o.detail += fmt::format("{} J={:.3f} ref={:.2f} rel={:+.3f} {:.1f}s{}; ", name, c.run.final_cost, ref, rel,
                              c.seconds, ok ? "" : " (out of tolerance)");
    }
    report(1, fmt::format("reproduce one-agent a/b/c within {:.0f}% in <= {:.0f}s", 100 * kReproduceTol,
                          kReproduceSeconds),
           o);
  }

  // Criterion 2.
  const Scenario d = builtin_scenario("one-agent-d");
  {
    Outcome o;
    double mean = 0.0;
    std::string costs;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto c = run_stochastic(d, seed, d.optimizer, true);
      mean += c.run.final_cost / 5.0;
      costs += fmt::format("{:.3f} ", c.run.final_cost);
      if (seed == 1) runs["one-agent-d"] = std::move(c);
    }
    const double ref = *d.reference_cost;
    const double rel = (mean - ref) / ref;
    o.pass = std::abs(rel) <= kStochasticTol;
    o.detail = fmt::format("final J per seed [{}] mean={:.3f} ref={:.2f} rel={:+.3f}", costs, mean, ref, rel);
    report(2, fmt::format("one-agent-d constant step, 5 seeds, mean within {:.0f}%", 100 * kStochasticTol), o);
  }

  // Criterion 3.
  std::vector<std::pair<MissionConfig, Policy>> random_cases;
  {
    Outcome o;
    FiniteDifferenceSettings fd;
    fd.step = kFdStep;
    for (const auto& [name, switches] : {std::pair<std::string, std::size_t>{"one-agent-a", 24},
                                         std::pair<std::string, std::size_t>{"two-agent-full", 16}}) {
      const auto m = builtin_scenario(name).mission;
      std::mt19937_64 rng(2024);
      double worst = 0.0;
      std::size_t excluded = 0, total = 0, policies = 0;
      while (policies < 20) {
        const Policy p = fixture::random_policy(m, rng, switches);
        const auto rep = gradient_check(m, p, kGradTol, fd);
        ++policies;
        worst = std::max(worst, rep.max_rel_error);
        excluded += rep.excluded;
        total += rep.components.size();
        random_cases.emplace_back(m, p);
      }
      const double frac = static_cast<double>(excluded) / static_cast<double>(total);
      const bool ok = worst < kGradTol && frac < kExcludedFraction;
      o.pass = o.pass && ok;
      o.detail += fmt::format("{}: {} policies, {} components, max rel err {:.2e}, excluded {:.2f}%; ", name,
                              policies, total, worst, 100 * frac);
    }
    report(3, "IPA vs central FD (h=1e-5) at 20 random policies per family", o);
  }

  // Criterion 4.
  {
    Outcome o;
    const std::vector<double> sweep{4e-3, 2e-3, 1e-3, 5e-4};
    for (const auto& [name, c] : runs) {
      const Policy& p = c.run.trimmed;
      const double J = exact(c, p).cost;
      const double diff = std::abs(dense(c, p, kDenseStep) - J);
      std::vector<double> errs;
      for (double dt : sweep) errs.push_back(std::abs(dense(c, p, dt) - J));
      const double order = fitted_order(sweep, errs);
      const bool ok = diff < kDenseTol && order >= kMinOrder;
      o.pass = o.pass && ok;
      o.detail += fmt::format("{} |dense-exact|={:.2e} order={:.2f}; ", name, diff, order);
    }
    report(4, "dense Euler (dt=1e-4) within 1e-3 of exact J, order >= 0.9", o);
  }

  // Criterion 5.
  {
    Outcome o;
    const auto m = builtin_scenario("one-agent-a").mission;
    std::size_t checks = 0;
    for (const auto& theta : {std::vector<double>{15.0, 5.0, 12.0}, std::vector<double>{19.5, 0.5, 19.0},
                              std::vector<double>{8.0, 3.0, 17.0}}) {
      Policy p;
      p.agents.push_back({theta, {0.0, 0.0, 0.0}});
      const auto tr = simulate(m, p);
      const auto& prof = tr.profile.agents[0];
      const auto& ev = tr.log.events;
      std::size_t k = 0;
      propagate(tr, m, [&](const Event& e, const SensitivityState& st) {
        const std::size_t idx = k++;
        const double next = idx + 1 < ev.size() ? ev[idx + 1].time : m.horizon;
        if (!(next > e.time)) return;  // state only holds once the last event at this instant is applied
        const double u = prof.slope(0.5 * (e.time + next));
        for (std::size_t xi = 1; xi <= 3; ++xi) {
          const double expected = prof.arrivals[xi - 1] <= e.time ? (xi % 2 ? -1.0 : 1.0) * 2.0 * u : 0.0;
          o.pass = o.pass && st.dsdtheta[0][xi - 1] == expected;
          ++checks;
        }
      });
    }
    o.detail = fmt::format("{} exact comparisons of ds/dtheta_xi against (-1)^xi 2 u(t) over 3 policies", checks);
    report(5, "closed-form position sensitivity, one agent, w = 0, three switches", o);
  }

  // Criterion 6.
  {
    Outcome o;
    std::size_t hits = 0, trajectories = 0;
    bool ok = true;
    for (const auto& [name, c] : runs) {
      hits += check_resets(exact(c, c.run.trimmed), c.scenario.mission, ok);
      ++trajectories;
    }
    for (const auto& [m, p] : random_cases) {
      hits += check_resets(simulate(m, p), m, ok);
      ++trajectories;
    }
    o.pass = ok && hits > 0;
    o.detail = fmt::format("{} trajectories, {} boundary hits, all dR rows exactly zero after each: {}", trajectories,
                           hits, ok ? "yes" : "no");
    report(6, "sensitivity reset at every boundary hit", o);
  }

  // Criterion 7.
  {
    Outcome o;
    std::size_t variants = 0, identical = 0;
    for (const char* name : {"one-agent-b", "two-agent-restricted"}) {
      const auto& c = runs[name];
      const auto base = simulate(c.scenario.mission, c.run.trimmed);
      std::vector<char> hit(c.scenario.mission.num_points(), 0);
      for (const auto& e : base.log.events)
        if (e.kind == EventClass::BoundaryHit || e.kind == EventClass::BoundaryExit) hit[static_cast<std::size_t>(e.point)] = 1;
      MissionConfig other = c.scenario.mission;
      std::size_t changed = 0;
      for (std::size_t i = 0; i < hit.size(); ++i)
        if (!hit[i] && !base.log.initial_boundary[i]) other.growth[i] *= 1.7, ++changed;
      if (changed == 0) continue;
      const auto alt = simulate(other, c.run.trimmed);
      bool same_log = base.log.events.size() == alt.log.events.size();
      for (std::size_t k = 0; same_log && k < base.log.events.size(); ++k)
        same_log = base.log.events[k].time == alt.log.events[k].time && base.log.events[k].kind == alt.log.events[k].kind;
      if (!same_log) continue;
      ++variants;
      const auto ga = propagate(base.profile, base.log, SensingModel::from(c.scenario.mission)).gradient;
      const auto gb = propagate(alt.profile, alt.log, SensingModel::from(other)).gradient;
      if (ga == gb && base.cost != alt.cost) ++identical;
      o.detail += fmt::format("{}: {} growth rates changed, J {:.3f} vs {:.3f}; ", name, changed, base.cost, alt.cost);
    }
    o.pass = variants > 0 && identical == variants;
    o.detail += fmt::format("propagate(profile, log, SensingModel{{points, ranges, decay, horizon}}); {} of {} "
                            "variant pairs bit-identical",
                            identical, variants);
    report(7, "gradients independent of growth rates", o);
  }

  // Criterion 8.
  {
    Outcome o;
    for (const char* name : {"one-agent-a", "one-agent-c"}) {
      const auto& th = runs[name].run.trimmed.agents[0].theta;
      const auto [lo, hi] = std::minmax_element(th.begin(), th.end());
      const bool ok = !th.empty() && *lo > 0.0 && *hi < 20.0;
      o.pass = o.pass && ok;
      o.detail += fmt::format("{} theta in [{:.6g}, {:.6g}]; ", name, *lo, *hi);
    }
    for (const char* name : {"two-agent-full", "two-agent-restricted"}) {
      const auto& c = runs[name];
      const auto prof = build_profile(c.scenario.mission, c.run.trimmed);
      std::vector<double> times;
      for (double t = 0.0; t <= c.scenario.mission.horizon; t += 0.01) times.push_back(t);
      for (const auto& a : prof.agents)
        for (const auto& s : a.segments) times.push_back(s.start);
      std::sort(times.begin(), times.end());
      std::size_t touching = 0;
      bool interval = false, prev = false;
      for (double t : times) {
        const bool bad = prof.agents[0].position(t) >= prof.agents[1].position(t);
        touching += bad;
        interval = interval || (bad && prev);
        prev = bad;
      }
      o.pass = o.pass && !interval;
      o.detail += fmt::format("{} s1>=s2 at {} of {} samples, no interval: {}; ", name, touching, times.size(),
                              interval ? "no" : "yes");
    }
    report(8, "structure at convergence (interior switching points, no crossing)", o);
  }

  // Criterion 9.
  {
    Outcome o;
    OptimizerSettings frozen = d.optimizer;
    frozen.step = ArmijoStep{};
    frozen.max_iters = 500;
    auto dfrozen = run_stochastic(d, 1, frozen, false);
    std::vector<std::pair<std::string, const OptimizationRun*>> traces;
    for (const auto& [name, c] : runs)
      if (name != "one-agent-d") traces.emplace_back(name, &c.run);
    traces.emplace_back("one-agent-d (frozen sample)", &dfrozen.run);
    for (const auto& [name, r] : traces) {
      const bool mono = nonincreasing(*r);
      const double red = 1.0 - r->final_cost / r->initial_cost;
      const bool ok = mono && red >= kMinReduction;
      o.pass = o.pass && ok;
      o.detail += fmt::format("{} monotone={} reduction={:.1f}%; ", name, mono ? "yes" : "no", 100 * red);
    }
    report(9, "Armijo traces nonincreasing, cost reduced by >= 50%", o);
  }

  // Criterion 10.
  {
    Outcome o;
    Scenario sc = builtin_scenario("one-agent-d");
    sc.optimizer.max_iters = 25;
    const fs::path dir = work / "determinism";
    fs::create_directories(dir);
    fixture::spit(dir / "scenario.json", to_json(sc).dump(2));
    std::ostringstream sink;
    int code = 0;
    for (const char* sub : {"run1", "run2"}) {
      code |= cli::run({"optimize", "--scenario", (dir / "scenario.json").string(), "--seed", "11", "--seeds", "11,12",
                        "--out", (dir / sub / "optimize").string(), "--no-plot"},
                       sink, sink);
      sc.policy = initialize(sc.mission, 5.0);
      fixture::spit(dir / "with_policy.json", to_json(sc).dump(2));
      code |= cli::run({"simulate", "--scenario", (dir / "with_policy.json").string(), "--seed", "11", "--out",
                        (dir / sub / "simulate").string(), "--no-plot"},
                       sink, sink);
    }
    const auto files = csv_files(dir / "run1");
    std::size_t same = 0;
    for (const auto& f : files)
      same += fixture::slurp(dir / "run1" / f) == fixture::slurp(dir / "run2" / f) ? 1 : 0;
    o.pass = code == 0 && !files.empty() && same == files.size() && csv_files(dir / "run2") == files;
    o.detail = fmt::format("{} of {} CSV files byte-identical across two runs (exit codes ok: {})", same,
                           files.size(), code == 0 ? "yes" : "no");
    report(10, "deterministic CSV outputs for identical scenario and seed", o);
  }

  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.second.pass; });
  std::printf("%zu of %zu criteria passed\n", results.size() - static_cast<std::size_t>(failed), results.size());
  return failed == 0 ? 0 : 1;
}
