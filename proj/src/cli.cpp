#include "pmon/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "pmon/error.hpp"
#include "pmon/export.hpp"
#include "pmon/ipa.hpp"
#include "pmon/optimizer.hpp"
#include "pmon/oracle.hpp"
#include "pmon/scenario.hpp"
#include "pmon/simulator.hpp"
#include "pmon/stochastic.hpp"
#include "pmon/svg.hpp"

namespace fs = std::filesystem;

namespace pmon::cli {

namespace {

struct Options {
  std::string scenario;
  std::string name;
  std::string out;
  std::string policy;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::optional<double> dt;
  double fd_step = 1e-5;
  double tolerance = 1e-4;
  bool plot_on = false;
  bool plot_off = false;
  std::vector<double> constant_step;
};

class Failure : public std::runtime_error {
 public:
  Failure(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Failure(kUsageError, "cannot write " + path.string());
  f << content;
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

CsvTable read_table(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Failure(kUsageError, "cannot read " + path.string());
  return read_csv(f);
}

fs::path prepare_dir(const Options& o, const Scenario& sc) {
  fs::path dir = o.out.empty() ? fs::path(sc.output.dir) : fs::path(o.out);
  fs::create_directories(dir);
  return dir;
}

bool plotting(const Options& o, const Scenario& sc) {
  if (o.plot_on) return true;
  if (o.plot_off) return false;
  return sc.output.plot;
}

void apply_overrides(const Options& o, Scenario& sc) {
  if (o.seed) {
    sc.optimizer.seed = *o.seed;
    sc.stochastic.seed = *o.seed;
  }
  if (!o.constant_step.empty()) {
    sc.optimizer.step = ConstantStep{o.constant_step[0], o.constant_step[1]};
    validate(sc.optimizer);
  }
  if (!o.policy.empty()) {
    std::ifstream f(o.policy);
    if (!f) throw ConfigError("cannot open policy file " + o.policy);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(o.policy + ": " + e.what());
    }
    Policy p = parse_policy(j.contains("policy") ? j.at("policy") : j);
    if (p.agents.size() != sc.mission.num_agents() || !is_feasible(p, sc.mission, 1e-12))
      throw ConfigError(o.policy + ": policy does not fit the mission or is infeasible");
    sc.policy = p;
  }
}

void render_plots(const fs::path& dir, const Scenario& sc) {
  if (fs::exists(dir / "trajectory.csv") && fs::exists(dir / "events.csv")) {
    const CsvTable tr = read_table(dir / "trajectory.csv");
    const CsvTable ev = read_table(dir / "events.csv");
    write_file(dir / "trajectory.svg", trajectory_svg(tr, ev, std::nullopt, sc.name + ": trajectories"));
    if (sc.output.zoom)
      write_file(dir / "trajectory_zoom.svg",
                 trajectory_svg(tr, ev, sc.output.zoom,
                                fmt::format("{}: t in [{:g}, {:g}]", sc.name, sc.output.zoom->first,
                                            sc.output.zoom->second)));
  }
  if (fs::exists(dir / "iterations.csv"))
    write_file(dir / "cost.svg", cost_svg(read_table(dir / "iterations.csv"), sc.name + ": cost"));
}

Trajectory simulate_scenario(const Scenario& sc, const Policy& policy, std::uint64_t seed,
                             std::optional<RateProcess>* process = nullptr) {
  if (!sc.stochastic.enabled) return simulate(sc.mission, policy);
  RateProcess p = sample_rate_process(seed, sc.mission.horizon, sc.stochastic.generator, sc.mission.num_points());
  Trajectory tr = simulate_with_process(sc.mission, policy, p);
  if (process != nullptr) *process = std::move(p);
  return tr;
}

void write_trajectory_outputs(const fs::path& dir, const Scenario& sc, const Trajectory& tr) {
  write_file(dir / "trajectory.csv", render([&](std::ostream& os) { write_trajectory_csv(os, tr, sc.output.sample_step); }));
  write_file(dir / "events.csv", render([&](std::ostream& os) { write_events_csv(os, tr.log); }));
  write_file(dir / "stability.csv", render([&](std::ostream& os) {
               write_stability_csv(os, stability_report(tr), sc.mission.points);
             }));
}

int cmd_simulate(const Options& o, std::ostream& out) {
  Scenario sc = load_scenario(o.scenario);
  apply_overrides(o, sc);
  if (!sc.policy) throw ConfigError("scenario has no policy section (pass --policy FILE or add one)");
  const fs::path dir = prepare_dir(o, sc);

  std::optional<RateProcess> process;
  const Trajectory tr = simulate_scenario(sc, *sc.policy, sc.stochastic.seed, &process);
  const SensitivityState st = propagate(tr, sc.mission);
  write_trajectory_outputs(dir, sc, tr);
  write_file(dir / "gradient.csv", render([&](std::ostream& os) { write_gradient_csv(os, *sc.policy, st.gradient); }));
  if (process) write_file(dir / "rates.csv", render([&](std::ostream& os) { write_rates_csv(os, *process); }));
  if (plotting(o, sc)) render_plots(dir, sc);

  out << fmt::format("J = {}\n", format_number(tr.cost));
  const auto stab = stability_report(tr);
  std::size_t emptied = 0, unstable = 0;
  for (const auto& s : stab) {
    emptied += s.emptied ? 1 : 0;
    unstable += s.stable ? 0 : 1;
  }
  out << fmt::format("points: {} total, {} emptied at least once, {} with growth integral >= sensing integral\n",
                     stab.size(), emptied, unstable);
  for (std::size_t i = 0; i < stab.size(); ++i) {
    if (!stab[i].stable)
      out << fmt::format("  point {} at {:g}: max {:.4g}, mean {:.4g}\n", i + 1, sc.mission.points[i], stab[i].max,
                         stab[i].mean);
  }
  if (!st.valid) out << "gradient: near-coincident events present, validity degraded\n";
  if (sc.stochastic.enabled) out << "gradient: stochastic estimate (random growth rates)\n";
  for (const auto& w : tr.warnings) out << "warning: " << w << '\n';
  if (o.dt) {
    const GrowthSchedule sched = process ? process->schedule() : GrowthSchedule::constant(sc.mission.growth);
    const DenseResult d = dense_simulate(sc.mission, *sc.policy, *o.dt, &sched);
    out << fmt::format("dense J (dt = {:g}) = {}  difference {:.3e}\n", *o.dt, format_number(d.cost),
                       d.cost - tr.cost);
    for (const auto& w : d.warnings) out << "warning: " << w << '\n';
  }
  out << "outputs written to " << dir.string() << '\n';
  return kSuccess;
}

struct RunSummary {
  std::uint64_t seed = 0;
  OptimizationRun run;
  double seconds = 0.0;
};

RunSummary optimize_one(const Scenario& base, std::uint64_t seed, const fs::path& dir, bool plot) {
  Scenario sc = base;
  sc.optimizer.seed = seed;
  sc.stochastic.seed = seed;
  fs::create_directories(dir);

  const auto t0 = std::chrono::steady_clock::now();
  const Objective objective = sc.stochastic.enabled
                                  ? stochastic_objective(sc.mission, sc.stochastic.generator, seed, sc.stochastic.resample)
                                  : deterministic_objective(sc.mission);
  RunSummary s;
  s.seed = seed;
  s.run = optimize(sc.mission, sc.optimizer, objective, sc.policy);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_file(dir / "iterations.csv", render([&](std::ostream& os) { write_iterations_csv(os, s.run); }));
  write_file(dir / "policy.json", to_json(s.run.trimmed).dump(2) + "\n");
  Scenario warm = sc;
  warm.policy = s.run.trimmed;
  write_file(dir / "warm_start.json", to_json(warm).dump(2) + "\n");

  std::optional<RateProcess> process;
  const Trajectory tr = simulate_scenario(sc, s.run.trimmed, seed, &process);
  write_trajectory_outputs(dir, sc, tr);
  if (process) write_file(dir / "rates.csv", render([&](std::ostream& os) { write_rates_csv(os, *process); }));

  nlohmann::json summary = {{"name", sc.name},
                            {"seed", seed},
                            {"status", std::string(to_string(s.run.status))},
                            {"iterations", s.run.history.size() - 1},
                            {"initial_cost", s.run.initial_cost},
                            {"final_cost", s.run.final_cost},
                            {"projected_gradient_norm", s.run.final_projected_norm},
                            {"zeta", s.run.zeta},
                            {"warnings", s.run.warnings}};
  if (sc.stochastic.enabled) summary["gradient"] = "stochastic estimate";
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  if (plot) render_plots(dir, sc);
  return s;
}

void print_run(std::ostream& out, const RunSummary& s) {
  const auto& r = s.run;
  std::string zeta;
  for (std::size_t z : r.zeta) zeta += (zeta.empty() ? "" : ",") + std::to_string(z);
  out << fmt::format("seed {}: status {}, {} iterations, J {:.6f} -> {:.6f}, |grad| {:.3e}, zeta [{}], {:.1f} s\n",
                     s.seed, to_string(r.status), r.history.size() - 1, r.initial_cost, r.final_cost,
                     r.final_projected_norm, zeta, s.seconds);
  for (const auto& w : r.warnings) out << "  warning: " << w << '\n';
}

std::vector<RunSummary> optimize_scenario(const Options& o, const Scenario& sc, const fs::path& dir,
                                          std::ostream& out) {
  std::vector<RunSummary> runs;
  const bool plot = plotting(o, sc);
  if (o.seeds.empty()) {
    runs.push_back(optimize_one(sc, sc.stochastic.enabled ? sc.stochastic.seed : sc.optimizer.seed, dir, plot));
    print_run(out, runs.back());
    return runs;
  }
  std::string table = "seed,status,iterations,initial_cost,final_cost,projected_norm\n";
  for (std::uint64_t seed : o.seeds) {
    runs.push_back(optimize_one(sc, seed, dir / ("seed-" + std::to_string(seed)), plot));
    print_run(out, runs.back());
    const auto& r = runs.back().run;
    table += fmt::format("{},{},{},{},{},{}\n", seed, to_string(r.status), r.history.size() - 1,
                         format_number(r.initial_cost), format_number(r.final_cost),
                         format_number(r.final_projected_norm));
  }
  write_file(dir / "seeds.csv", table);
  return runs;
}

int cmd_optimize(const Options& o, std::ostream& out) {
  Scenario sc = load_scenario(o.scenario);
  apply_overrides(o, sc);
  const fs::path dir = prepare_dir(o, sc);
  optimize_scenario(o, sc, dir, out);
  out << "outputs written to " << dir.string() << '\n';
  return kSuccess;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
  Scenario sc = load_scenario(o.scenario);
  apply_overrides(o, sc);
  if (!sc.policy) throw ConfigError("gradcheck needs a policy (scenario policy section or --policy FILE)");
  if (!(o.fd_step > 0.0)) throw ConfigError("--fd-step must be > 0");
  if (!(o.tolerance > 0.0)) throw ConfigError("--tolerance must be > 0");
  const fs::path dir = prepare_dir(o, sc);
  if (sc.stochastic.enabled) out << "note: gradient check uses the deterministic growth rates of the mission\n";

  FiniteDifferenceSettings fd;
  fd.step = o.fd_step;
  const GradCheckReport rep = gradient_check(sc.mission, *sc.policy, o.tolerance, fd);
  write_file(dir / "gradcheck.csv", render([&](std::ostream& os) { write_gradcheck_csv(os, rep); }));
  out << fmt::format("components {}, excluded {} (one-sided or unreliable), max relative error {:.3e}, tolerance {:g}\n",
                     rep.components.size(), rep.excluded, rep.max_rel_error, rep.tolerance);
  if (!rep.ipa_valid) out << "warning: base trajectory has near-coincident events\n";
  out << (rep.pass ? "PASS\n" : "FAIL\n");
  return rep.pass ? kSuccess : kNumericFailure;
}

int cmd_reproduce(const Options& o, std::ostream& out) {
  Scenario sc = builtin_scenario(o.name);
  apply_overrides(o, sc);
  const fs::path dir = o.out.empty() ? fs::path(sc.output.dir) : fs::path(o.out);
  fs::create_directories(dir);
  write_file(dir / "scenario.json", to_json(sc).dump(2) + "\n");
  const auto runs = optimize_scenario(o, sc, dir, out);

  double mean = 0.0;
  for (const auto& r : runs) mean += r.run.final_cost;
  mean /= static_cast<double>(runs.size());
  std::string text = fmt::format("scenario {}\nruns {}\nmean final J {:.6f}\n", sc.name, runs.size(), mean);
  if (sc.reference_cost) {
    const double rel = (mean - *sc.reference_cost) / *sc.reference_cost;
    text += fmt::format("published J {:.2f}\nrelative difference {:+.4f}\n", *sc.reference_cost, rel);
    if (!sc.reference_reliable) text += "published value is not reliable for this scenario; compare structure only\n";
  }
  write_file(dir / "summary.txt", text);
  out << text << "outputs written to " << dir.string() << '\n';
  return kSuccess;
}

int cmd_sample_rates(const Options& o, std::ostream& out) {
  Scenario sc = load_scenario(o.scenario);
  apply_overrides(o, sc);
  if (!sc.stochastic.enabled) throw ConfigError("scenario has no enabled stochastic section");
  const fs::path dir = prepare_dir(o, sc);
  const RateProcess p =
      sample_rate_process(sc.stochastic.seed, sc.mission.horizon, sc.stochastic.generator, sc.mission.num_points());
  write_file(dir / "rates.csv", render([&](std::ostream& os) { write_rates_csv(os, p); }));
  std::size_t jumps = 0;
  for (const auto& j : p.jumps) jumps += j.size();
  out << fmt::format("{} points, {} jumps over [0, {:g}], seed {}\n", p.values.size(), jumps, p.horizon, p.seed);
  out << "outputs written to " << dir.string() << '\n';
  return kSuccess;
}

int cmd_plot(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw ConfigError("plot needs --out DIR");
  Scenario sc;
  sc.name = fs::path(o.out).filename().string();
  if (!o.scenario.empty()) sc = load_scenario(o.scenario);
  render_plots(o.out, sc);
  out << "plots rendered in " << o.out << '\n';
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Persistent monitoring: exact simulation, IPA gradients and trajectory optimization"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c, bool scenario_required) {
    auto* s = c->add_option("--scenario", o.scenario, "scenario file (JSON)");
    if (scenario_required) s->required();
    c->add_option("--out", o.out, "output directory (default: scenario output.dir)");
    c->add_option("--seed", o.seed, "seed for stochastic rates and the optimizer");
    c->add_flag("--no-plot", o.plot_off, "skip SVG plots")->excludes(c->add_flag("--plot", o.plot_on, "write SVG plots"));
    c->add_option("--policy", o.policy, "policy file (JSON with an agents list) overriding the scenario policy");
  };

  auto* sim = app.add_subcommand("simulate", "simulate the scenario's policy");
  common(sim, true);
  sim->add_option("--dt", o.dt, "also run the dense Euler oracle with this step")->check(CLI::PositiveNumber);

  auto* opt = app.add_subcommand("optimize", "run the gradient-descent optimizer");
  common(opt, true);
  opt->add_option("--seeds", o.seeds, "comma-separated seed list, one run per seed")->delimiter(',');
  opt->add_option("--constant-step", o.constant_step, "constant step sizes: eta_theta eta_w")->expected(2);

  auto* gc = app.add_subcommand("gradcheck", "compare IPA gradients with finite differences");
  common(gc, true);
  gc->add_option("--fd-step", o.fd_step, "finite-difference step h");
  gc->add_option("--tolerance", o.tolerance, "relative error tolerance");

  auto* rep = app.add_subcommand("reproduce", "optimize a built-in scenario");
  rep->add_option("name", o.name, "one of: one-agent-a, one-agent-b, one-agent-c, one-agent-d, two-agent-full, "
                                  "two-agent-restricted")
      ->required();
  rep->add_option("--out", o.out, "output directory (default: out/NAME)");
  rep->add_option("--seed", o.seed, "seed");
  rep->add_option("--seeds", o.seeds, "comma-separated seed list")->delimiter(',');
  rep->add_flag("--no-plot", o.plot_off, "skip SVG plots")->excludes(rep->add_flag("--plot", o.plot_on, "write SVG plots"));
  rep->add_option("--constant-step", o.constant_step, "constant step sizes: eta_theta eta_w")->expected(2);

  auto* sr = app.add_subcommand("sample-rates", "sample the random growth-rate process");
  common(sr, true);

  auto* pl = app.add_subcommand("plot", "re-render SVG plots from the CSVs in an output directory");
  pl->add_option("--out", o.out, "directory holding trajectory.csv, events.csv, iterations.csv")->required();
  pl->add_option("--scenario", o.scenario, "scenario file (for titles and zoom window)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o, out);
    if (opt->parsed()) return cmd_optimize(o, out);
    if (gc->parsed()) return cmd_gradcheck(o, out);
    if (rep->parsed()) return cmd_reproduce(o, out);
    if (sr->parsed()) return cmd_sample_rates(o, out);
    if (pl->parsed()) return cmd_plot(o, out);
  } catch (const Failure& e) {
    err << "error: " << e.what() << '\n';
    return e.code();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace pmon::cli
