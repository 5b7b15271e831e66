#include "pmon/stochastic.hpp"

#include <random>
#include <sstream>

#include "pmon/error.hpp"
#include "pmon/ipa.hpp"

namespace pmon {

GrowthSchedule RateProcess::schedule() const { return GrowthSchedule{jumps, values}; }

void validate(const RateGenerator& gen, double decay) {
  std::vector<std::string> errors;
  if (!(gen.mean_holding > 0.0)) errors.emplace_back("stochastic.mean_holding must be > 0");
  if (!(gen.lo > 0.0)) errors.emplace_back("stochastic.lo must be > 0");
  if (!(gen.lo <= gen.hi)) errors.emplace_back("stochastic.lo must not exceed stochastic.hi");
  if (!(gen.hi < decay)) errors.emplace_back("stochastic.hi must be below the decay rate B");
  if (!errors.empty()) {
    std::ostringstream os;
    os << "invalid rate generator:";
    for (const auto& e : errors) os << "\n  - " << e;
    throw ConfigError(os.str());
  }
}

RateProcess sample_rate_process(std::uint64_t seed, double horizon, const RateGenerator& gen, std::size_t points) {
  if (!(horizon > 0.0)) throw ConfigError("rate process horizon must be > 0");
  if (!(gen.mean_holding > 0.0 && gen.lo > 0.0 && gen.lo <= gen.hi))
    throw ConfigError("rate generator needs mu > 0 and 0 < lo <= hi");
  RateProcess p;
  p.horizon = horizon;
  p.generator = gen;
  p.seed = seed;
  p.jumps.assign(points, {});
  p.values.assign(points, {});
  if (gen.lo == gen.hi) {
    for (auto& v : p.values) v.push_back(gen.lo);
    return p;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(gen.lo, gen.hi);
  std::exponential_distribution<double> holding(1.0 / gen.mean_holding);
  for (std::size_t i = 0; i < points; ++i) {
    p.values[i].push_back(value(rng));
    double t = holding(rng);
    while (t < horizon) {
      p.jumps[i].push_back(t);
      p.values[i].push_back(value(rng));
      t += holding(rng);
    }
  }
  return p;
}

std::uint64_t iteration_seed(std::uint64_t seed, std::size_t iteration) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(iteration >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Trajectory simulate_with_process(const MissionConfig& config, const Policy& policy, const RateProcess& process,
                                 const NumericSettings& settings) {
  if (process.values.size() != config.num_points())
    throw PreconditionError("rate process must have one component per sampling point");
  validate(process.generator, config.decay);
  return simulate(config, policy, process.schedule(), settings);
}

Objective stochastic_objective(const MissionConfig& config, const RateGenerator& gen, std::uint64_t seed,
                               bool resample) {
  validate(gen, config.decay);
  return [config, gen, seed, resample](const Policy& p, std::size_t iteration, bool with_gradient) {
    const std::uint64_t s = resample ? iteration_seed(seed, iteration) : seed;
    const RateProcess proc = sample_rate_process(s, config.horizon, gen, config.num_points());
    NumericSettings ns;
    ns.record_uncertainty = false;
    const Trajectory tr = simulate_with_process(config, p, proc, ns);
    if (!with_gradient) return Evaluation{tr.cost, {}, tr.log.coincidences == 0};
    const SensitivityState st = propagate(tr, config);
    return Evaluation{tr.cost, st.gradient, st.valid};
  };
}

}  // namespace pmon
