#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pmon/model.hpp"
#include "pmon/optimizer.hpp"
#include "pmon/simulator.hpp"

namespace pmon {

struct RateGenerator {
  double mean_holding = 10.0;  // mu
  double lo = 0.075;
  double hi = 0.125;
};

/// Piecewise-constant growth rates. Point i holds values[i][0] on
/// [0, jumps[i][0]), values[i][k] on [jumps[i][k-1], jumps[i][k]), and the
/// last value until T.
struct RateProcess {
  std::vector<std::vector<double>> jumps;
  std::vector<std::vector<double>> values;
  double horizon = 0.0;
  RateGenerator generator;
  std::uint64_t seed = 0;

  GrowthSchedule schedule() const;
};

/// Throws ConfigError unless mu > 0, 0 < lo <= hi and hi < decay.
void validate(const RateGenerator& gen, double decay);

/// Independent renewal process per point: value ~ U[lo, hi), holding time
/// ~ Exp(mean mu). lo == hi yields a constant process without jumps.
RateProcess sample_rate_process(std::uint64_t seed, double horizon, const RateGenerator& gen, std::size_t points);

/// Seed used for optimizer iteration `iteration` of a run started from `seed`.
std::uint64_t iteration_seed(std::uint64_t seed, std::size_t iteration);

Trajectory simulate_with_process(const MissionConfig& config, const Policy& policy, const RateProcess& process,
                                 const NumericSettings& settings = {});

/// Objective that draws a fresh process for every optimizer iteration
/// (or reuses the base seed when `resample` is false). The IPA gradient is
/// a stochastic estimate here.
Objective stochastic_objective(const MissionConfig& config, const RateGenerator& gen, std::uint64_t seed,
                               bool resample = true);

}  // namespace pmon
