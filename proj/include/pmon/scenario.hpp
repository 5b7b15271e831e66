#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pmon/model.hpp"
#include "pmon/optimizer.hpp"
#include "pmon/stochastic.hpp"

namespace pmon {

struct StochasticSettings {
  bool enabled = false;
  RateGenerator generator;
  std::uint64_t seed = 1;
  bool resample = true;  // fresh process per optimizer iteration
};

struct OutputSettings {
  std::string dir = "out";
  double sample_step = 0.5;  // trajectory CSV grid spacing (event times are added)
  bool plot = true;
  std::optional<std::pair<double, double>> zoom;  // extra magnified trajectory plot
};

struct Scenario {
  std::string name;
  MissionConfig mission;
  std::optional<Policy> policy;
  OptimizerSettings optimizer;
  StochasticSettings stochastic;
  OutputSettings output;
  std::optional<double> reference_cost;  // published value to compare against
  bool reference_reliable = true;
};

/// Parses and validates; throws ConfigError naming the offending field.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);

nlohmann::json to_json(const Scenario& scenario);
nlohmann::json to_json(const Policy& policy);
Policy parse_policy(const nlohmann::json& section, const std::string& where = "policy");

std::vector<std::string> builtin_names();
/// Throws ConfigError listing the available names on an unknown one.
Scenario builtin_scenario(const std::string& name);

}  // namespace pmon
