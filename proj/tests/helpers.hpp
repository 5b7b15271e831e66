#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pmon/model.hpp"

namespace pmon::fixture {

// One agent on [0, L] with M endpoint-spaced points and uniform rates.
inline MissionConfig line_mission(double length, std::size_t points, double growth, double horizon,
                                  std::size_t agents = 1) {
  MissionConfig c;
  c.length = length;
  c.lower = 0.0;
  c.upper = length;
  c.points = evenly_spaced(length, points);
  c.growth.assign(points, growth);
  c.decay = 3.0;
  c.initial_uncertainty.assign(points, 4.0);
  c.horizon = horizon;
  for (std::size_t n = 0; n < agents; ++n)
    c.agents.push_back({4.0, length * static_cast<double>(n) / static_cast<double>(agents)});
  c.no_crossing = agents > 1;
  return c;
}

// Strictly feasible random policy: each agent oscillates inside its own
// slice of [lower, upper] with margins well above any FD step.
inline Policy random_policy(const MissionConfig& c, std::mt19937_64& rng, std::size_t switches,
                            double max_dwell = 3.0) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Policy p;
  const double width = (c.upper - c.lower) / static_cast<double>(c.num_agents());
  for (std::size_t n = 0; n < c.num_agents(); ++n) {
    const double lo = c.lower + width * static_cast<double>(n);
    const double hi = lo + width;
    AgentPolicy ap;
    double prev = c.agents[n].initial_position;
    for (std::size_t k = 0; k < switches; ++k) {
      double th;
      if (k % 2 == 0) {
        const double a = std::max(prev, lo) + 0.5, b = hi - 0.05;
        th = a + (b - a) * U(rng);
      } else {
        const double a = lo + 0.05, b = std::min(prev, hi) - 0.5;
        th = a + (b - a) * U(rng);
      }
      ap.theta.push_back(th);
      ap.dwell.push_back(0.05 + max_dwell * U(rng));
      prev = th;
    }
    p.agents.push_back(ap);
  }
  return p;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("pmon_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace pmon::fixture
