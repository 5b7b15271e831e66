#pragma once

#include <optional>
#include <string>
#include <utility>

#include "pmon/export.hpp"

namespace pmon {

/// Agent positions s_n(t) from a trajectory CSV, with arrivals and
/// departures from an events CSV marked. `window` restricts the time axis.
std::string trajectory_svg(const CsvTable& trajectory, const CsvTable& events,
                           std::optional<std::pair<double, double>> window = std::nullopt,
                           const std::string& title = "agent trajectories");

/// J against iteration number from an iterations CSV.
std::string cost_svg(const CsvTable& iterations, const std::string& title = "cost per iteration");

}  // namespace pmon
