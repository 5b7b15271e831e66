#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pmon/ipa.hpp"
#include "pmon/optimizer.hpp"
#include "pmon/oracle.hpp"
#include "pmon/simulator.hpp"
#include "pmon/stochastic.hpp"

namespace pmon {

/// Decimal with 17 significant digits; round-trips every double.
std::string format_number(double x);

/// Columns t, s_1..s_N, R_1..R_M on the grid k * step plus every event
/// time. Needs recorded uncertainty.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, double step);

/// Columns time, class, agent, point, index, slope. Agent and point are
/// 1-based, empty when not applicable.
void write_events_csv(std::ostream& os, const EventLog& log);

/// Columns agent, kind (theta|w), index, value, gradient.
void write_gradient_csv(std::ostream& os, const Policy& policy, std::span<const double> gradient);

void write_gradcheck_csv(std::ostream& os, const GradCheckReport& report);

/// Columns iteration, cost, projected_norm, step, backtracks.
void write_iterations_csv(std::ostream& os, const OptimizationRun& run);

/// Columns point, time, value; one row per held value, time = start of hold.
void write_rates_csv(std::ostream& os, const RateProcess& process);

/// Columns point, position, max, min, mean, emptied, growth_integral, sensing_integral, stable.
void write_stability_csv(std::ostream& os, const std::vector<PointStability>& report,
                         std::span<const double> points);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws if absent
  std::vector<double> numbers(const std::string& name) const;
};

/// Plain comma-separated reader (no quoting; the writers never quote).
CsvTable read_csv(std::istream& is);

}  // namespace pmon
