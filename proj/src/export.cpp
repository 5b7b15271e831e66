#include "pmon/export.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "pmon/error.hpp"

namespace pmon {

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

void write_trajectory_csv(std::ostream& os, const Trajectory& tr, double step) {
  if (!(step > 0.0)) throw PreconditionError("trajectory sample step must be > 0");
  if (tr.uncertainty.empty()) throw PreconditionError("trajectory was simulated without recording uncertainty");
  const std::size_t N = tr.profile.agents.size();
  const std::size_t M = tr.uncertainty.size();

  std::vector<double> times;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * step;
    if (t > tr.horizon) break;
    times.push_back(t);
  }
  times.push_back(tr.horizon);
  for (const auto& e : tr.log.events) times.push_back(e.time);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  os << "t";
  for (std::size_t n = 1; n <= N; ++n) os << ",s_" << n;
  for (std::size_t i = 1; i <= M; ++i) os << ",R_" << i;
  os << '\n';
  for (double t : times) {
    os << format_number(t);
    for (std::size_t n = 0; n < N; ++n) os << ',' << format_number(tr.profile.agents[n].position(t));
    for (std::size_t i = 0; i < M; ++i) os << ',' << format_number(std::max(0.0, tr.uncertainty_at(i, t)));
    os << '\n';
  }
}

void write_events_csv(std::ostream& os, const EventLog& log) {
  os << "time,class,agent,point,index,slope\n";
  auto opt = [](int v) { return v < 0 ? std::string() : std::to_string(v + 1); };
  for (const auto& e : log.events) {
    const std::string index = e.index < 0 ? std::string() : std::to_string(e.index);
    os << format_number(e.time) << ',' << to_string(e.kind) << ',' << opt(e.agent) << ',' << opt(e.point) << ','
       << index << ',' << e.slope << '\n';
  }
}

void write_gradient_csv(std::ostream& os, const Policy& policy, std::span<const double> gradient) {
  if (gradient.size() != policy.dimension()) throw PreconditionError("gradient has wrong dimension");
  os << "agent,kind,index,value,gradient\n";
  for (std::size_t n = 0; n < policy.agents.size(); ++n) {
    const auto& ap = policy.agents[n];
    const std::size_t off = policy.offset(n);
    for (std::size_t k = 0; k < ap.size(); ++k)
      os << n + 1 << ",theta," << k + 1 << ',' << format_number(ap.theta[k]) << ','
         << format_number(gradient[off + k]) << '\n';
    for (std::size_t k = 0; k < ap.size(); ++k)
      os << n + 1 << ",w," << k + 1 << ',' << format_number(ap.dwell[k]) << ','
         << format_number(gradient[off + ap.size() + k]) << '\n';
  }
}

void write_gradcheck_csv(std::ostream& os, const GradCheckReport& rep) {
  os << "agent,kind,index,value,ipa,fd,abs_error,rel_error,one_sided,unreliable\n";
  for (const auto& c : rep.components) {
    os << c.agent + 1 << ',' << (c.is_theta ? "theta" : "w") << ',' << c.xi << ',' << format_number(c.value) << ','
       << format_number(c.ipa) << ',' << format_number(c.fd) << ',' << format_number(c.abs_error) << ','
       << format_number(c.rel_error) << ',' << (c.one_sided ? 1 : 0) << ',' << (c.unreliable ? 1 : 0) << '\n';
  }
}

void write_iterations_csv(std::ostream& os, const OptimizationRun& run) {
  os << "iteration,cost,projected_norm,step,backtracks\n";
  for (const auto& it : run.history) {
    os << it.index << ',' << format_number(it.cost) << ',' << format_number(it.projected_norm) << ','
       << format_number(it.step) << ',' << it.backtracks << '\n';
  }
}

void write_rates_csv(std::ostream& os, const RateProcess& p) {
  os << "point,time,value\n";
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    for (std::size_t k = 0; k < p.values[i].size(); ++k) {
      const double t = k == 0 ? 0.0 : p.jumps[i][k - 1];
      os << i + 1 << ',' << format_number(t) << ',' << format_number(p.values[i][k]) << '\n';
    }
  }
}

void write_stability_csv(std::ostream& os, const std::vector<PointStability>& report, std::span<const double> points) {
  os << "point,position,max,min,mean,emptied,growth_integral,sensing_integral,stable\n";
  for (std::size_t i = 0; i < report.size(); ++i) {
    const auto& s = report[i];
    os << i + 1 << ',' << format_number(points[i]) << ',' << format_number(s.max) << ',' << format_number(s.min)
       << ',' << format_number(s.mean) << ',' << (s.emptied ? 1 : 0) << ',' << format_number(s.growth_integral)
       << ',' << format_number(s.sensing_integral) << ',' << (s.stable ? 1 : 0) << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw PreconditionError("empty CSV input");
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
  }
  return t;
}

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw PreconditionError("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(c < r.size() && !r[c].empty() ? std::stod(r[c]) : 0.0);
  return out;
}

}  // namespace pmon
