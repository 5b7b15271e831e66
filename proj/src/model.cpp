#include "pmon/model.hpp"

#include <cmath>
#include <sstream>

#include "pmon/error.hpp"

namespace pmon {

std::vector<double> MissionConfig::ranges() const {
  std::vector<double> r;
  r.reserve(agents.size());
  for (const auto& a : agents) r.push_back(a.range);
  return r;
}

std::vector<std::string> validate(const MissionConfig& c) {
  std::vector<std::string> errors;
  auto fail = [&](const std::string& msg) { errors.push_back(msg); };

  if (!(c.length > 0.0)) fail("mission.length must be > 0");
  if (!(c.lower >= 0.0 && c.lower < c.upper && c.upper <= c.length))
    fail("mission bounds must satisfy 0 <= lower < upper <= length");
  if (!(c.horizon > 0.0)) fail("mission.horizon must be > 0");
  if (!(c.decay > 0.0)) fail("mission.decay must be > 0");
  if (c.points.empty()) fail("mission.points must not be empty");
  if (c.agents.empty()) fail("mission.agents must not be empty");
  if (c.growth.size() != c.points.size()) fail("mission.growth must have one entry per sampling point");
  if (c.initial_uncertainty.size() != c.points.size())
    fail("mission.initial_uncertainty must have one entry per sampling point");

  for (std::size_t i = 0; i < c.points.size(); ++i) {
    if (!(c.points[i] >= 0.0 && c.points[i] <= c.length))
      fail("mission.points[" + std::to_string(i) + "] outside [0, length]");
    if (i > 0 && c.points[i] < c.points[i - 1]) fail("mission.points must be ascending");
  }
  for (std::size_t i = 0; i < c.growth.size(); ++i) {
    if (!(c.growth[i] > 0.0 && c.growth[i] < c.decay))
      fail("mission.growth[" + std::to_string(i) + "] must satisfy 0 < A < decay");
  }
  for (std::size_t i = 0; i < c.initial_uncertainty.size(); ++i) {
    if (!(c.initial_uncertainty[i] >= 0.0))
      fail("mission.initial_uncertainty[" + std::to_string(i) + "] must be >= 0");
  }
  for (std::size_t n = 0; n < c.agents.size(); ++n) {
    const auto& a = c.agents[n];
    if (!(a.range > 0.0)) fail("agents[" + std::to_string(n) + "].range must be > 0");
    if (!(a.initial_position >= c.lower && a.initial_position <= c.upper))
      fail("agents[" + std::to_string(n) + "].initial_position outside [lower, upper]");
    if (c.no_crossing && n > 0 && !(c.agents[n - 1].initial_position < a.initial_position))
      fail("no_crossing requires strictly increasing initial positions");
  }

  if (!errors.empty()) {
    std::ostringstream os;
    os << "invalid mission configuration:";
    for (const auto& e : errors) os << "\n  - " << e;
    throw ConfigError(os.str());
  }

  std::vector<std::string> warnings;
  bool left_ok = false;
  bool right_ok = false;
  for (const auto& a : c.agents) {
    left_ok = left_ok || c.lower <= a.range;
    right_ok = right_ok || c.upper >= c.length - a.range;
  }
  if (!left_ok || !right_ok)
    warnings.emplace_back("coverage: some part of [0, length] lies outside every agent's reachable sensing range");
  return warnings;
}

std::vector<double> partition_centers(double length, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = static_cast<double>(2 * i + 1) * length / static_cast<double>(2 * count);
  return out;
}

std::vector<double> evenly_spaced(double length, std::size_t count) {
  std::vector<double> out(count, 0.0);
  if (count == 1) return out;
  for (std::size_t i = 0; i < count; ++i)
    out[i] = length * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

std::size_t Policy::dimension() const {
  std::size_t d = 0;
  for (const auto& a : agents) d += 2 * a.size();
  return d;
}

std::size_t Policy::offset(std::size_t agent) const {
  std::size_t off = 0;
  for (std::size_t n = 0; n < agent; ++n) off += 2 * agents[n].size();
  return off;
}

std::vector<double> Policy::flatten() const {
  std::vector<double> flat;
  flat.reserve(dimension());
  for (const auto& a : agents) {
    flat.insert(flat.end(), a.theta.begin(), a.theta.end());
    flat.insert(flat.end(), a.dwell.begin(), a.dwell.end());
  }
  return flat;
}

Policy Policy::with_values(std::span<const double> flat) const {
  if (flat.size() != dimension()) throw PreconditionError("flattened policy has wrong dimension");
  Policy out = *this;
  std::size_t k = 0;
  for (auto& a : out.agents) {
    for (double& v : a.theta) v = flat[k++];
    for (double& v : a.dwell) v = flat[k++];
  }
  return out;
}

bool is_feasible(const Policy& policy, const MissionConfig& config, double tol) {
  if (policy.agents.size() != config.num_agents()) return false;
  for (std::size_t n = 0; n < policy.agents.size(); ++n) {
    const auto& a = policy.agents[n];
    if (a.theta.size() != a.dwell.size()) return false;
    double prev = config.agents[n].initial_position;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double th = a.theta[k];
      if (!std::isfinite(th) || th < config.lower - tol || th > config.upper + tol) return false;
      if (!std::isfinite(a.dwell[k]) || a.dwell[k] < -tol) return false;
      const bool odd = (k % 2) == 0;  // index xi = k + 1
      if (odd ? th < prev - tol : th > prev + tol) return false;
      prev = th;
    }
  }
  return true;
}

double sensing_probability(double x, double s, double range) {
  if (!(range > 0.0)) throw ConfigError("sensing range must be > 0");
  const double d = std::abs(x - s);
  return d <= range ? 1.0 - d / range : 0.0;
}

double sensing_gradient(double alpha, double s, double range, int approach) {
  const double d = alpha - s;
  const int sgn = d > 0.0 ? 1 : (d < 0.0 ? -1 : (approach >= 0 ? 1 : -1));
  const double ad = std::abs(d);
  const bool inside = ad < range || (ad == range && sgn * approach < 0);
  return inside ? static_cast<double>(sgn) / range : 0.0;
}

double joint_detection(double alpha, std::span<const double> positions, std::span<const double> ranges) {
  if (positions.size() != ranges.size() || positions.empty())
    throw PreconditionError("joint_detection needs one range per agent position");
  double miss = 1.0;
  for (std::size_t n = 0; n < positions.size(); ++n) miss *= 1.0 - sensing_probability(alpha, positions[n], ranges[n]);
  return 1.0 - miss;
}

double uncertainty_rate(double R, double growth, double decay, double detection) {
  const double net = growth - decay * detection;
  if (R == 0.0 && net <= 0.0) return 0.0;
  return net;
}

}  // namespace pmon
