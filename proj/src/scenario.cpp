#include "pmon/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pmon/error.hpp"

namespace pmon {

using nlohmann::json;

namespace {

// Object reader that rejects keys it was not asked about.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  ~Section() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    return v.get<double>();
  }

  double number(const std::string& key) {
    if (!has(key)) throw ConfigError(where(key) + ": required");
    return number(key, 0.0);
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError(where(key) + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) throw ConfigError(where(key) + "[" + std::to_string(k) + "]: expected a number");
      out.push_back(v[k].get<double>());
    }
    return out;
  }

  /// Scalar broadcast to `size` entries, or an explicit list.
  std::vector<double> per_point(const std::string& key, std::size_t size, std::optional<double> fallback) {
    if (!has(key)) {
      if (!fallback) throw ConfigError(where(key) + ": required");
      return std::vector<double>(size, *fallback);
    }
    if (j_.at(key).is_number()) return std::vector<double>(size, j_.at(key).get<double>());
    auto v = numbers(key);
    if (v.size() != size)
      throw ConfigError(where(key) + ": expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
    return v;
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where(key) + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

MissionConfig parse_mission(const json& j) {
  Section s(j, "mission");
  MissionConfig m;
  m.length = s.number("length");
  m.lower = s.number("lower", 0.0);
  m.upper = s.number("upper", m.length);
  m.horizon = s.number("horizon");
  m.decay = s.number("decay");
  m.no_crossing = s.flag("no_crossing", false);

  const std::string layout = s.text("point_layout", "endpoints");
  if (layout != "endpoints" && layout != "centers")
    throw ConfigError("mission.point_layout: expected \"endpoints\" or \"centers\"");
  const bool has_count = s.has("point_count");
  const std::uint64_t count = s.count("point_count", 0);
  if (s.has("points")) {
    m.points = s.numbers("points");
  } else if (has_count) {
    if (count == 0) throw ConfigError("mission.point_count: must be >= 1");
    m.points = layout == "centers" ? partition_centers(m.length, count) : evenly_spaced(m.length, count);
  } else {
    throw ConfigError("mission.points: required (or give mission.point_count)");
  }

  m.growth = s.per_point("growth", m.points.size(), std::nullopt);
  m.initial_uncertainty = s.per_point("initial_uncertainty", m.points.size(), 4.0);

  if (!s.has("agents")) throw ConfigError("mission.agents: required");
  const json& agents = s.raw("agents");
  if (!agents.is_array() || agents.empty()) throw ConfigError("mission.agents: expected a non-empty array");
  for (std::size_t n = 0; n < agents.size(); ++n) {
    Section a(agents[n], "mission.agents[" + std::to_string(n) + "]");
    AgentSpec spec;
    spec.range = a.number("range", 4.0);
    spec.initial_position = a.number("initial_position", m.lower);
    a.finish();
    m.agents.push_back(spec);
  }
  s.finish();
  validate(m);
  return m;
}

OptimizerSettings parse_optimizer(const json& j) {
  Section s(j, "optimizer");
  OptimizerSettings o;
  o.sigma = s.number("sigma", o.sigma);
  o.epsilon = s.number("epsilon", o.epsilon);
  o.max_iters = s.count("max_iters", o.max_iters);
  o.seed = s.count("seed", o.seed);
  const std::string mode = s.text("step", "armijo");
  ArmijoStep arm;
  ConstantStep cst;
  if (s.has("armijo")) {
    Section a(s.raw("armijo"), "optimizer.armijo");
    arm.beta = a.number("beta", arm.beta);
    arm.gamma = a.number("gamma", arm.gamma);
    arm.initial = a.number("initial", arm.initial);
    arm.max_backtracks = a.count("max_backtracks", arm.max_backtracks);
    a.finish();
  }
  if (s.has("constant")) {
    Section c(s.raw("constant"), "optimizer.constant");
    cst.theta = c.number("theta", cst.theta);
    cst.dwell = c.number("dwell", cst.dwell);
    c.finish();
  }
  if (mode == "armijo") o.step = arm;
  else if (mode == "constant") o.step = cst;
  else throw ConfigError("optimizer.step: expected \"armijo\" or \"constant\"");
  s.finish();
  validate(o);
  return o;
}

StochasticSettings parse_stochastic(const json& j, double decay) {
  Section s(j, "stochastic");
  StochasticSettings st;
  st.enabled = s.flag("enabled", true);
  st.generator.mean_holding = s.number("mean_holding", st.generator.mean_holding);
  st.generator.lo = s.number("lo", st.generator.lo);
  st.generator.hi = s.number("hi", st.generator.hi);
  st.seed = s.count("seed", st.seed);
  st.resample = s.flag("resample", st.resample);
  s.finish();
  if (st.enabled) validate(st.generator, decay);
  return st;
}

OutputSettings parse_output(const json& j) {
  Section s(j, "output");
  OutputSettings o;
  o.dir = s.text("dir", o.dir);
  o.sample_step = s.number("sample_step", o.sample_step);
  if (!(o.sample_step > 0.0)) throw ConfigError("output.sample_step: must be > 0");
  o.plot = s.flag("plot", o.plot);
  if (s.has("zoom")) {
    Section z(s.raw("zoom"), "output.zoom");
    const double lo = z.number("start");
    const double hi = z.number("end");
    z.finish();
    if (!(lo < hi)) throw ConfigError("output.zoom: start must be below end");
    o.zoom = std::make_pair(lo, hi);
  }
  s.finish();
  return o;
}

}  // namespace

Policy parse_policy(const json& section, const std::string& where) {
  Section s(section, where);
  if (!s.has("agents")) throw ConfigError(where + ".agents: required");
  const json& agents = s.raw("agents");
  if (!agents.is_array()) throw ConfigError(where + ".agents: expected an array");
  Policy p;
  for (std::size_t n = 0; n < agents.size(); ++n) {
    const std::string path = where + ".agents[" + std::to_string(n) + "]";
    Section a(agents[n], path);
    AgentPolicy ap;
    if (!a.has("theta")) throw ConfigError(path + ".theta: required");
    ap.theta = a.numbers("theta");
    ap.dwell = a.has("dwell") ? a.numbers("dwell") : std::vector<double>(ap.theta.size(), 0.0);
    a.finish();
    if (ap.dwell.size() != ap.theta.size()) throw ConfigError(path + ".dwell: must match theta in length");
    p.agents.push_back(std::move(ap));
  }
  s.finish();
  return p;
}

Scenario parse_scenario(const json& doc) {
  Section s(doc, "");
  Scenario sc;
  sc.name = s.text("name", "scenario");
  if (!s.has("mission")) throw ConfigError("mission: required");
  sc.mission = parse_mission(s.raw("mission"));
  if (s.has("policy")) {
    sc.policy = parse_policy(s.raw("policy"));
    if (sc.policy->agents.size() != sc.mission.num_agents())
      throw ConfigError("policy.agents: expected one entry per mission agent");
    if (!is_feasible(*sc.policy, sc.mission, 1e-12))
      throw ConfigError("policy: violates bounds, dwell nonnegativity or the alternating order constraint");
  }
  if (s.has("optimizer")) sc.optimizer = parse_optimizer(s.raw("optimizer"));
  if (s.has("stochastic")) sc.stochastic = parse_stochastic(s.raw("stochastic"), sc.mission.decay);
  if (s.has("output")) sc.output = parse_output(s.raw("output"));
  if (s.has("reference_cost")) sc.reference_cost = s.number("reference_cost");
  sc.reference_reliable = s.flag("reference_reliable", true);
  s.finish();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_scenario(doc);
}

json to_json(const Policy& policy) {
  json agents = json::array();
  for (const auto& a : policy.agents) agents.push_back({{"theta", a.theta}, {"dwell", a.dwell}});
  return {{"agents", agents}};
}

json to_json(const Scenario& sc) {
  const MissionConfig& m = sc.mission;
  json agents = json::array();
  for (const auto& a : m.agents) agents.push_back({{"range", a.range}, {"initial_position", a.initial_position}});
  json doc;
  doc["name"] = sc.name;
  doc["mission"] = {{"length", m.length},
                    {"lower", m.lower},
                    {"upper", m.upper},
                    {"horizon", m.horizon},
                    {"decay", m.decay},
                    {"no_crossing", m.no_crossing},
                    {"points", m.points},
                    {"growth", m.growth},
                    {"initial_uncertainty", m.initial_uncertainty},
                    {"agents", agents}};
  if (sc.policy) doc["policy"] = to_json(*sc.policy);

  json opt = {{"sigma", sc.optimizer.sigma},
              {"epsilon", sc.optimizer.epsilon},
              {"max_iters", sc.optimizer.max_iters},
              {"seed", sc.optimizer.seed}};
  if (const auto* a = std::get_if<ArmijoStep>(&sc.optimizer.step)) {
    opt["step"] = "armijo";
    opt["armijo"] = {{"beta", a->beta}, {"gamma", a->gamma}, {"initial", a->initial},
                     {"max_backtracks", a->max_backtracks}};
  } else {
    const auto& c = std::get<ConstantStep>(sc.optimizer.step);
    opt["step"] = "constant";
    opt["constant"] = {{"theta", c.theta}, {"dwell", c.dwell}};
  }
  doc["optimizer"] = opt;

  if (sc.stochastic.enabled) {
    const auto& st = sc.stochastic;
    doc["stochastic"] = {{"enabled", true},
                         {"mean_holding", st.generator.mean_holding},
                         {"lo", st.generator.lo},
                         {"hi", st.generator.hi},
                         {"seed", st.seed},
                         {"resample", st.resample}};
  }
  json out = {{"dir", sc.output.dir}, {"sample_step", sc.output.sample_step}, {"plot", sc.output.plot}};
  if (sc.output.zoom) out["zoom"] = {{"start", sc.output.zoom->first}, {"end", sc.output.zoom->second}};
  doc["output"] = out;
  if (sc.reference_cost) doc["reference_cost"] = *sc.reference_cost;
  doc["reference_reliable"] = sc.reference_reliable;
  return doc;
}

std::vector<std::string> builtin_names() {
  return {"one-agent-a", "one-agent-b", "one-agent-c", "one-agent-d", "two-agent-full", "two-agent-restricted"};
}

namespace {

Scenario one_agent(const std::string& name, double lower, double upper) {
  Scenario sc;
  sc.name = name;
  MissionConfig& m = sc.mission;
  m.length = 20.0;
  m.lower = lower;
  m.upper = upper;
  m.points = evenly_spaced(20.0, 21);
  m.growth.assign(21, 0.1);
  m.decay = 3.0;
  m.agents = {AgentSpec{4.0, lower}};
  m.initial_uncertainty.assign(21, 4.0);
  m.horizon = 400.0;
  sc.optimizer.sigma = 5.0;
  sc.optimizer.epsilon = 2e-10;
  sc.optimizer.max_iters = 500;
  sc.output.dir = "out/" + name;
  sc.output.zoom = std::make_pair(0.0, 75.0);
  return sc;
}

Scenario two_agent(const std::string& name, double lower, double upper) {
  Scenario sc;
  sc.name = name;
  MissionConfig& m = sc.mission;
  m.length = 40.0;
  m.lower = lower;
  m.upper = upper;
  m.points = evenly_spaced(40.0, 41);
  m.growth.assign(41, 0.01);
  m.decay = 3.0;
  // Agent n starts at the left end of its share of [a, b].
  m.agents = {AgentSpec{4.0, lower}, AgentSpec{4.0, lower + 0.5 * (upper - lower)}};
  m.initial_uncertainty.assign(41, 4.0);
  m.horizon = 400.0;
  m.no_crossing = true;
  sc.optimizer.sigma = 5.0;
  sc.optimizer.epsilon = 2e-10;
  sc.optimizer.max_iters = 500;
  sc.output.dir = "out/" + name;
  sc.output.zoom = std::make_pair(0.0, 75.0);
  return sc;
}

}  // namespace

Scenario builtin_scenario(const std::string& name) {
  if (name == "one-agent-a") {
    Scenario sc = one_agent(name, 0.0, 20.0);
    sc.reference_cost = 17.77;
    return sc;
  }
  if (name == "one-agent-b") {
    Scenario sc = one_agent(name, 4.0, 16.0);
    sc.reference_cost = 39.14;
    return sc;
  }
  if (name == "one-agent-c") {
    Scenario sc = one_agent(name, 0.0, 20.0);
    sc.mission.growth.front() = 0.5;
    sc.mission.growth.back() = 0.5;
    sc.reference_cost = 39.30;
    return sc;
  }
  if (name == "one-agent-d") {
    Scenario sc = one_agent(name, 0.0, 20.0);
    sc.stochastic.enabled = true;
    sc.stochastic.generator = RateGenerator{10.0, 0.075, 0.125};
    sc.stochastic.seed = 1;
    sc.optimizer.seed = 1;
    sc.optimizer.step = ConstantStep{0.1, 0.1};
    sc.optimizer.max_iters = 300;
    sc.reference_cost = 17.54;
    return sc;
  }
  if (name == "two-agent-full") {
    Scenario sc = two_agent(name, 0.0, 40.0);
    sc.reference_cost = 17.77;
    sc.reference_reliable = false;
    return sc;
  }
  if (name == "two-agent-restricted") {
    Scenario sc = two_agent(name, 4.0, 36.0);
    sc.reference_cost = 39.14;
    sc.reference_reliable = false;
    return sc;
  }
  std::ostringstream os;
  os << "unknown scenario '" << name << "'; available:";
  for (const auto& n : builtin_names()) os << ' ' << n;
  throw ConfigError(os.str());
}

}  // namespace pmon
