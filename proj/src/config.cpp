#include "amod/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "amod/errors.hpp"

namespace amod {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("config: unknown field '" + it.key() + "' in " + where);
}

ModelSpec parse_model(const json& j) {
  reject_unknown(j, {"type", "mean_rate", "base_total_rate", "burst_rate", "p_burst", "block_s",
                     "hotspot_origins", "days", "path"},
                 "model");
  ModelSpec m;
  m.type = j.value("type", "perfect");
  m.mean_rate = j.value("mean_rate", 0.0);
  m.base_total_rate = j.value("base_total_rate", 0.0);
  m.burst_rate = j.value("burst_rate", 0.0);
  m.p_burst = j.value("p_burst", 0.0);
  m.block_s = j.value("block_s", 300);
  if (j.contains("hotspot_origins")) m.hotspot_origins = j["hotspot_origins"].get<std::vector<int>>();
  if (j.contains("days")) m.days = j["days"].get<std::vector<std::string>>();
  m.path = j.value("path", "");
  static const std::set<std::string> types = {"perfect", "poisson", "mixture", "bootstrap", "file"};
  if (!types.count(m.type)) throw ConfigError("config: unknown model type '" + m.type + "'");
  return m;
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"n", "dt_s", "travel_time", "fleet_size", "initial_vehicles", "demand_trace",
                  "costs", "horizon_T", "controller_period_s", "tick_s", "K", "seed", "duration_s",
                  "lookback_s", "drain_cap_s", "model"},
                 "scenario");

  ScenarioConfig c;
  try {
    c.n = j.at("n").get<int>();
    c.dt_s = j.at("dt_s").get<int>();
    c.travel_time = j.at("travel_time").get<std::vector<std::vector<int>>>();
    c.fleet_size = j.at("fleet_size").get<Count>();
    c.initial_vehicles = j.at("initial_vehicles").get<std::vector<Count>>();
    c.demand_trace = j.at("demand_trace").get<std::string>();
    if (j.contains("costs")) {
      const json& costs = j["costs"];
      reject_unknown(costs, {"c_x_scale", "c_wait_scale", "c_drop"}, "costs");
      c.c_x_scale = costs.value("c_x_scale", 1.0);
      c.c_wait_scale = costs.value("c_wait_scale", 1.0);
      c.c_drop = costs.value("c_drop", 0.0);
    }
    c.horizon_T = j.at("horizon_T").get<int>();
    c.controller_period_s = j.at("controller_period_s").get<int>();
    c.tick_s = j.at("tick_s").get<int>();
    c.K = j.at("K").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.duration_s = j.value("duration_s", 0LL);
    c.lookback_s = j.value("lookback_s", 14400LL);
    c.drain_cap_s = j.value("drain_cap_s", 7200LL);
    if (j.contains("model")) c.model = parse_model(j["model"]);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (c.n < 1) throw ConfigError("config: n must be positive");
  if (c.dt_s < 1) throw ConfigError("config: dt_s must be positive");
  if (static_cast<int>(c.travel_time.size()) != c.n)
    throw ConfigError("config: travel_time must be n x n");
  for (const auto& row : c.travel_time)
    if (static_cast<int>(row.size()) != c.n) throw ConfigError("config: travel_time must be n x n");
  if (static_cast<int>(c.initial_vehicles.size()) != c.n)
    throw ConfigError("config: initial_vehicles must have n entries");
  Count total = 0;
  for (Count v : c.initial_vehicles) {
    if (v < 0) throw ConfigError("config: negative initial vehicle count");
    total += v;
  }
  if (total != c.fleet_size) throw ConfigError("config: initial_vehicles must sum to fleet_size");
  if (c.horizon_T < 1) throw ConfigError("config: horizon_T must be >= 1");
  if (c.tick_s < 1 || c.controller_period_s < 1 || c.controller_period_s % c.tick_s != 0)
    throw ConfigError("config: controller_period_s must be a positive multiple of tick_s");
  if (c.K < 1) throw ConfigError("config: K must be >= 1");
  if (c.duration_s < 0) throw ConfigError("config: duration_s must be >= 0");
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ScenarioSpec make_scenario(const ScenarioConfig& c) {
  Grid2<int> tau(c.n, c.n, 1);
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.n; ++j) tau(i, j) = c.travel_time[i][j];

  ScenarioSpec spec{.net = RoadNetwork(c.n, std::move(tau), c.dt_s),
                    .m = c.fleet_size,
                    .initial = c.initial_vehicles,
                    .trace = load_trace_csv(c.demand_trace),
                    .duration_s = c.duration_s,
                    .tick_s = c.tick_s,
                    .period_s = c.controller_period_s,
                    .T = c.horizon_T,
                    .K = c.K,
                    .costs = CostModel(),
                    .lookback_s = c.lookback_s,
                    .drain_cap_s = c.drain_cap_s};
  spec.trace.validate(c.n);
  if (spec.duration_s == 0) {
    const long long end = spec.trace.last_time_s() + 1;
    const long long periods = (end + c.controller_period_s - 1) / c.controller_period_s;
    spec.duration_s = std::max<long long>(1, periods) * c.controller_period_s;
  }
  const double drop = c.c_drop;
  spec.costs = (drop > 0)
                   ? CostModel::scaled(spec.net, c.horizon_T, c.c_x_scale, c.c_wait_scale, drop)
                   : CostModel::defaults(spec.net, c.horizon_T);
  return spec;
}

namespace {

std::shared_ptr<GenerativeModel> make_model(const ScenarioConfig& c, const ScenarioSpec& spec) {
  const ModelSpec& m = c.model;
  if (m.type == "perfect")
    return perfect_model(spec.trace, c.n, c.dt_s, spec.duration_s + spec.drain_cap_s + c.dt_s);
  if (m.type == "poisson") {
    Grid3<double> mean(c.n, c.horizon_T, 0.0);
    for (int i = 0; i < c.n; ++i)
      for (int j = 0; j < c.n; ++j)
        for (int t = 1; t <= c.horizon_T; ++t)
          if (i != j) mean(i, j, t) = m.mean_rate * c.dt_s;
    return poisson_model(std::move(mean));
  }
  if (m.type == "mixture") {
    MixtureSpec mix = MixtureSpec::commuter(c.n, m.base_total_rate, m.burst_rate, m.p_burst,
                                            m.block_s);
    if (!m.hotspot_origins.empty()) mix.hotspot_origins = m.hotspot_origins;
    if (mix.block_s % c.dt_s != 0)
      throw ConfigError("config: mixture block_s must be a multiple of dt_s");
    return mixture_model(std::move(mix), c.dt_s);
  }
  if (m.type == "bootstrap") {
    std::vector<DemandTrace> days;
    for (const auto& p : m.days) days.push_back(load_trace_csv(p));
    return bootstrap_model(std::move(days), c.n, c.dt_s);
  }
  if (m.type == "file") return file_sample_model(m.path, c.n, c.horizon_T);
  throw ConfigError("config: unknown model type " + m.type);
}

}  // namespace

std::vector<std::string> known_controllers() {
  return {"reactive", "mpc-point", "mpc-point-lp", "mpc-saa", "mpc-saa-milp", "mpc-perfect"};
}

std::unique_ptr<Controller> make_controller(const std::string& name, const ScenarioConfig& c,
                                            const ScenarioSpec& spec) {
  if (c.controller_period_s != c.dt_s && name != "reactive")
    throw ConfigError("config: MPC controllers need controller_period_s == dt_s");
  if (name == "reactive") return reactive_controller(spec.net);
  if (name == "mpc-point")
    return mpc_point_controller(make_model(c, spec), spec.T, spec.costs, spec.net, true);
  if (name == "mpc-point-lp")
    return mpc_point_controller(make_model(c, spec), spec.T, spec.costs, spec.net, false);
  if (name == "mpc-saa")
    return mpc_controller(0, make_model(c, spec), spec.K, spec.T, spec.costs, spec.net, "mpc-saa");
  if (name == "mpc-saa-milp")
    return mpc_controller(1, make_model(c, spec), spec.K, spec.T, spec.costs, spec.net,
                          "mpc-saa-milp");
  if (name == "mpc-perfect") {
    auto model =
        perfect_model(spec.trace, spec.net.n, spec.net.dt_s, spec.duration_s + spec.drain_cap_s +
                                                                 spec.net.dt_s);
    return mpc_controller(0, std::move(model), 1, spec.T, spec.costs, spec.net, "mpc-perfect");
  }
  throw ConfigError("unknown controller '" + name + "'");
}

}  // namespace amod
