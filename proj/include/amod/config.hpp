#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "amod/sim.hpp"

namespace amod {

// Demand model plugged into the MPC controllers. "perfect" uses the
// scenario trace itself; "mixture"/"poisson" are parametric; "bootstrap"
// resamples historical trace files; "file" reads pre-generated samples.
struct ModelSpec {
  std::string type = "perfect";
  double mean_rate = 0;        // poisson: requests/sec per ordered pair
  double base_total_rate = 0;  // mixture
  double burst_rate = 0;
  double p_burst = 0;
  int block_s = 300;
  std::vector<int> hotspot_origins;
  std::vector<std::string> days;  // bootstrap trace files
  std::string path;               // sample file
};

// Mirrors the scenario JSON. Unknown keys are rejected so typos fail fast.
struct ScenarioConfig {
  int n = 0;
  int dt_s = 0;
  std::vector<std::vector<int>> travel_time;
  Count fleet_size = 0;
  std::vector<Count> initial_vehicles;
  std::string demand_trace;
  double c_x_scale = 1.0;
  double c_wait_scale = 1.0;
  double c_drop = 0;  // 0 picks the CostModel default
  int horizon_T = 1;
  int controller_period_s = 300;
  int tick_s = 6;
  int K = 1;
  std::uint64_t seed = 0;
  // optional extensions
  long long duration_s = 0;  // 0: trace end rounded up to a period
  long long lookback_s = 14400;
  long long drain_cap_s = 7200;
  ModelSpec model;
};

ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

// Resolve paths, load the trace, and build the runtime scenario.
ScenarioSpec make_scenario(const ScenarioConfig& config);

// Controller factory for the CLI names: reactive, mpc-point, mpc-point-lp,
// mpc-saa, mpc-saa-milp, mpc-perfect.
std::unique_ptr<Controller> make_controller(const std::string& name, const ScenarioConfig& config,
                                            const ScenarioSpec& spec);

std::vector<std::string> known_controllers();

}  // namespace amod
