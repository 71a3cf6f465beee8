#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amod/grid.hpp"

namespace amod {

using Count = long long;

// Road network over n station regions. tau(i,j) is the travel time from i
// to j in whole timesteps of dt_s seconds; tau(i,i) == 1 is the self-loop
// idling edge, so staying put is a unit-time zero-cost flow.
struct RoadNetwork {
  int n = 0;
  Grid2<int> tau;
  int dt_s = 0;

  RoadNetwork() = default;
  RoadNetwork(int n_stations, Grid2<int> travel_steps, int step_seconds);

  // Fully connected network with a single cross travel time.
  static RoadNetwork uniform(int n_stations, int cross_steps, int step_seconds);
};

// Vehicle availability over a planning horizon. a[i] are vehicles idle at
// the start of the window; v(i,t) become available at station i during
// step t (1-based); m is the total fleet size.
struct FleetState {
  std::vector<Count> a;
  Grid2<Count> v;  // n x T, column t-1 holds step t
  Count m = 0;

  FleetState() = default;
  FleetState(std::vector<Count> idle, Grid2<Count> incoming, Count fleet_size);

  int stations() const { return static_cast<int>(a.size()); }
  int horizon() const { return v.cols(); }
  Count incoming(int i, int t) const { return v(i, t - 1); }
  Count& incoming(int i, int t) { return v(i, t - 1); }
};

// Customers who requested (i -> j) before the window started and are still
// waiting.
struct OutstandingDemand {
  Grid2<Count> lambda0;

  OutstandingDemand() = default;
  explicit OutstandingDemand(int n) : lambda0(n, n, 0) {}
  explicit OutstandingDemand(Grid2<Count> counts);

  int stations() const { return lambda0.rows(); }
  Count total() const;
  std::vector<Count> by_origin() const;
};

// One realization of future demand: lam(i,j,t) trip requests per step.
struct DemandSample {
  Grid3<Count> lam;

  DemandSample() = default;
  DemandSample(int n, int T) : lam(n, T, 0) {}
  explicit DemandSample(Grid3<Count> counts);

  int stations() const { return lam.n(); }
  int horizon() const { return lam.horizon(); }
};

// A horizon plan: x(i,j,t) vehicles departing i toward j at step t,
// w(i,j,t) outstanding (i -> j) customers scheduled for pickup at step t.
struct Plan {
  Grid3<Count> x;
  Grid3<Count> w;
  int T = 0;
  long long origin_step = 0;  // absolute step the plan's t=1 corresponds to

  Plan() = default;
  Plan(int n, int horizon) : x(n, horizon, 0), w(n, horizon, 0), T(horizon) {}

  int stations() const { return x.n(); }
};

// Cost data for the planning objective: move = c_x (self-loops must be
// free), wait = c_w (non-decreasing in t per pair), drop = c_lambda.
struct CostModel {
  Grid3<double> move;
  Grid3<double> wait;
  Grid3<double> drop;

  CostModel() = default;
  CostModel(Grid3<double> c_x, Grid3<double> c_w, Grid3<double> c_drop);

  int stations() const { return move.n(); }
  int horizon() const { return move.horizon(); }
  double max_drop() const;

  // Scalar-fill convenience: c_x = move_scale * tau_ij per cross edge
  // (0 on self-loops), c_w = wait_scale * t * dt_s, c_lambda = drop_cost.
  static CostModel scaled(const RoadNetwork& net, int T, double move_scale, double wait_scale,
                          double drop_cost);
  // move_scale 1, wait_scale dt_s-linear, drop 100 * max tau.
  static CostModel defaults(const RoadNetwork& net, int T);
};

// s_it: supply available to depart from i at step t.
std::vector<Count> availability(const FleetState& fleet, int t);

struct ConservationCheck {
  bool ok = true;
  int station = -1;  // first violating (station, step) when !ok
  int step = -1;

  explicit operator bool() const { return ok; }
};

// Flow conservation at every (i, t): departures equal supply plus arrivals
// from flows launched tau_ji steps earlier; arrivals from before the window
// are already counted in v.
ConservationCheck check_flow_conservation(const Plan& plan, const FleetState& fleet,
                                          const RoadNetwork& net);

// Every outstanding customer is scheduled exactly once within the horizon.
bool check_waiter_conservation(const Plan& plan, const OutstandingDemand& outstanding);

}  // namespace amod
