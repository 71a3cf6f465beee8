#pragma once

#include <vector>

#include "amod/lpcore.hpp"
#include "amod/netflow.hpp"
#include "amod/saa.hpp"

namespace amod {

// One-shot assignment of available vehicles to waiting customers: z[i]
// vehicles at station i, y[i] customers waiting at i, cost[i*n+j] to move a
// vehicle i -> j (0 on the diagonal), drop_penalty per customer left behind.
struct MatchingInstance {
  std::vector<Count> z;
  std::vector<Count> y;
  std::vector<double> cost;
  double drop_penalty = 0;

  int stations() const { return static_cast<int>(z.size()); }
  static MatchingInstance from_network(const RoadNetwork& net, std::vector<Count> z,
                                       std::vector<Count> y, double drop_penalty);
};

// min c.x + drop_penalty.1'u  s.t.  u >= y - (Ax + z), u >= 0, x >= 0,
// sum_j x[i->j] <= z[i];  A is the station-balance operator (inflow minus
// outflow). Variables: x (n^2, row-major), then u (n).
LinearProgram build_matching_lp(const MatchingInstance& inst);

inline int matching_x_index(int n, int i, int j) { return i * n + j; }
inline int matching_u_index(int n, int i) { return n * n + i; }

// Rebalancing relaxation with w = 0: continuous x and drop variables over
// the horizon, flow conservation rows, u >= value - x per positive bundled
// value. Totally unimodular, so LP vertices are integral.
LinearProgram build_rebalance_lp(const FleetState& fleet, const BundledDemand& bundled,
                                 const CostModel& costs, const RoadNetwork& net);

struct DecomposedSolution {
  Grid2<Count> matching;            // vehicles moved i -> j for waiting customers
  std::vector<Count> dropped;       // waiters left unserved by the matching
  Plan rebalance;                   // horizon plan for the residual fleet
  FleetState residual;              // fleet state the rebalance LP was solved on
  double matching_objective = 0;
  double rebalance_objective = 0;
};

// Two-stage solve: bipartite matching on current idle vehicles first, then
// the rebalancing LP on the residual fleet. Matched vehicles leave a[] and
// re-enter v at their destination when they arrive (step 1 + tau, since the
// matching move occupies the step-1 departure slot).
DecomposedSolution solve_decomposed(const FleetState& fleet,
                                    const std::vector<Count>& waiting_by_station,
                                    const BundledDemand& bundled, const CostModel& costs,
                                    const RoadNetwork& net, const SimplexOptions& opts = {});

}  // namespace amod
