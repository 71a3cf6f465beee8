#pragma once

#include <functional>

#include "amod/netflow.hpp"

namespace amod {

// Visit every integer plan that satisfies flow conservation against the
// fleet and waiter conservation against the outstanding demand. Flows are
// enumerated step by step (arrivals at step t only depend on earlier
// departures because tau >= 1), waiter schedules as compositions per pair.
// Throws SolveError once more than `cap` plans have been visited; this is
// an exhaustive-search oracle for desk-scale instances only.
void for_each_feasible_plan(const RoadNetwork& net, const FleetState& fleet,
                            const OutstandingDemand& outstanding, int T,
                            const std::function<void(const Plan&)>& visit,
                            long long cap = 20'000'000);

}  // namespace amod
