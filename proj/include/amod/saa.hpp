#pragma once

#include <utility>
#include <vector>

#include "amod/lpcore.hpp"
#include "amod/netflow.hpp"

namespace amod {

// Deduplicated demand samples: per (i,j,t) the distinct sampled values with
// multiplicities, sorted ascending. Merging equal realizations keeps the
// surrogate objective identical while the variable count grows with the
// number of distinct values instead of K.
struct BundledDemand {
  int n = 0;
  int T = 0;
  Count K = 0;
  std::vector<std::vector<std::pair<Count, Count>>> cells;  // (value, count)

  const std::vector<std::pair<Count, Count>>& cell(int i, int j, int t) const {
    return cells[(static_cast<size_t>(i) * n + j) * T + (t - 1)];
  }
  std::vector<std::pair<Count, Count>>& cell(int i, int j, int t) {
    return cells[(static_cast<size_t>(i) * n + j) * T + (t - 1)];
  }
  // total number of (value, count) entries across cells
  long long unique_count() const;
  // entries that actually become drop variables (value > 0)
  long long positive_unique_count() const;
};

BundledDemand bundle_samples(const std::vector<DemandSample>& samples);

// Variable layout shared by the surrogate builders: x block first, then w
// (full problem only), then one drop variable per retained bundled value.
inline int saa_x_index(int n, int T, int i, int j, int t) { return (i * n + j) * T + (t - 1); }
inline int saa_w_index(int n, int T, int i, int j, int t) {
  return n * n * T + (i * n + j) * T + (t - 1);
}

// Full surrogate MILP over (x, w, u): flow conservation rows, waiter rows,
// and u >= value + w - x per retained bundled value; x, w, u integer.
LinearProgram build_saa_milp(const FleetState& fleet, const OutstandingDemand& outstanding,
                             const BundledDemand& bundled, const CostModel& costs,
                             const RoadNetwork& net);

struct SaaSolution {
  Plan plan;
  double objective = 0;
  Solution raw;
};

// Solve the surrogate and return a certified integer plan that passes both
// conservation checkers.
SaaSolution solve_saa(const FleetState& fleet, const OutstandingDemand& outstanding,
                      const BundledDemand& bundled, const CostModel& costs,
                      const RoadNetwork& net, const MilpOptions& opts = {});

// Surrogate objective of a fixed plan with the drop variables eliminated
// analytically: c_x.x + c_w.w + (1/K) sum_k sum_ijt c_drop (lam + w - x)_+.
double evaluate_objective(const Plan& plan, const std::vector<DemandSample>& samples,
                          const OutstandingDemand& outstanding, const CostModel& costs);

}  // namespace amod
