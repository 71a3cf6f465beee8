#include "amod/enumerate.hpp"

#include "amod/errors.hpp"

namespace amod {

namespace {

struct Enumerator {
  const RoadNetwork& net;
  const FleetState& fleet;
  const OutstandingDemand& outstanding;
  int T;
  const std::function<void(const Plan&)>& visit;
  long long cap;
  long long visited = 0;
  Plan plan;
  std::vector<std::pair<int, int>> waiter_pairs;

  Enumerator(const RoadNetwork& n_, const FleetState& f_, const OutstandingDemand& o_, int T_,
             const std::function<void(const Plan&)>& v_, long long cap_)
      : net(n_), fleet(f_), outstanding(o_), T(T_), visit(v_), cap(cap_), plan(n_.n, T_) {
    for (int i = 0; i < net.n; ++i)
      for (int j = 0; j < net.n; ++j)
        if (outstanding.lambda0(i, j) > 0) waiter_pairs.emplace_back(i, j);
  }

  Count supply_at(int i, int t) const {
    Count s = fleet.incoming(i, t) + (t == 1 ? fleet.a[i] : 0);
    for (int j = 0; j < net.n; ++j) {
      const int t_launch = t - net.tau(j, i);
      if (t_launch >= 1) s += plan.x(j, i, t_launch);
    }
    return s;
  }

  // move to station i+1 within step t, then to the next step, then to waiters
  void advance(int i, int t) {
    if (i + 1 < net.n)
      flows_for_station(i + 1, t, 0, supply_at(i + 1, t));
    else if (t + 1 <= T)
      advance(-1, t + 1);
    else
      waiters(0);
  }

  // distribute `left` departures of station i at step t over destinations j..n-1
  void flows_for_station(int i, int t, int j, Count left) {
    if (j == net.n - 1) {
      plan.x(i, j, t) = left;
      advance(i, t);
      plan.x(i, j, t) = 0;
      return;
    }
    for (Count q = 0; q <= left; ++q) {
      plan.x(i, j, t) = q;
      flows_for_station(i, t, j + 1, left - q);
    }
    plan.x(i, j, t) = 0;
  }

  void waiters(size_t pair_idx) {
    if (pair_idx == waiter_pairs.size()) {
      if (++visited > cap) throw SolveError("for_each_feasible_plan: enumeration cap exceeded");
      visit(plan);
      return;
    }
    auto [i, j] = waiter_pairs[pair_idx];
    schedule_pair(pair_idx, i, j, 1, outstanding.lambda0(i, j));
  }

  void schedule_pair(size_t pair_idx, int i, int j, int t, Count left) {
    if (t == T) {
      plan.w(i, j, t) = left;
      waiters(pair_idx + 1);
      plan.w(i, j, t) = 0;
      return;
    }
    for (Count q = 0; q <= left; ++q) {
      plan.w(i, j, t) = q;
      schedule_pair(pair_idx, i, j, t + 1, left - q);
    }
    plan.w(i, j, t) = 0;
  }

  void run() {
    if (net.n == 0 || T < 1) throw ShapeError("for_each_feasible_plan: empty instance");
    advance(-1, 1);
  }
};

}  // namespace

void for_each_feasible_plan(const RoadNetwork& net, const FleetState& fleet,
                            const OutstandingDemand& outstanding, int T,
                            const std::function<void(const Plan&)>& visit, long long cap) {
  if (fleet.stations() != net.n || outstanding.stations() != net.n)
    throw ShapeError("for_each_feasible_plan: station count mismatch");
  if (fleet.horizon() < T) throw ShapeError("for_each_feasible_plan: fleet horizon too short");
  Enumerator e(net, fleet, outstanding, T, visit, cap);
  e.run();
}

}  // namespace amod
