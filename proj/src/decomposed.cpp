#include "amod/decomposed.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "amod/errors.hpp"

namespace amod {

MatchingInstance MatchingInstance::from_network(const RoadNetwork& net, std::vector<Count> z,
                                                std::vector<Count> y, double drop_penalty) {
  const int n = net.n;
  if (static_cast<int>(z.size()) != n || static_cast<int>(y.size()) != n)
    throw ShapeError("MatchingInstance: vector length mismatch");
  MatchingInstance inst;
  inst.z = std::move(z);
  inst.y = std::move(y);
  inst.drop_penalty = drop_penalty;
  inst.cost.assign(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inst.cost[matching_x_index(n, i, j)] = (i == j) ? 0.0 : net.tau(i, j);
  return inst;
}

LinearProgram build_matching_lp(const MatchingInstance& inst) {
  const int n = inst.stations();
  if (static_cast<int>(inst.y.size()) != n || static_cast<int>(inst.cost.size()) != static_cast<size_t>(n) * n)
    throw ShapeError("build_matching_lp: inconsistent instance");
  for (Count c : inst.z)
    if (c < 0) throw ShapeError("build_matching_lp: negative vehicle count");
  for (Count c : inst.y)
    if (c < 0) throw ShapeError("build_matching_lp: negative customer count");

  LinearProgram lp;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      lp.add_var(inst.cost[matching_x_index(n, i, j)],
                 "x[" + std::to_string(i) + "->" + std::to_string(j) + "]");
  for (int i = 0; i < n; ++i) lp.add_var(inst.drop_penalty, "u[" + std::to_string(i) + "]");

  // u_s + (Ax)_s >= y_s - z_s, with (Ax)_s = inflow - outflow at s
  for (int s = 0; s < n; ++s) {
    LinearProgram::Row row;
    row.coef.emplace_back(matching_u_index(n, s), 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        double a = 0;
        if (j == s) a += 1.0;
        if (i == s) a -= 1.0;
        if (a != 0) row.coef.emplace_back(matching_x_index(n, i, j), a);
      }
    row.rhs = static_cast<double>(inst.y[s] - inst.z[s]);
    lp.add_ge(std::move(row));
  }

  // a station cannot dispatch more vehicles than it holds
  for (int i = 0; i < n; ++i) {
    LinearProgram::Row row;
    for (int j = 0; j < n; ++j) row.coef.emplace_back(matching_x_index(n, i, j), -1.0);
    row.rhs = static_cast<double>(-inst.z[i]);
    lp.add_ge(std::move(row));
  }
  return lp;
}

LinearProgram build_rebalance_lp(const FleetState& fleet, const BundledDemand& bundled,
                                 const CostModel& costs, const RoadNetwork& net) {
  const int n = net.n, T = bundled.T;
  if (fleet.stations() != n || bundled.n != n || costs.stations() != n)
    throw ShapeError("build_rebalance_lp: station count mismatch");
  if (fleet.horizon() < T || costs.horizon() < T)
    throw ShapeError("build_rebalance_lp: horizon mismatch");
  const double K = static_cast<double>(bundled.K);

  LinearProgram lp;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t)
        lp.add_var(costs.move(i, j, t),
                   "x[" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(t) + "]");

  for (int i = 0; i < n; ++i)
    for (int t = 1; t <= T; ++t) {
      LinearProgram::Row row;
      for (int j = 0; j < n; ++j) {
        row.coef.emplace_back(saa_x_index(n, T, i, j, t), 1.0);
        const int t_launch = t - net.tau(j, i);
        if (t_launch >= 1) row.coef.emplace_back(saa_x_index(n, T, j, i, t_launch), -1.0);
      }
      row.rhs = static_cast<double>(fleet.incoming(i, t) + (t == 1 ? fleet.a[i] : 0));
      lp.add_eq(std::move(row));
    }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t)
        for (const auto& [value, count] : bundled.cell(i, j, t)) {
          if (value <= 0) continue;  // (value - x)_+ is 0 whenever x >= 0
          const int u = lp.add_var(costs.drop(i, j, t) * static_cast<double>(count) / K,
                                   "u[" + std::to_string(i) + "," + std::to_string(j) + "," +
                                       std::to_string(t) + "]=" + std::to_string(value));
          LinearProgram::Row row;
          row.coef.emplace_back(u, 1.0);
          row.coef.emplace_back(saa_x_index(n, T, i, j, t), 1.0);
          row.rhs = static_cast<double>(value);
          lp.add_ge(std::move(row));
        }
  return lp;
}

DecomposedSolution solve_decomposed(const FleetState& fleet,
                                    const std::vector<Count>& waiting_by_station,
                                    const BundledDemand& bundled, const CostModel& costs,
                                    const RoadNetwork& net, const SimplexOptions& opts) {
  const int n = net.n, T = bundled.T;
  if (static_cast<int>(waiting_by_station.size()) != n)
    throw ShapeError("solve_decomposed: waiting vector length mismatch");

  MatchingInstance inst =
      MatchingInstance::from_network(net, fleet.a, waiting_by_station, costs.max_drop());
  LinearProgram match_lp = build_matching_lp(inst);
  Solution match_sol = solve_lp(match_lp, opts);
  if (match_sol.status != SolveStatus::optimal)
    throw SolveError(std::string("solve_decomposed: matching LP is ") + to_string(match_sol.status));
  std::vector<Count> match_ints = certify_integral(match_sol);

  DecomposedSolution out;
  out.matching = Grid2<Count>(n, n, 0);
  out.dropped.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out.matching(i, j) = match_ints[matching_x_index(n, i, j)];
    out.dropped[i] = match_ints[matching_u_index(n, i)];
  }
  out.matching_objective = match_sol.objective_value;

  // Vehicles assigned to waiters leave the idle pool; a vehicle moved i -> j
  // departs in step 1 and is usable at j from step 1 + tau_ij. The free
  // diagonal can carry spurious flow at degenerate vertices, so only keep
  // self-assignments that serve actual waiters.
  FleetState residual = fleet;
  for (int j = 0; j < n; ++j) {
    Count need = waiting_by_station[j];
    std::vector<int> origins(n);
    std::iota(origins.begin(), origins.end(), 0);
    std::stable_sort(origins.begin(), origins.end(), [&](int a, int b) {
      const int ta = (a == j) ? 0 : net.tau(a, j);
      const int tb = (b == j) ? 0 : net.tau(b, j);
      if (ta != tb) return ta < tb;
      return a < b;
    });
    for (int i : origins) {
      Count flow = out.matching(i, j);
      if (flow <= 0) continue;
      if (i == j) {
        const Count used = std::min(flow, need);
        out.matching(i, j) = used;  // drop the idle-in-place excess
        if (used > 0) {
          residual.a[j] -= used;
          const int back = 1 + net.tau(j, j);
          if (back <= residual.horizon()) residual.incoming(j, back) += used;
          need -= used;
        }
      } else {
        residual.a[i] -= flow;
        const int arrive = 1 + net.tau(i, j);
        if (arrive <= residual.horizon()) residual.incoming(j, arrive) += flow;
        need -= std::min(need, flow);
      }
    }
  }
  for (int i = 0; i < n; ++i)
    if (residual.a[i] < 0) throw SolveError("solve_decomposed: matching over-consumed a station");
  out.residual = residual;

  LinearProgram reb_lp = build_rebalance_lp(residual, bundled, costs, net);
  Solution reb_sol = solve_lp(reb_lp, opts);
  if (reb_sol.status != SolveStatus::optimal)
    throw SolveError(std::string("solve_decomposed: rebalance LP is ") + to_string(reb_sol.status));
  std::vector<Count> reb_ints = certify_integral(reb_sol);

  out.rebalance = Plan(n, T);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t) out.rebalance.x(i, j, t) = reb_ints[saa_x_index(n, T, i, j, t)];
  out.rebalance_objective = reb_sol.objective_value;

  if (!check_flow_conservation(out.rebalance, residual, net))
    throw SolveError("solve_decomposed: rebalance plan violates conservation (solver bug)");
  return out;
}

}  // namespace amod
