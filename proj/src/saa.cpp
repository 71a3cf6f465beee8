#include "amod/saa.hpp"

#include <algorithm>
#include <string>

#include "amod/errors.hpp"

namespace amod {

long long BundledDemand::unique_count() const {
  long long total = 0;
  for (const auto& c : cells) total += static_cast<long long>(c.size());
  return total;
}

long long BundledDemand::positive_unique_count() const {
  long long total = 0;
  for (const auto& c : cells)
    for (const auto& [value, count] : c)
      if (value > 0) ++total;
  return total;
}

BundledDemand bundle_samples(const std::vector<DemandSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("bundle_samples: no samples");
  const int n = samples.front().stations();
  const int T = samples.front().horizon();
  for (const auto& s : samples)
    if (s.stations() != n || s.horizon() != T) throw ShapeError("bundle_samples: shape mismatch");

  BundledDemand out;
  out.n = n;
  out.T = T;
  out.K = static_cast<Count>(samples.size());
  out.cells.resize(static_cast<size_t>(n) * n * T);

  std::vector<Count> values(samples.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t) {
        for (size_t k = 0; k < samples.size(); ++k) values[k] = samples[k].lam(i, j, t);
        std::sort(values.begin(), values.end());
        auto& cell = out.cell(i, j, t);
        for (size_t k = 0; k < values.size();) {
          size_t run = k;
          while (run < values.size() && values[run] == values[k]) ++run;
          cell.emplace_back(values[k], static_cast<Count>(run - k));
          k = run;
        }
      }
  return out;
}

namespace {

std::string tag3(const char* base, int i, int j, int t) {
  return std::string(base) + "[" + std::to_string(i) + "," + std::to_string(j) + "," +
         std::to_string(t) + "]";
}

void add_flow_conservation_rows(LinearProgram& lp, const FleetState& fleet, const RoadNetwork& net,
                                int T, int n) {
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
}

void check_dims(const FleetState& fleet, const BundledDemand& bundled, const CostModel& costs,
                const RoadNetwork& net) {
  const int n = net.n, T = bundled.T;
  if (fleet.stations() != n || bundled.n != n || costs.stations() != n)
    throw ShapeError("saa: station count mismatch");
  if (fleet.horizon() < T || costs.horizon() < T) throw ShapeError("saa: horizon mismatch");
}

}  // namespace

LinearProgram build_saa_milp(const FleetState& fleet, const OutstandingDemand& outstanding,
                             const BundledDemand& bundled, const CostModel& costs,
                             const RoadNetwork& net) {
  check_dims(fleet, bundled, costs, net);
  if (outstanding.stations() != net.n) throw ShapeError("saa: outstanding shape mismatch");
  const int n = net.n, T = bundled.T;
  const double K = static_cast<double>(bundled.K);

  LinearProgram lp;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t) lp.add_var(costs.move(i, j, t), tag3("x", i, j, t), true);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t) lp.add_var(costs.wait(i, j, t), tag3("w", i, j, t), true);

  add_flow_conservation_rows(lp, fleet, net, T, n);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      LinearProgram::Row row;
      for (int t = 1; t <= T; ++t) row.coef.emplace_back(saa_w_index(n, T, i, j, t), 1.0);
      row.rhs = static_cast<double>(outstanding.lambda0(i, j));
      lp.add_eq(std::move(row));
    }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t)
        for (const auto& [value, count] : bundled.cell(i, j, t)) {
          // a zero sample value can only force drops through w; skip the
          // variable when no outstanding customer exists for the pair
          if (value <= 0 && outstanding.lambda0(i, j) == 0) continue;
          const int u = lp.add_var(costs.drop(i, j, t) * static_cast<double>(count) / K,
                                   tag3("u", i, j, t) + "=" + std::to_string(value), true);
          LinearProgram::Row row;
          row.coef.emplace_back(u, 1.0);
          row.coef.emplace_back(saa_x_index(n, T, i, j, t), 1.0);
          row.coef.emplace_back(saa_w_index(n, T, i, j, t), -1.0);
          row.rhs = static_cast<double>(value);
          lp.add_ge(std::move(row));
        }
  return lp;
}

SaaSolution solve_saa(const FleetState& fleet, const OutstandingDemand& outstanding,
                      const BundledDemand& bundled, const CostModel& costs, const RoadNetwork& net,
                      const MilpOptions& opts) {
  LinearProgram lp = build_saa_milp(fleet, outstanding, bundled, costs, net);
  Solution sol = solve_milp(lp, opts);
  if (sol.status != SolveStatus::optimal)
    throw SolveError(std::string("solve_saa: surrogate is ") + to_string(sol.status));
  std::vector<Count> ints = certify_integral(sol, opts.int_tol);

  const int n = net.n, T = bundled.T;
  SaaSolution out;
  out.plan = Plan(n, T);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t) {
        out.plan.x(i, j, t) = ints[saa_x_index(n, T, i, j, t)];
        out.plan.w(i, j, t) = ints[saa_w_index(n, T, i, j, t)];
      }
  out.objective = sol.objective_value;
  out.raw = std::move(sol);

  if (!check_flow_conservation(out.plan, fleet, net))
    throw SolveError("solve_saa: plan violates flow conservation (solver bug)");
  if (!check_waiter_conservation(out.plan, outstanding))
    throw SolveError("solve_saa: plan violates waiter conservation (solver bug)");
  return out;
}

double evaluate_objective(const Plan& plan, const std::vector<DemandSample>& samples,
                          const OutstandingDemand& outstanding, const CostModel& costs) {
  if (samples.empty()) throw std::invalid_argument("evaluate_objective: no samples");
  const int n = plan.stations(), T = plan.T;
  if (costs.stations() != n || costs.horizon() < T || outstanding.stations() != n)
    throw ShapeError("evaluate_objective: shape mismatch");
  for (const auto& s : samples)
    if (s.stations() != n || s.horizon() != T) throw ShapeError("evaluate_objective: sample shape");

  double obj = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t)
        obj += costs.move(i, j, t) * static_cast<double>(plan.x(i, j, t)) +
               costs.wait(i, j, t) * static_cast<double>(plan.w(i, j, t));

  const double K = static_cast<double>(samples.size());
  for (const auto& s : samples)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int t = 1; t <= T; ++t) {
          const Count shortfall = s.lam(i, j, t) + plan.w(i, j, t) - plan.x(i, j, t);
          if (shortfall > 0) obj += costs.drop(i, j, t) * static_cast<double>(shortfall) / K;
        }
  return obj;
}

}  // namespace amod
