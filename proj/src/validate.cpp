#include "amod/validate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "amod/demand.hpp"
#include "amod/errors.hpp"
#include "amod/rng.hpp"

namespace amod {

std::string SweepReport::line() const {
  std::ostringstream out;
  out << name << ": " << (pass() ? "pass" : "FAIL") << " (" << trials - failures << "/" << trials
      << " ok";
  if (worst > 0) out << ", worst " << worst;
  out << ")";
  if (!pass() && !detail.empty()) out << " -- " << detail;
  return out.str();
}

RoadNetwork random_network(std::mt19937_64& rng, int n, int dt_s) {
  Grid2<int> tau(n, n, 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) tau(i, j) = (i == j) ? 1 : 1 + static_cast<int>(rng() % 3);
  return RoadNetwork(n, std::move(tau), dt_s);
}

FleetState random_fleet(std::mt19937_64& rng, int n, int T, Count max_idle) {
  std::vector<Count> a(n);
  for (auto& v : a) v = static_cast<Count>(rng() % (max_idle + 1));
  Grid2<Count> incoming(n, T, 0);
  const int extras = static_cast<int>(rng() % (n + 1));
  for (int q = 0; q < extras; ++q)
    incoming(static_cast<int>(rng() % n), static_cast<int>(rng() % T)) += 1;
  Count m = std::accumulate(a.begin(), a.end(), Count{0});
  for (Count c : incoming.data()) m += c;
  return FleetState(std::move(a), std::move(incoming), m);
}

OutstandingDemand random_outstanding(std::mt19937_64& rng, int n, Count max_per_pair) {
  Grid2<Count> lam0(n, n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && rng() % 3 == 0) lam0(i, j) = static_cast<Count>(rng() % (max_per_pair + 1));
  return OutstandingDemand(std::move(lam0));
}

std::vector<DemandSample> random_samples(std::mt19937_64& rng, int n, int T, int K, double mean) {
  std::poisson_distribution<Count> pois(mean);
  std::vector<DemandSample> samples;
  samples.reserve(K);
  for (int k = 0; k < K; ++k) {
    DemandSample s(n, T);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int t = 1; t <= T; ++t)
          if (i != j) s.lam(i, j, t) = pois(rng);
    samples.push_back(std::move(s));
  }
  return samples;
}

LinearProgram build_saa_milp_naive(const FleetState& fleet, const OutstandingDemand& outstanding,
                                   const std::vector<DemandSample>& samples, const CostModel& costs,
                                   const RoadNetwork& net) {
  if (samples.empty()) throw std::invalid_argument("build_saa_milp_naive: no samples");
  const int n = net.n, T = samples.front().horizon();
  const double K = static_cast<double>(samples.size());

  LinearProgram lp;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t)
        lp.add_var(costs.move(i, j, t),
                   "x[" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(t) + "]",
                   true);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t)
        lp.add_var(costs.wait(i, j, t),
                   "w[" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(t) + "]",
                   true);

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
    for (int j = 0; j < n; ++j) {
      LinearProgram::Row row;
      for (int t = 1; t <= T; ++t) row.coef.emplace_back(saa_w_index(n, T, i, j, t), 1.0);
      row.rhs = static_cast<double>(outstanding.lambda0(i, j));
      lp.add_eq(std::move(row));
    }

  for (size_t k = 0; k < samples.size(); ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int t = 1; t <= T; ++t) {
          const Count value = samples[k].lam(i, j, t);
          if (value <= 0 && outstanding.lambda0(i, j) == 0) continue;
          const int u = lp.add_var(costs.drop(i, j, t) / K,
                                   "u" + std::to_string(k) + "[" + std::to_string(i) + "," +
                                       std::to_string(j) + "," + std::to_string(t) + "]",
                                   true);
          LinearProgram::Row row;
          row.coef.emplace_back(u, 1.0);
          row.coef.emplace_back(saa_x_index(n, T, i, j, t), 1.0);
          row.coef.emplace_back(saa_w_index(n, T, i, j, t), -1.0);
          row.rhs = static_cast<double>(value);
          lp.add_ge(std::move(row));
        }
  return lp;
}

Plan combine_decomposed(const DecomposedSolution& dec, const OutstandingDemand& outstanding,
                        const RoadNetwork& net, int T) {
  const int n = net.n;
  Plan plan = dec.rebalance;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) plan.x(i, j, 1) += dec.matching(i, j);

  // serve matched waiters at their vehicle's arrival step, drops at T
  for (int s = 0; s < n; ++s) {
    std::vector<int> arrivals;
    for (int i = 0; i < n; ++i) {
      const int when = (i == s) ? 1 : std::min(T, 1 + net.tau(i, s));
      for (Count q = 0; q < dec.matching(i, s); ++q) arrivals.push_back(when);
    }
    std::sort(arrivals.begin(), arrivals.end());
    size_t next = 0;
    for (int j = 0; j < n; ++j)
      for (Count q = 0; q < outstanding.lambda0(s, j); ++q) {
        const int when = (next < arrivals.size()) ? arrivals[next++] : T;
        plan.w(s, j, when) += 1;
      }
  }
  return plan;
}

SweepReport tum_integrality_sweep(int instances, int milp_crosschecks, std::uint64_t seed) {
  SweepReport report;
  report.name = "tum-integrality";
  report.trials = instances;
  for (int trial = 0; trial < instances; ++trial) {
    std::mt19937_64 rng(mix_seed(seed, trial));
    const int n = 2 + static_cast<int>(rng() % 4);
    const int T = 2 + static_cast<int>(rng() % 5);
    const int K = 1 + static_cast<int>(rng() % 8);
    RoadNetwork net = random_network(rng, n);
    FleetState fleet = random_fleet(rng, n, T, 2);
    auto samples = random_samples(rng, n, T, K);
    BundledDemand bundled = bundle_samples(samples);
    CostModel costs = CostModel::defaults(net, T);
    LinearProgram lp = build_rebalance_lp(fleet, bundled, costs, net);
    Solution sol = solve_lp(lp);
    if (sol.status != SolveStatus::optimal) {
      ++report.failures;
      if (report.detail.empty())
        report.detail = "trial " + std::to_string(trial) + ": LP " + to_string(sol.status);
      continue;
    }
    try {
      certify_integral(sol, 1e-6);
    } catch (const IntegralityError& e) {
      ++report.failures;
      report.worst = std::max(report.worst, std::abs(e.value() - std::round(e.value())));
      if (report.detail.empty())
        report.detail = "trial " + std::to_string(trial) + ": fractional " + e.variable();
      continue;
    }
    if (trial < milp_crosschecks) {
      LinearProgram milp = lp;
      milp.integer_mask.assign(milp.num_vars(), true);
      Solution isol = solve_milp(milp);
      const double gap = std::abs(isol.objective_value - sol.objective_value);
      if (isol.status != SolveStatus::optimal || gap > 1e-6) {
        ++report.failures;
        report.worst = std::max(report.worst, gap);
        if (report.detail.empty())
          report.detail = "trial " + std::to_string(trial) + ": milp gap " + std::to_string(gap);
      }
    }
  }
  return report;
}

SweepReport bundling_equivalence_sweep(int instances, std::uint64_t seed) {
  SweepReport report;
  report.name = "bundling-equivalence";
  report.trials = instances;
  for (int trial = 0; trial < instances; ++trial) {
    std::mt19937_64 rng(mix_seed(seed ^ 0xb0d1edULL, trial));
    const int n = 2 + static_cast<int>(rng() % 2);
    const int T = 2 + static_cast<int>(rng() % 2);
    const int K = 2 + static_cast<int>(rng() % 7);
    RoadNetwork net = random_network(rng, n);
    FleetState fleet = random_fleet(rng, n, T, 2);
    OutstandingDemand outstanding = random_outstanding(rng, n, 1);
    auto samples = random_samples(rng, n, T, K, 0.9);
    CostModel costs = CostModel::defaults(net, T);

    Solution bundled_sol = solve_milp(build_saa_milp(fleet, outstanding, bundle_samples(samples),
                                                     costs, net));
    Solution naive_sol = solve_milp(build_saa_milp_naive(fleet, outstanding, samples, costs, net));
    if (bundled_sol.status != SolveStatus::optimal || naive_sol.status != SolveStatus::optimal) {
      ++report.failures;
      if (report.detail.empty()) report.detail = "trial " + std::to_string(trial) + ": not optimal";
      continue;
    }
    const double gap = std::abs(bundled_sol.objective_value - naive_sol.objective_value);
    if (gap > 1e-9) {
      ++report.failures;
      report.worst = std::max(report.worst, gap);
      if (report.detail.empty())
        report.detail = "trial " + std::to_string(trial) + ": objectives differ by " +
                        std::to_string(gap);
    }
  }
  return report;
}

SweepReport lemma1_sweep(int pairs, std::uint64_t seed) {
  SweepReport report;
  report.name = "minima-continuity";
  report.trials = pairs;
  for (int trial = 0; trial < pairs; ++trial) {
    std::mt19937_64 rng(mix_seed(seed ^ 0x1e44a1ULL, trial));
    const size_t domain = 2 + rng() % 64;
    std::uniform_real_distribution<double> value(-100.0, 100.0);
    std::vector<double> f(domain), g(domain);
    for (size_t k = 0; k < domain; ++k) {
      f[k] = value(rng);
      // mix of independent values, shifts, and small perturbations
      switch (rng() % 3) {
        case 0: g[k] = value(rng); break;
        case 1: g[k] = f[k] + 17.0; break;
        default: g[k] = f[k] + 0.25 * value(rng); break;
      }
    }
    if (!verify_minima_continuity(f, g)) {
      ++report.failures;
      if (report.detail.empty()) report.detail = "trial " + std::to_string(trial);
    }
  }
  return report;
}

SweepReport bundle_bound_sweep(int trials, long long K, double delta, double required_fraction,
                               std::uint64_t seed) {
  SweepReport report;
  report.name = "bundle-size-bound";
  report.trials = trials;
  const int n = 2, T = 2;
  int holds = 0;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(mix_seed(seed ^ 0x5b0cedULL, trial));
    std::poisson_distribution<Count> pois(3.0);
    std::vector<DemandSample> samples;
    std::vector<double> pooled;
    pooled.reserve(static_cast<size_t>(K) * n * n * T);
    for (long long k = 0; k < K; ++k) {
      DemandSample s(n, T);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int t = 1; t <= T; ++t) {
            s.lam(i, j, t) = pois(rng);
            pooled.push_back(static_cast<double>(s.lam(i, j, t)));
          }
      samples.push_back(std::move(s));
    }
    const auto [sigma2, b] = estimate_subexponential(pooled);
    (void)sigma2;
    const long long bound = bundled_size_bound(K, n, T, b, delta);
    const long long unique = bundle_samples(samples).unique_count();
    if (unique <= bound) ++holds;
  }
  const double fraction = static_cast<double>(holds) / trials;
  if (fraction < required_fraction) {
    report.failures = trials - holds;
    report.detail = "bound held in " + std::to_string(fraction) + " < " +
                    std::to_string(required_fraction) + " of trials";
  }
  report.worst = 1.0 - fraction;
  return report;
}

SweepReport decomposition_sweep(int instances, std::uint64_t seed) {
  SweepReport report;
  report.name = "decomposition";
  report.trials = instances;
  for (int trial = 0; trial < instances; ++trial) {
    std::mt19937_64 rng(mix_seed(seed ^ 0xdec0deULL, trial));
    const int n = 2 + static_cast<int>(rng() % 2);
    const int T = 3 + static_cast<int>(rng() % 2);
    const int K = 1 + static_cast<int>(rng() % 4);
    RoadNetwork net = random_network(rng, n);
    FleetState fleet = random_fleet(rng, n, T, 2);
    OutstandingDemand outstanding = random_outstanding(rng, n, 1);
    if (outstanding.total() == 0) outstanding.lambda0(0, n - 1) = 1;
    auto samples = random_samples(rng, n, T, K, 0.8);
    BundledDemand bundled = bundle_samples(samples);
    CostModel costs = CostModel::defaults(net, T);

    // with waiting customers: the decomposed plan's joint-objective cost
    // must dominate the exact MILP optimum
    try {
      SaaSolution joint = solve_saa(fleet, outstanding, bundled, costs, net);
      DecomposedSolution dec = solve_decomposed(fleet, outstanding.by_origin(), bundled, costs, net);
      Plan combined = combine_decomposed(dec, outstanding, net, T);
      if (!check_flow_conservation(combined, fleet, net) ||
          !check_waiter_conservation(combined, outstanding))
        throw SolveError("combined decomposed plan infeasible");
      const double dec_cost = evaluate_objective(combined, samples, outstanding, costs);
      if (dec_cost < joint.objective - 1e-6) {
        ++report.failures;
        report.worst = std::max(report.worst, joint.objective - dec_cost);
        if (report.detail.empty())
          report.detail = "trial " + std::to_string(trial) + ": decomposed beat the joint optimum";
        continue;
      }
    } catch (const std::exception& e) {
      ++report.failures;
      if (report.detail.empty())
        report.detail = "trial " + std::to_string(trial) + ": " + e.what();
      continue;
    }

    // with no outstanding customers: rebalance LP is tight against the MILP
    OutstandingDemand none(n);
    SaaSolution joint0 = solve_saa(fleet, none, bundled, costs, net);
    Solution lp0 = solve_lp(build_rebalance_lp(fleet, bundled, costs, net));
    const double gap = std::abs(lp0.objective_value - joint0.objective);
    if (lp0.status != SolveStatus::optimal || gap > 1e-6) {
      ++report.failures;
      report.worst = std::max(report.worst, gap);
      if (report.detail.empty())
        report.detail = "trial " + std::to_string(trial) + ": tightness gap " + std::to_string(gap);
    }
  }
  return report;
}

ConvergenceReport saa_convergence_rate(const std::vector<long long>& Ks, int seeds,
                                       std::uint64_t seed, double slope_lo, double slope_hi) {
  // fixed instance: 2 stations, tight fleet, Poisson(3) demand
  RoadNetwork net = RoadNetwork::uniform(2, 1, 300);
  FleetState fleet({1, 0}, Grid2<Count>(2, 2, 0), 1);
  OutstandingDemand none(2);
  CostModel costs = CostModel::scaled(net, 2, 1.0, 1.0, 10.0);

  ConvergenceReport report;
  report.Ks = Ks;
  for (const long long K : Ks) {
    std::vector<double> objectives;
    objectives.reserve(seeds);
    for (int s = 0; s < seeds; ++s) {
      std::mt19937_64 rng(mix_seed(seed ^ 0xc04ce4ULL, mix_seed(K, s)));
      auto samples = random_samples(rng, 2, 2, static_cast<int>(K), 3.0);
      SaaSolution sol = solve_saa(fleet, none, bundle_samples(samples), costs, net);
      objectives.push_back(sol.objective);
    }
    double mean = std::accumulate(objectives.begin(), objectives.end(), 0.0) / seeds;
    double var = 0;
    for (double o : objectives) var += (o - mean) * (o - mean);
    var /= std::max(1, seeds - 1);
    report.dispersion.push_back(std::sqrt(var));
  }

  // least squares on (log K, log dispersion)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const size_t N = Ks.size();
  for (size_t q = 0; q < N; ++q) {
    const double x = std::log(static_cast<double>(Ks[q]));
    const double y = std::log(std::max(1e-12, report.dispersion[q]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  report.slope = (N * sxy - sx * sy) / (N * sxx - sx * sx);
  report.pass = report.slope >= slope_lo && report.slope <= slope_hi;
  return report;
}

}  // namespace amod
