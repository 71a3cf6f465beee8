#include "amod/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "amod/enumerate.hpp"
#include "amod/errors.hpp"

namespace amod {

double DiscreteDistribution::mean_of(const std::vector<double>& support) const {
  double m = 0;
  for (size_t k = 0; k < p.size(); ++k) m += p[k] * support[k];
  return m;
}

namespace {

void check_normalized(const DiscreteDistribution& d, const char* who) {
  double sum = 0;
  for (double v : d.p) {
    if (v < 0) throw std::invalid_argument(std::string(who) + ": negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(who) + ": probabilities sum to " + std::to_string(sum));
}

}  // namespace

double chi_square_divergence(const DiscreteDistribution& p_hat, const DiscreteDistribution& p) {
  if (p_hat.p.size() != p.p.size())
    throw std::invalid_argument("chi_square_divergence: supports differ in size");
  check_normalized(p_hat, "chi_square_divergence(p_hat)");
  check_normalized(p, "chi_square_divergence(p)");
  double div = 0;
  for (size_t k = 0; k < p.p.size(); ++k) {
    if (p.p[k] <= 0) {
      if (p_hat.p[k] > 0) return std::numeric_limits<double>::infinity();
      continue;
    }
    const double r = 1.0 - p_hat.p[k] / p.p[k];
    div += p.p[k] * r * r;
  }
  return div;
}

double stochastic_error(double sigma, long long K, int n, int T, long long m, double delta) {
  if (K < 1) throw std::invalid_argument("stochastic_error: K must be >= 1");
  if (m < 2) throw std::invalid_argument("stochastic_error: m must be >= 2");
  if (delta <= 0 || delta > 1) throw std::invalid_argument("stochastic_error: bad delta");
  const double cover = static_cast<double>(n) * n * T * std::log(static_cast<double>(m));
  const double tail = std::log(1.0 / std::sqrt(delta));
  return 2.0 * sigma / std::sqrt(static_cast<double>(K)) * std::sqrt(cover + tail);
}

double model_error(const std::vector<double>& chi_vector, double var_norm) {
  if (var_norm < 0) throw std::invalid_argument("model_error: negative variance");
  double norm2 = 0;
  for (double c : chi_vector) {
    if (c < 0) throw std::invalid_argument("model_error: negative chi entry");
    norm2 += c * c;
  }
  return std::sqrt(norm2) * std::sqrt(var_norm);
}

long long required_samples(double epsilon, double sigma, int n, int T, long long m, double delta) {
  if (epsilon <= 0) throw std::invalid_argument("required_samples: epsilon must be positive");
  if (m < 2) throw std::invalid_argument("required_samples: m must be >= 2");
  if (delta <= 0 || delta > 1) throw std::invalid_argument("required_samples: bad delta");
  const double cover = static_cast<double>(n) * n * T * std::log(static_cast<double>(m));
  const double value = 64.0 * sigma * sigma / (epsilon * epsilon) * (cover - 0.5 * std::log(delta));
  return static_cast<long long>(std::ceil(value));
}

bool verify_minima_continuity(const std::vector<double>& f, const std::vector<double>& g) {
  if (f.empty() || f.size() != g.size())
    throw std::invalid_argument("verify_minima_continuity: empty or mismatched domain");
  size_t xf = 0, xg = 0;
  double gap = 0;
  for (size_t k = 0; k < f.size(); ++k) {
    if (f[k] < f[xf]) xf = k;
    if (g[k] < g[xg]) xg = k;
    gap = std::max(gap, std::abs(f[k] - g[k]));
  }
  return f[xg] <= f[xf] + 2.0 * gap;
}

double bundled_size_bound_real(long long K, int n, int T, double b, double delta) {
  if (K < 1 || n < 1 || T < 1 || b <= 0 || delta <= 0 || delta > 1)
    throw std::invalid_argument("bundled_size_bound: bad arguments");
  const double cells = static_cast<double>(n) * n * T;
  const double log_bound = 4.0 * b * cells * std::log(static_cast<double>(K) * cells / delta);
  return std::min(log_bound, static_cast<double>(K) * cells);
}

long long bundled_size_bound(long long K, int n, int T, double b, double delta) {
  return static_cast<long long>(std::ceil(bundled_size_bound_real(K, n, T, b, delta)));
}

ValidationInstance ValidationInstance::standard() {
  ValidationInstance inst;
  inst.net = RoadNetwork::uniform(2, 1, 1);
  inst.T = 2;
  inst.fleet = FleetState({1, 1}, Grid2<Count>(2, 2, 0), 2);
  Grid2<Count> lam0(2, 2, 0);
  lam0(0, 1) = 1;
  inst.outstanding = OutstandingDemand(lam0);
  inst.costs = CostModel::scaled(inst.net, 2, 0.05, 0.05, 1.0);
  inst.support_max = 3;
  inst.true_p.assign(8, DiscreteDistribution{{1.0, 0.0, 0.0, 0.0}});
  // demand flows 0 -> 1 with real spread; a light trickle back
  inst.true_p[inst.cell_index(0, 1, 1)] = DiscreteDistribution{{0.3, 0.4, 0.2, 0.1}};
  inst.true_p[inst.cell_index(0, 1, 2)] = DiscreteDistribution{{0.4, 0.3, 0.2, 0.1}};
  inst.true_p[inst.cell_index(1, 0, 1)] = DiscreteDistribution{{0.8, 0.2, 0.0, 0.0}};
  inst.true_p[inst.cell_index(1, 0, 2)] = DiscreteDistribution{{0.9, 0.1, 0.0, 0.0}};
  return inst;
}

double exact_objective(const ValidationInstance& inst, const Plan& plan) {
  const int n = inst.net.n, T = inst.T;
  double obj = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t) {
        obj += inst.costs.move(i, j, t) * static_cast<double>(plan.x(i, j, t)) +
               inst.costs.wait(i, j, t) * static_cast<double>(plan.w(i, j, t));
        const auto& dist = inst.true_p[inst.cell_index(i, j, t)];
        double expect_drop = 0;
        for (size_t v = 0; v < dist.p.size(); ++v) {
          const double shortfall = static_cast<double>(v) +
                                   static_cast<double>(plan.w(i, j, t)) -
                                   static_cast<double>(plan.x(i, j, t));
          if (shortfall > 0) expect_drop += dist.p[v] * shortfall;
        }
        obj += inst.costs.drop(i, j, t) * expect_drop;
      }
  return obj;
}

double variance_of_demand_norm(const ValidationInstance& inst, std::uint64_t seed) {
  const size_t cells = inst.true_p.size();
  double product = 1;
  bool enumerable = true;
  for (const auto& d : inst.true_p) {
    product *= static_cast<double>(d.p.size());
    if (product > 2e6) {
      enumerable = false;
      break;
    }
  }

  if (enumerable) {
    std::vector<size_t> idx(cells, 0);
    double e1 = 0, e2 = 0;
    while (true) {
      double prob = 1, norm2 = 0;
      for (size_t c = 0; c < cells; ++c) {
        prob *= inst.true_p[c].p[idx[c]];
        norm2 += static_cast<double>(idx[c]) * static_cast<double>(idx[c]);
      }
      if (prob > 0) {
        const double norm = std::sqrt(norm2);
        e1 += prob * norm;
        e2 += prob * norm2;
      }
      size_t c = 0;
      while (c < cells && ++idx[c] == inst.true_p[c].p.size()) idx[c++] = 0;
      if (c == cells) break;
    }
    return std::max(0.0, e2 - e1 * e1);
  }

  std::mt19937_64 rng(seed);
  const int draws = 100000;
  double e1 = 0, e2 = 0;
  std::vector<std::discrete_distribution<int>> dists;
  for (const auto& d : inst.true_p) dists.emplace_back(d.p.begin(), d.p.end());
  for (int q = 0; q < draws; ++q) {
    double norm2 = 0;
    for (auto& d : dists) {
      const double v = static_cast<double>(d(rng));
      norm2 += v * v;
    }
    e1 += std::sqrt(norm2);
    e2 += norm2;
  }
  e1 /= draws;
  e2 /= draws;
  return std::max(0.0, e2 - e1 * e1);
}

double bounded_sigma(const std::vector<DiscreteDistribution>& cells) {
  double sigma = 0;
  for (const auto& d : cells) {
    int lo = -1, hi = -1;
    for (size_t v = 0; v < d.p.size(); ++v)
      if (d.p[v] > 0) {
        if (lo < 0) lo = static_cast<int>(v);
        hi = static_cast<int>(v);
      }
    if (lo >= 0) sigma = std::max(sigma, (hi - lo) / 2.0);
  }
  return sigma;
}

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

}  // namespace

OracleReport verify_oracle_inequality(const ValidationInstance& inst,
                                      const std::vector<DiscreteDistribution>& p_hat, long long K,
                                      double delta, int trials, std::uint64_t seed) {
  const int n = inst.net.n, T = inst.T;
  if (static_cast<int>(p_hat.size()) != n * n * T)
    throw ShapeError("verify_oracle_inequality: p_hat must cover every cell");
  if (n > 2 || T > 2 || inst.support_max > 3)
    throw SolveError("verify_oracle_inequality: instance too large for exact enumeration");
  if (inst.fleet.m < 2) throw std::invalid_argument("verify_oracle_inequality: need m >= 2");

  OracleReport report;
  report.K = K;
  report.delta = delta;
  report.trials = trials;
  report.seed = seed;
  report.sigma = bounded_sigma(p_hat);
  report.var_norm = variance_of_demand_norm(inst);
  report.stochastic_term = stochastic_error(report.sigma, K, n, T, inst.fleet.m, delta);
  std::vector<double> chi(p_hat.size());
  for (size_t c = 0; c < p_hat.size(); ++c)
    chi[c] = std::sqrt(chi_square_divergence(p_hat[c], inst.true_p[c]));
  report.model_term = model_error(chi, report.var_norm);
  report.bound = report.stochastic_term + report.model_term;

  // exact minimizer of the population objective by exhaustive search
  double f_star = std::numeric_limits<double>::infinity();
  for_each_feasible_plan(inst.net, inst.fleet, inst.outstanding, T, [&](const Plan& p) {
    f_star = std::min(f_star, exact_objective(inst, p));
  });

  std::vector<std::discrete_distribution<int>> samplers;
  for (const auto& d : p_hat) samplers.emplace_back(d.p.begin(), d.p.end());

  int violations = 0;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(trial)));
    std::vector<DemandSample> samples;
    samples.reserve(K);
    for (long long k = 0; k < K; ++k) {
      DemandSample s(n, T);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int t = 1; t <= T; ++t)
            s.lam(i, j, t) = samplers[inst.cell_index(i, j, t)](rng);
      samples.push_back(std::move(s));
    }
    SaaSolution sol = solve_saa(inst.fleet, inst.outstanding, bundle_samples(samples), inst.costs,
                                inst.net);
    const double subopt = exact_objective(inst, sol.plan) - f_star;
    if (0.5 * subopt > report.bound + 1e-12) ++violations;
  }
  report.empirical_violation_rate = static_cast<double>(violations) / trials;
  report.pass = report.empirical_violation_rate <= delta;
  return report;
}

std::string OracleReport::to_json() const {
  nlohmann::json j;
  j["bound_terms"] = {{"stochastic_error", stochastic_term},
                      {"model_error", model_term},
                      {"total", bound}};
  j["empirical_violation_rate"] = empirical_violation_rate;
  j["trials"] = trials;
  j["seed"] = seed;
  j["K"] = K;
  j["delta"] = delta;
  j["sigma"] = sigma;
  j["var_norm"] = var_norm;
  j["pass"] = pass;
  return j.dump(2);
}

}  // namespace amod
