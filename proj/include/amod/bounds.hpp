#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amod/netflow.hpp"
#include "amod/saa.hpp"

namespace amod {

// Finite discrete distribution over an enumerated shared support; p[k] is
// the mass on support point k.
struct DiscreteDistribution {
  std::vector<double> p;

  double mean_of(const std::vector<double>& support) const;
};

// sum_k p(k) (1 - p_hat(k)/p(k))^2 over the shared support; +infinity when
// p_hat puts mass where p has none. Inputs must each sum to 1 within 1e-9.
double chi_square_divergence(const DiscreteDistribution& p_hat, const DiscreteDistribution& p);

// (2 sigma / sqrt(K)) sqrt(n^2 T log m + log(1/sqrt(delta))), natural logs.
double stochastic_error(double sigma, long long K, int n, int T, long long m, double delta);

// ||chi||_2 * sqrt(var_norm) where chi holds per-cell chi-divergences
// (square roots of the chi^2 values) and var_norm = Var_P(||lambda||_2).
double model_error(const std::vector<double>& chi_vector, double var_norm);

// Smallest sample count K_eps guaranteeing eps-suboptimality:
// ceil(64 sigma^2 eps^-2 (n^2 T log m - 0.5 log delta)).
long long required_samples(double epsilon, double sigma, int n, int T, long long m, double delta);

// Exact check of f(argmin g) <= f(argmin f) + 2 max|f - g| on a tabulated
// pair; false would mean the inequality's proof logic is broken.
bool verify_minima_continuity(const std::vector<double>& f, const std::vector<double>& g);

// Distinct-realization cap: min(4 b n^2 T log(K n^2 T / delta), K n^2 T).
double bundled_size_bound_real(long long K, int n, int T, double b, double delta);
long long bundled_size_bound(long long K, int n, int T, double b, double delta);

struct ErrorBudget {
  double stochastic_error = 0;
  double model_error = 0;
  double sigma2 = 0;
  double b = 0;
  long long K = 0;
  int n = 0;
  int T = 0;
  long long m = 0;
  double delta = 0;
};

// A tiny scenario with a fully known true demand distribution, small enough
// that the population objective and its exact minimizer are computable by
// enumeration. Per-cell distributions live over support {0, 1, ..., S}.
struct ValidationInstance {
  RoadNetwork net;
  FleetState fleet;
  OutstandingDemand outstanding;
  CostModel costs;
  int T = 0;
  std::vector<DiscreteDistribution> true_p;  // n*n*T cells, support 0..S
  int support_max = 0;

  int cell_index(int i, int j, int t) const { return (i * net.n + j) * T + (t - 1); }
  // n=2, T=2 reference instance with one outstanding customer
  static ValidationInstance standard();
};

struct OracleReport {
  double stochastic_term = 0;
  double model_term = 0;
  double bound = 0;
  double empirical_violation_rate = 0;
  int trials = 0;
  long long K = 0;
  double delta = 0;
  std::uint64_t seed = 0;
  double sigma = 0;
  double var_norm = 0;
  bool pass = false;
  std::string to_json() const;
};

// Monte Carlo check of the uniform-convergence bound: per trial, solve the
// surrogate on K samples from p_hat, compute the true-objective
// suboptimality against the exact minimizer, and count trials where half
// the suboptimality exceeds stochastic + model error. Throws SolveError
// when the instance is too large to enumerate exactly.
OracleReport verify_oracle_inequality(const ValidationInstance& instance,
                                      const std::vector<DiscreteDistribution>& p_hat,
                                      long long K, double delta, int trials, std::uint64_t seed);

// Exact population objective of a plan on a validation instance.
double exact_objective(const ValidationInstance& instance, const Plan& plan);

// Exact Var_P(||lambda||_2) by enumerating the product support (falls back
// to Monte Carlo with 1e5 draws when the product is too large).
double variance_of_demand_norm(const ValidationInstance& instance, std::uint64_t seed = 2024);

// Hoeffding-style sub-exponential sigma for a bounded product model:
// half the largest per-cell support range.
double bounded_sigma(const std::vector<DiscreteDistribution>& cells);

}  // namespace amod
