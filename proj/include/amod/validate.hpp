#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "amod/bounds.hpp"
#include "amod/decomposed.hpp"
#include "amod/saa.hpp"

namespace amod {

struct SweepReport {
  std::string name;
  int trials = 0;
  int failures = 0;
  double worst = 0;     // largest violation magnitude seen
  std::string detail;   // description of the first failure
  bool pass() const { return failures == 0; }
  std::string line() const;
};

// Random desk-scale instances (used by the sweeps and the test suites).
RoadNetwork random_network(std::mt19937_64& rng, int n, int dt_s = 300);
FleetState random_fleet(std::mt19937_64& rng, int n, int T, Count max_idle = 3);
OutstandingDemand random_outstanding(std::mt19937_64& rng, int n, Count max_per_pair = 2);
std::vector<DemandSample> random_samples(std::mt19937_64& rng, int n, int T, int K,
                                         double mean = 1.2);

// Reference formulation with one drop variable per (sample, cell); the
// bundled builder must match its optimum exactly.
LinearProgram build_saa_milp_naive(const FleetState& fleet, const OutstandingDemand& outstanding,
                                   const std::vector<DemandSample>& samples, const CostModel& costs,
                                   const RoadNetwork& net);

// Map a two-stage solution onto a single feasible plan of the joint
// problem: matching moves become step-1 flows, matched waiters get served
// at their vehicle's arrival step, dropped waiters at the horizon end.
Plan combine_decomposed(const DecomposedSolution& dec, const OutstandingDemand& outstanding,
                        const RoadNetwork& net, int T);

// Rebalancing LPs solved by simplex must come out integral; a subsample is
// cross-checked against branch-and-bound for objective agreement.
SweepReport tum_integrality_sweep(int instances, int milp_crosschecks, std::uint64_t seed);

// Bundled and naive surrogates agree in optimal objective within 1e-9.
SweepReport bundling_equivalence_sweep(int instances, std::uint64_t seed);

// f(argmin g) <= f(argmin f) + 2||f-g||_inf on random tabulated pairs.
SweepReport lemma1_sweep(int pairs, std::uint64_t seed);

// Unique bundled values vs the distinct-realization cap with parameters
// fitted from the drawn samples; must hold in >= required_fraction of trials.
SweepReport bundle_bound_sweep(int trials, long long K, double delta, double required_fraction,
                               std::uint64_t seed);

// Joint MILP optimum lower-bounds the decomposed solution's cost; with no
// outstanding customers the rebalancing LP matches the MILP exactly.
SweepReport decomposition_sweep(int instances, std::uint64_t seed);

struct ConvergenceReport {
  std::vector<long long> Ks;
  std::vector<double> dispersion;  // stddev of the SAA optimum across seeds
  double slope = 0;                // log-log regression slope
  bool pass = false;
};

// Dispersion of the surrogate optimum as a function of K on a fixed
// Poisson instance; the regression slope should sit near -1/2.
ConvergenceReport saa_convergence_rate(const std::vector<long long>& Ks, int seeds,
                                       std::uint64_t seed, double slope_lo = -0.7,
                                       double slope_hi = -0.3);

}  // namespace amod
