// amod: stochastic MPC fleet control, simulation, and bound calculators.
//
// Subcommands: simulate, compare, bounds, gen-trace, selftest.
// Exit codes: 0 ok, 1 usage/config error, 2 runtime error, 3 selftest failure.

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <numeric>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "amod/bounds.hpp"
#include "amod/config.hpp"
#include "amod/errors.hpp"
#include "amod/rng.hpp"
#include "amod/validate.hpp"

namespace {

using namespace amod;

struct SimulateArgs {
  std::string config_path, controller = "reactive", out_path = "stats.json";
};

int cmd_simulate(const SimulateArgs& args) {
  ScenarioConfig config = load_config(args.config_path);
  ScenarioSpec spec = make_scenario(config);
  auto controller = make_controller(args.controller, config, spec);
  SimStats stats = run_scenario(spec, *controller, config.seed);

  std::ofstream out(args.out_path);
  if (!out) throw ConfigError("cannot open " + args.out_path);
  out << stats.to_json() << "\n";
  stats.save_series_csv(args.out_path + ".series.csv");
  std::cout << args.controller << ": served=" << stats.served << " mean=" << stats.mean
            << "s median=" << stats.median << "s p99=" << stats.p99
            << "s reb_tasks=" << stats.reb_tasks << " unserved=" << stats.unserved << "\n";
  return 0;
}

struct CompareArgs {
  std::string config_path, out_path = "compare.csv";
  std::vector<std::string> controllers;
  std::vector<std::uint64_t> seeds;
  int jobs = 0;
};

struct RunResult {
  std::string controller;
  std::uint64_t seed;
  SimStats stats;
};

int cmd_compare(const CompareArgs& args) {
  if (args.controllers.empty()) throw ConfigError("compare: need at least one controller");
  ScenarioConfig config = load_config(args.config_path);
  std::vector<std::uint64_t> seeds = args.seeds;
  if (seeds.empty()) seeds.push_back(config.seed);

  std::vector<std::pair<std::string, std::uint64_t>> runs;
  for (const auto& ctl : args.controllers)
    for (const auto s : seeds) runs.emplace_back(ctl, s);

  const int jobs = args.jobs > 0 ? args.jobs
                                 : std::max(1u, std::thread::hardware_concurrency());
  std::vector<RunResult> results(runs.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t idx; (idx = next.fetch_add(1)) < runs.size();) {
      const auto& [ctl, seed] = runs[idx];
      ScenarioConfig local = config;
      local.seed = seed;
      ScenarioSpec spec = make_scenario(local);
      auto controller = make_controller(ctl, local, spec);
      results[idx] = {ctl, seed, run_scenario(spec, *controller, seed)};
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ofstream out(args.out_path);
  if (!out) throw ConfigError("cannot open " + args.out_path);
  out << "controller,mean,median,p99,reb_tasks\n";
  std::cout << "controller,mean,median,p99,reb_tasks (over " << seeds.size() << " seeds)\n";
  for (const auto& ctl : args.controllers) {
    double mean = 0, median = 0, p99 = 0, tasks = 0;
    int count = 0;
    for (const auto& r : results)
      if (r.controller == ctl) {
        mean += r.stats.mean;
        median += r.stats.median;
        p99 += r.stats.p99;
        tasks += static_cast<double>(r.stats.reb_tasks);
        ++count;
      }
    mean /= count;
    median /= count;
    p99 /= count;
    tasks /= count;
    out << ctl << "," << mean << "," << median << "," << p99 << "," << tasks << "\n";
    std::cout << ctl << "," << mean << "," << median << "," << p99 << "," << tasks << "\n";
  }
  return 0;
}

struct BoundsArgs {
  double sigma = 1.0, delta = 0.1, epsilon = 1.0, var_norm = -1;
  long long K = 100, m = 4;
  int n = 2, T = 2;
  std::string chi_file;
};

int cmd_bounds(const BoundsArgs& args) {
  nlohmann::json j;
  j["stochastic_error"] = stochastic_error(args.sigma, args.K, args.n, args.T, args.m, args.delta);
  j["required_samples"] = required_samples(args.epsilon, args.sigma, args.n, args.T, args.m,
                                           args.delta);
  j["sigma"] = args.sigma;
  j["K"] = args.K;
  j["n"] = args.n;
  j["T"] = args.T;
  j["m"] = args.m;
  j["delta"] = args.delta;
  j["epsilon"] = args.epsilon;
  if (!args.chi_file.empty()) {
    std::ifstream in(args.chi_file);
    if (!in) throw ConfigError("bounds: cannot open " + args.chi_file);
    std::vector<double> chi;
    double v;
    while (in >> v) chi.push_back(v);
    if (args.var_norm < 0)
      throw ConfigError("bounds: --var-norm is required with --chi-file");
    j["model_error"] = model_error(chi, args.var_norm);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct GenTraceArgs {
  int n = 10;
  long long duration = 7200;
  double rate = 0.05;
  double burst_rate = 0;
  double p_burst = 0.5;
  int block_s = 300;
  std::string profile = "uniform";
  std::uint64_t seed = 1;
  std::string out_path = "trace.csv";
};

int cmd_gen_trace(const GenTraceArgs& args) {
  if (args.duration <= 0) throw ConfigError("gen-trace: duration must be positive");
  DemandTrace trace;
  if (args.profile == "uniform") {
    trace = generate_uniform_trace(args.n, args.rate, args.duration, args.seed);
  } else if (args.profile == "mixture") {
    MixtureSpec spec = MixtureSpec::commuter(args.n, args.rate, args.burst_rate, args.p_burst,
                                             args.block_s);
    trace = generate_mixture_trace(spec, args.duration, args.seed);
  } else {
    throw ConfigError("gen-trace: unknown profile " + args.profile);
  }
  save_trace_csv(trace, args.out_path);
  std::cout << "wrote " << trace.records.size() << " requests to " << args.out_path << "\n";
  return 0;
}

struct SelftestArgs {
  std::string inject_fault;
  int scale = 1;  // >1 shrinks the sweeps for a quicker pass
};

int cmd_selftest(const SelftestArgs& args) {
  const std::uint64_t seed = 20240901;
  bool ok = true;
  auto show = [&ok](const SweepReport& r) {
    std::cout << r.line() << "\n";
    ok = ok && r.pass();
  };

  if (args.inject_fault == "integrality") {
    // negative-path fixture: a deliberately fractional-vertex program must
    // be caught by the certifier and fail the selftest
    LinearProgram lp;
    lp.add_var(-1.0, "x[frac]");
    LinearProgram::Row row;
    row.coef = {{0, -2.0}};
    row.rhs = -1.0;  // x <= 0.5
    lp.add_ge(std::move(row));
    Solution sol = solve_lp(lp);
    try {
      certify_integral(sol);
      std::cout << "fault-injection: certify_integral missed the plant\n";
    } catch (const IntegralityError& e) {
      std::cout << "fault-injection: integrality violation at " << e.variable() << " = "
                << e.value() << "\n";
    }
    return 3;
  }
  if (!args.inject_fault.empty()) throw ConfigError("selftest: unknown fault " + args.inject_fault);

  const int d = std::max(1, args.scale);
  show(tum_integrality_sweep(200 / d, 20 / d, seed));
  show(bundling_equivalence_sweep(60 / d, seed));
  show(lemma1_sweep(1000 / d, seed));
  show(bundle_bound_sweep(60 / d, 640, 0.05, 0.95, seed));
  show(decomposition_sweep(30 / d, seed));

  ValidationInstance inst = ValidationInstance::standard();
  OracleReport oracle = verify_oracle_inequality(inst, inst.true_p, 120, 0.1, 60 / d, seed);
  std::cout << "oracle-inequality: " << (oracle.pass ? "pass" : "FAIL") << " (violation rate "
            << oracle.empirical_violation_rate << " <= delta " << oracle.delta << ", "
            << oracle.trials << " trials)\n";
  ok = ok && oracle.pass;

  std::cout << (ok ? "selftest: all checks passed\n" : "selftest: FAILURES\n");
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic MPC control for mobility-on-demand fleets"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Run one scenario with one controller");
  sim->add_option("--config", sim_args.config_path, "Scenario JSON")->required();
  sim->add_option("--controller", sim_args.controller, "reactive|mpc-point|mpc-point-lp|mpc-saa|mpc-saa-milp|mpc-perfect");
  sim->add_option("--out", sim_args.out_path, "Stats JSON output path");

  CompareArgs cmp_args;
  auto* cmp = app.add_subcommand("compare", "Run several controllers over several seeds");
  cmp->add_option("--config", cmp_args.config_path, "Scenario JSON")->required();
  cmp->add_option("--controllers", cmp_args.controllers, "Controller names")->required();
  cmp->add_option("--seeds", cmp_args.seeds, "Seeds (default: config seed)");
  cmp->add_option("--out", cmp_args.out_path, "Summary CSV output path");
  cmp->add_option("--jobs", cmp_args.jobs, "Parallel runs (default: hardware)");

  BoundsArgs bounds_args;
  auto* bnd = app.add_subcommand("bounds", "Evaluate the error-budget formulas");
  bnd->add_option("--sigma", bounds_args.sigma);
  bnd->add_option("--K", bounds_args.K);
  bnd->add_option("--n", bounds_args.n);
  bnd->add_option("--T", bounds_args.T);
  bnd->add_option("--m", bounds_args.m);
  bnd->add_option("--delta", bounds_args.delta);
  bnd->add_option("--epsilon", bounds_args.epsilon);
  bnd->add_option("--chi-file", bounds_args.chi_file, "Whitespace-separated chi entries");
  bnd->add_option("--var-norm", bounds_args.var_norm, "Var_P(||lambda||_2) for the model term");

  GenTraceArgs gen_args;
  auto* gen = app.add_subcommand("gen-trace", "Write a synthetic demand trace CSV");
  gen->add_option("--n", gen_args.n);
  gen->add_option("--duration", gen_args.duration, "Seconds");
  gen->add_option("--rate", gen_args.rate, "Base requests/sec");
  gen->add_option("--profile", gen_args.profile, "uniform|mixture");
  gen->add_option("--burst-rate", gen_args.burst_rate, "Mixture burst requests/sec");
  gen->add_option("--p-burst", gen_args.p_burst);
  gen->add_option("--block-s", gen_args.block_s);
  gen->add_option("--seed", gen_args.seed);
  gen->add_option("--out", gen_args.out_path);

  SelftestArgs self_args;
  auto* self = app.add_subcommand("selftest", "Run the property-validation suite");
  self->add_option("--inject-fault", self_args.inject_fault, "Test fixture: 'integrality'");
  self->add_option("--scale", self_args.scale, "Divide sweep sizes by this factor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (cmp->parsed()) return cmd_compare(cmp_args);
    if (bnd->parsed()) return cmd_bounds(bounds_args);
    if (gen->parsed()) return cmd_gen_trace(gen_args);
    if (self->parsed()) return cmd_selftest(self_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const TraceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
