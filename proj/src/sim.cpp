#include "amod/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "amod/decomposed.hpp"
#include "amod/errors.hpp"
#include "amod/rng.hpp"
#include "amod/saa.hpp"

namespace amod {

void SimStats::finalize() {
  served = static_cast<long long>(waits_s.size());
  mean = median = p99 = 0;
  if (waits_s.empty()) return;
  std::vector<double> sorted = waits_s;
  std::sort(sorted.begin(), sorted.end());
  mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  const size_t nn = sorted.size();
  median = (nn % 2 == 1) ? sorted[nn / 2] : 0.5 * (sorted[nn / 2 - 1] + sorted[nn / 2]);
  const size_t rank = static_cast<size_t>(std::ceil(0.99 * static_cast<double>(nn)));
  p99 = sorted[std::min(nn - 1, rank == 0 ? 0 : rank - 1)];
}

std::string SimStats::to_json() const {
  nlohmann::json j;
  j["served"] = served;
  j["unserved"] = unserved;
  j["reb_tasks"] = reb_tasks;
  j["mean_wait_s"] = mean;
  j["median_wait_s"] = median;
  j["p99_wait_s"] = p99;
  j["waits_s"] = waits_s;
  return j.dump(2);
}

void SimStats::save_series_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("SimStats: cannot open " + path);
  out << "epoch,clock_s,waiting_customers,reb_tasks_issued\n";
  for (const auto& row : series)
    out << row.epoch << "," << row.clock_s << "," << row.waiting << "," << row.tasks_issued << "\n";
}

Simulator::Simulator(const ScenarioSpec& spec, std::uint64_t seed) : spec_(spec), seed_(seed) {
  const int n = spec.net.n;
  if (static_cast<int>(spec.initial.size()) != n)
    throw ConfigError("Simulator: initial_vehicles length must equal n");
  if (std::accumulate(spec.initial.begin(), spec.initial.end(), Count{0}) != spec.m)
    throw ConfigError("Simulator: initial_vehicles must sum to fleet_size");
  if (spec.tick_s < 1 || spec.period_s % spec.tick_s != 0)
    throw ConfigError("Simulator: controller period must be a multiple of the tick");
  if (spec.T < 1) throw ConfigError("Simulator: horizon must be at least one step");
  spec.trace.validate(n);
  idle_ = spec.initial;
  queues_.resize(n);
  pending_.resize(n);
}

Count Simulator::total_vehicles() const {
  Count total = static_cast<Count>(in_flight_.size());
  for (Count c : idle_) total += c;
  return total;
}

long long Simulator::waiting_customers() const {
  long long total = 0;
  for (const auto& q : queues_) total += static_cast<long long>(q.size());
  return total;
}

void Simulator::note_demand(const TripRecord& r) {
  const long long step = step_of_time(r.t_s, spec_.net.dt_s);
  while (static_cast<long long>(realized_.size()) < step)
    realized_.emplace_back(spec_.net.n, spec_.net.n, 0);
  realized_[step - 1](r.origin, r.dest) += 1;
}

void Simulator::depart(int origin, int dest, bool empty_move) {
  const long long travel = static_cast<long long>(spec_.net.tau(origin, dest)) * spec_.net.dt_s;
  in_flight_.push({clock_s_ + travel, seq_++, dest, empty_move});
}

void Simulator::serve(int station, const QueuedCustomer& customer) {
  const double wait = static_cast<double>(clock_s_ - customer.request_s);
  stats_.waits_s.push_back(wait);
  stats_.request_s.push_back(customer.request_s);
  stats_.assign_s.push_back(clock_s_);
  depart(station, customer.dest, false);
}

void Simulator::land_vehicles() {
  while (!in_flight_.empty() && in_flight_.top().arrival_s <= clock_s_) {
    const InFlight v = in_flight_.top();
    in_flight_.pop();
    const int here = v.dest;
    if (!queues_[here].empty()) {
      const QueuedCustomer c = queues_[here].front();
      queues_[here].pop_front();
      serve(here, c);
    } else if (!pending_[here].empty()) {
      const Task t = pending_[here].front();
      pending_[here].pop_front();
      depart(here, t.dest, true);
      ++stats_.reb_tasks;
    } else {
      ++idle_[here];
    }
  }
}

void Simulator::tick() {
  clock_s_ += spec_.tick_s;

  while (cursor_ < spec_.trace.records.size() &&
         spec_.trace.records[cursor_].t_s <= clock_s_ &&
         spec_.trace.records[cursor_].t_s < spec_.duration_s) {
    const TripRecord& r = spec_.trace.records[cursor_++];
    note_demand(r);
    if (idle_[r.origin] > 0) {
      --idle_[r.origin];
      serve(r.origin, {r.t_s, r.dest});
    } else {
      queues_[r.origin].push_back({r.t_s, r.dest});
    }
  }

  land_vehicles();

  if (total_vehicles() != spec_.m)
    throw SolveError("Simulator: vehicle conservation violated at clock " +
                     std::to_string(clock_s_));
}

EpochSnapshot Simulator::snapshot() const {
  const int n = spec_.net.n;
  EpochSnapshot snap;
  snap.epoch = epoch_;
  snap.T = spec_.T;

  Grid2<Count> incoming(n, spec_.T, 0);
  auto heap_copy = in_flight_;
  while (!heap_copy.empty()) {
    const InFlight v = heap_copy.top();
    heap_copy.pop();
    const long long remaining = v.arrival_s - clock_s_;
    const long long step = (remaining + spec_.net.dt_s - 1) / spec_.net.dt_s;  // ceil
    if (step >= 1 && step <= spec_.T) incoming(v.dest, static_cast<int>(step) - 1) += 1;
  }
  snap.fleet = FleetState(idle_, std::move(incoming), spec_.m);

  Grid2<Count> lam0(n, n, 0);
  for (int i = 0; i < n; ++i)
    for (const auto& c : queues_[i]) lam0(i, c.dest) += 1;
  snap.outstanding = OutstandingDemand(std::move(lam0));

  const long long current_step = clock_s_ / spec_.net.dt_s;
  const int lookback_steps =
      static_cast<int>(std::max<long long>(1, spec_.lookback_s / spec_.net.dt_s));
  Grid3<Count> recent(n, lookback_steps, 0);
  for (int t = 1; t <= lookback_steps; ++t) {
    const long long abs_step = current_step - lookback_steps + t;  // oldest first
    if (abs_step < 1 || abs_step > static_cast<long long>(realized_.size())) continue;
    const Grid2<Count>& bins = realized_[abs_step - 1];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) recent(i, j, t) = bins(i, j);
  }
  snap.rho.recent = std::move(recent);
  snap.rho.current_step = current_step;
  return snap;
}

void Simulator::run_epoch(Controller& controller) {
  for (auto& p : pending_) p.clear();  // unused tasks are discarded

  EpochSnapshot snap = snapshot();
  std::vector<Task> tasks;
  try {
    tasks = controller.act(snap, mix_seed(seed_, static_cast<std::uint64_t>(epoch_)));
  } catch (const std::exception& e) {
    throw SolveError("epoch " + std::to_string(epoch_) + " (" + controller.name() +
                     "): " + e.what());
  }

  for (const Task& t : tasks) {
    if (t.origin < 0 || t.origin >= spec_.net.n || t.dest < 0 || t.dest >= spec_.net.n)
      throw SolveError("epoch " + std::to_string(epoch_) + ": task references unknown station");
    if (t.origin == t.dest) continue;
    if (idle_[t.origin] > 0) {
      --idle_[t.origin];
      depart(t.origin, t.dest, true);
      ++stats_.reb_tasks;
    } else {
      pending_[t.origin].push_back(t);
    }
  }

  stats_.series.push_back({epoch_, static_cast<double>(clock_s_), waiting_customers(),
                           static_cast<long long>(tasks.size())});
  ++epoch_;
}

bool Simulator::finished() const {
  if (clock_s_ < spec_.duration_s) return false;
  if (waiting_customers() == 0) return true;
  return clock_s_ >= spec_.duration_s + spec_.drain_cap_s;
}

SimStats Simulator::run(Controller& controller) {
  run_epoch(controller);
  while (!finished()) {
    tick();
    if (finished()) break;
    if (clock_s_ % spec_.period_s == 0) run_epoch(controller);
  }
  stats_.unserved = waiting_customers();
  stats_.finalize();
  return stats_;
}

SimStats run_scenario(const ScenarioSpec& spec, Controller& controller, std::uint64_t seed) {
  Simulator sim(spec, seed);
  return sim.run(controller);
}

namespace {

class ReactiveController : public Controller {
 public:
  explicit ReactiveController(RoadNetwork net) : net_(std::move(net)) {
    max_tau_ = 1;
    for (int i = 0; i < net_.n; ++i)
      for (int j = 0; j < net_.n; ++j) max_tau_ = std::max(max_tau_, net_.tau(i, j));
  }

  std::vector<Task> act(const EpochSnapshot& snap, std::uint64_t) override {
    const int n = net_.n;
    if (n <= 1) return {};
    const std::vector<Count>& avail = snap.fleet.a;
    const Count total = std::accumulate(avail.begin(), avail.end(), Count{0});
    if (total == 0) return {};

    const Count base = total / n;
    const Count rem = total % n;
    std::vector<Count> surplus(n, 0), deficit(n, 0);
    bool any = false;
    for (int i = 0; i < n; ++i) {
      const Count target = base + (i < rem ? 1 : 0);
      surplus[i] = std::max<Count>(0, avail[i] - target);
      deficit[i] = std::max<Count>(0, target - avail[i]);
      any = any || surplus[i] > 0;
    }
    if (!any) return {};

    MatchingInstance inst = MatchingInstance::from_network(
        net_, surplus, deficit, static_cast<double>(n) * max_tau_ + 1.0);
    Solution sol = solve_lp(build_matching_lp(inst));
    std::vector<Count> flows = certify_integral(sol);

    std::vector<Task> tasks;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        for (Count q = 0; q < flows[matching_x_index(n, i, j)]; ++q)
          tasks.push_back({i, j, Task::Kind::rebalance});
      }
    return tasks;
  }

  std::string name() const override { return "reactive"; }

 private:
  RoadNetwork net_;
  int max_tau_;
};

class MpcController : public Controller {
 public:
  MpcController(int mode, std::shared_ptr<GenerativeModel> model, int K, int T, CostModel costs,
                RoadNetwork net, std::string name)
      : mode_(mode), model_(std::move(model)), K_(K), T_(T), costs_(std::move(costs)),
        net_(std::move(net)), name_(std::move(name)) {
    if (mode_ != 0 && mode_ != 1) throw ConfigError("mpc_controller: mode must be 0 or 1");
    if (K_ < 1) throw ConfigError("mpc_controller: K must be >= 1");
    if (name_.empty()) name_ = mode_ == 1 ? "mpc-saa-milp" : "mpc-saa";
  }

  std::vector<Task> act(const EpochSnapshot& snap, std::uint64_t epoch_seed) override {
    std::vector<DemandSample> samples = model_->sample(snap.rho, T_, K_, epoch_seed);
    BundledDemand bundled = bundle_samples(samples);
    std::vector<Task> tasks;
    if (mode_ == 1) {
      SaaSolution sol = solve_saa(snap.fleet, snap.outstanding, bundled, costs_, net_);
      append_first_step(tasks, sol.plan.x, Task::Kind::rebalance);
    } else {
      DecomposedSolution dec = solve_decomposed(snap.fleet, snap.outstanding.by_origin(), bundled,
                                                costs_, net_);
      for (int i = 0; i < net_.n; ++i)
        for (int j = 0; j < net_.n; ++j) {
          if (i == j) continue;
          for (Count q = 0; q < dec.matching(i, j); ++q)
            tasks.push_back({i, j, Task::Kind::service});
        }
      append_first_step(tasks, dec.rebalance.x, Task::Kind::rebalance);
    }
    return tasks;
  }

  std::string name() const override { return name_; }

 private:
  void append_first_step(std::vector<Task>& tasks, const Grid3<Count>& x, Task::Kind kind) {
    for (int i = 0; i < net_.n; ++i)
      for (int j = 0; j < net_.n; ++j) {
        if (i == j) continue;
        for (Count q = 0; q < x(i, j, 1); ++q) tasks.push_back({i, j, kind});
      }
  }

  int mode_;
  std::shared_ptr<GenerativeModel> model_;
  int K_, T_;
  CostModel costs_;
  RoadNetwork net_;
  std::string name_;
};

class MpcPointController : public Controller {
 public:
  MpcPointController(std::shared_ptr<GenerativeModel> model, int T, CostModel costs,
                     RoadNetwork net, bool milp_mode)
      : model_(std::move(model)), T_(T), costs_(std::move(costs)), net_(std::move(net)),
        milp_mode_(milp_mode) {}

  std::vector<Task> act(const EpochSnapshot& snap, std::uint64_t epoch_seed) override {
    Grid3<double> mean = model_->mean_forecast(snap.rho, T_);
    DemandSample point(net_.n, T_);
    for (int i = 0; i < net_.n; ++i)
      for (int j = 0; j < net_.n; ++j)
        for (int t = 1; t <= T_; ++t)
          point.lam(i, j, t) = static_cast<Count>(std::llround(mean(i, j, t)));
    BundledDemand bundled = bundle_samples({point});

    std::vector<Task> tasks;
    if (milp_mode_) {
      SaaSolution sol = solve_saa(snap.fleet, snap.outstanding, bundled, costs_, net_);
      append_first_step(tasks, sol.plan.x, Task::Kind::rebalance);
    } else {
      DecomposedSolution dec = solve_decomposed(snap.fleet, snap.outstanding.by_origin(), bundled,
                                                costs_, net_);
      for (int i = 0; i < net_.n; ++i)
        for (int j = 0; j < net_.n; ++j) {
          if (i == j) continue;
          for (Count q = 0; q < dec.matching(i, j); ++q)
            tasks.push_back({i, j, Task::Kind::service});
        }
      append_first_step(tasks, dec.rebalance.x, Task::Kind::rebalance);
    }
    (void)epoch_seed;
    return tasks;
  }

  std::string name() const override { return milp_mode_ ? "mpc-point" : "mpc-point-lp"; }

 private:
  void append_first_step(std::vector<Task>& tasks, const Grid3<Count>& x, Task::Kind kind) {
    for (int i = 0; i < net_.n; ++i)
      for (int j = 0; j < net_.n; ++j) {
        if (i == j) continue;
        for (Count q = 0; q < x(i, j, 1); ++q) tasks.push_back({i, j, kind});
      }
  }

  std::shared_ptr<GenerativeModel> model_;
  int T_;
  CostModel costs_;
  RoadNetwork net_;
  bool milp_mode_;
};

}  // namespace

std::unique_ptr<Controller> reactive_controller(const RoadNetwork& net) {
  return std::make_unique<ReactiveController>(net);
}

std::unique_ptr<Controller> mpc_controller(int mode, std::shared_ptr<GenerativeModel> model, int K,
                                           int T, CostModel costs, RoadNetwork net,
                                           std::string name) {
  return std::make_unique<MpcController>(mode, std::move(model), K, T, std::move(costs),
                                         std::move(net), std::move(name));
}

std::unique_ptr<Controller> mpc_point_controller(std::shared_ptr<GenerativeModel> model, int T,
                                                 CostModel costs, RoadNetwork net, bool milp_mode) {
  return std::make_unique<MpcPointController>(std::move(model), T, std::move(costs),
                                              std::move(net), milp_mode);
}

}  // namespace amod
