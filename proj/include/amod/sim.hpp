#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "amod/demand.hpp"
#include "amod/netflow.hpp"

namespace amod {

// Empty-vehicle repositioning command for one vehicle. `service` tasks come
// from the matching stage (they point at stations with waiting customers),
// `rebalance` tasks from the horizon plan; the simulator executes both the
// same way.
struct Task {
  int origin = 0;
  int dest = 0;
  enum class Kind { rebalance, service } kind = Kind::rebalance;
};

// What a controller sees at an epoch boundary.
struct EpochSnapshot {
  FleetState fleet;
  OutstandingDemand outstanding;
  DemandHistory rho;
  int T = 0;
  long long epoch = 0;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::vector<Task> act(const EpochSnapshot& snapshot, std::uint64_t epoch_seed) = 0;
  virtual std::string name() const = 0;
};

struct SimStats {
  std::vector<double> waits_s;       // one entry per served customer
  std::vector<long long> request_s;  // request instants, aligned with waits_s
  std::vector<long long> assign_s;   // assignment instants, aligned with waits_s
  long long served = 0;
  long long unserved = 0;   // still queued when the run was cut off
  long long reb_tasks = 0;  // repositioning trips actually executed
  double mean = 0, median = 0, p99 = 0;

  struct EpochRow {
    long long epoch = 0;
    double clock_s = 0;
    long long waiting = 0;
    long long tasks_issued = 0;
  };
  std::vector<EpochRow> series;

  void finalize();  // recompute mean/median/p99 from waits_s
  std::string to_json() const;
  void save_series_csv(const std::string& path) const;
};

// Fully-resolved scenario (the CLI assembles this from a JSON config).
struct ScenarioSpec {
  RoadNetwork net;
  Count m = 0;
  std::vector<Count> initial;
  DemandTrace trace;
  long long duration_s = 0;
  int tick_s = 6;
  int period_s = 300;
  int T = 1;            // planning horizon in steps of net.dt_s
  int K = 1;
  CostModel costs;      // sized to T
  long long lookback_s = 14400;
  long long drain_cap_s = 7200;  // extra time allowed to empty the queues
};

// Discrete-event state, exposed so the tick semantics can be tested
// directly. Vehicles are fungible: idle counts per station plus a list of
// in-flight (vehicle, arrival) entries.
class Simulator {
 public:
  Simulator(const ScenarioSpec& spec, std::uint64_t seed);

  // One tick: advance the clock, inject trace arrivals (immediate
  // assignment when an idle vehicle is present), land in-flight vehicles
  // (queue head first, then pending tasks), in deterministic order.
  void tick();

  // Epoch boundary: discard unconsumed tasks, snapshot the state, let the
  // controller act, register its tasks. Controller exceptions halt the run.
  void run_epoch(Controller& controller);

  bool finished() const;
  SimStats run(Controller& controller);  // full loop; also drains queues

  // introspection
  long long clock_s() const { return clock_s_; }
  Count idle_at(int i) const { return idle_[i]; }
  Count total_vehicles() const;  // idle + in flight, must equal m always
  long long waiting_customers() const;
  EpochSnapshot snapshot() const;
  const SimStats& stats() const { return stats_; }

 private:
  struct QueuedCustomer {
    long long request_s;
    int dest;
  };
  struct InFlight {
    long long arrival_s;
    long long seq;
    int dest;
    bool empty_move;
  };
  struct Later {
    bool operator()(const InFlight& a, const InFlight& b) const {
      if (a.arrival_s != b.arrival_s) return a.arrival_s > b.arrival_s;
      return a.seq > b.seq;
    }
  };

  void land_vehicles();
  void depart(int origin, int dest, bool empty_move);
  void serve(int station, const QueuedCustomer& customer);
  void note_demand(const TripRecord& r);

  const ScenarioSpec& spec_;
  std::uint64_t seed_;
  long long clock_s_ = 0;
  long long seq_ = 0;
  long long epoch_ = 0;
  size_t cursor_ = 0;  // next trace record
  std::vector<Count> idle_;
  std::vector<std::deque<QueuedCustomer>> queues_;
  std::vector<std::deque<Task>> pending_;
  std::priority_queue<InFlight, std::vector<InFlight>, Later> in_flight_;
  std::vector<Grid2<Count>> realized_;  // demand bins per completed step
  SimStats stats_;
};

SimStats run_scenario(const ScenarioSpec& spec, Controller& controller, std::uint64_t seed);

// Tracks uniform vehicle availability: each epoch, surpluses above the
// uniform target are shipped to deficits through a min-cost transport with
// a prohibitive drop penalty.
std::unique_ptr<Controller> reactive_controller(const RoadNetwork& net);

// Receding-horizon controller: draws K samples from the model each epoch
// and issues the first step of the optimized plan. mode 1 solves the joint
// surrogate MILP; mode 0 the matching + rebalancing LP pair.
std::unique_ptr<Controller> mpc_controller(int mode, std::shared_ptr<GenerativeModel> model, int K,
                                           int T, CostModel costs, RoadNetwork net,
                                           std::string name = {});

// Certainty-equivalent variant: a single rounded mean forecast instead of
// samples. milp_mode selects the joint MILP (true) or the LP pair (false).
std::unique_ptr<Controller> mpc_point_controller(std::shared_ptr<GenerativeModel> model, int T,
                                                 CostModel costs, RoadNetwork net, bool milp_mode);

}  // namespace amod
