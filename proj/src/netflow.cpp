#include "amod/netflow.hpp"

#include <algorithm>
#include <numeric>

namespace amod {

RoadNetwork::RoadNetwork(int n_stations, Grid2<int> travel_steps, int step_seconds)
    : n(n_stations), tau(std::move(travel_steps)), dt_s(step_seconds) {
  if (n < 1) throw ShapeError("RoadNetwork: need at least one station");
  if (tau.rows() != n || tau.cols() != n) throw ShapeError("RoadNetwork: tau must be n x n");
  if (dt_s < 1) throw ShapeError("RoadNetwork: dt_s must be positive");
  for (int i = 0; i < n; ++i) {
    if (tau(i, i) != 1) throw ShapeError("RoadNetwork: self-loop travel time must be 1 step");
    for (int j = 0; j < n; ++j)
      if (tau(i, j) < 1) throw ShapeError("RoadNetwork: travel times must be >= 1 step");
  }
}

RoadNetwork RoadNetwork::uniform(int n_stations, int cross_steps, int step_seconds) {
  Grid2<int> tau(n_stations, n_stations, cross_steps);
  for (int i = 0; i < n_stations; ++i) tau(i, i) = 1;
  return RoadNetwork(n_stations, std::move(tau), step_seconds);
}

FleetState::FleetState(std::vector<Count> idle, Grid2<Count> incoming, Count fleet_size)
    : a(std::move(idle)), v(std::move(incoming)), m(fleet_size) {
  if (v.rows() != static_cast<int>(a.size())) throw ShapeError("FleetState: a and v disagree on n");
  for (Count c : a)
    if (c < 0) throw ShapeError("FleetState: negative idle count");
  for (Count c : v.data())
    if (c < 0) throw ShapeError("FleetState: negative incoming count");
  if (m < 0) throw ShapeError("FleetState: negative fleet size");
}

OutstandingDemand::OutstandingDemand(Grid2<Count> counts) : lambda0(std::move(counts)) {
  if (lambda0.rows() != lambda0.cols()) throw ShapeError("OutstandingDemand: matrix must be square");
  for (Count c : lambda0.data())
    if (c < 0) throw ShapeError("OutstandingDemand: negative count");
}

Count OutstandingDemand::total() const {
  return std::accumulate(lambda0.data().begin(), lambda0.data().end(), Count{0});
}

std::vector<Count> OutstandingDemand::by_origin() const {
  std::vector<Count> y(lambda0.rows(), 0);
  for (int i = 0; i < lambda0.rows(); ++i)
    for (int j = 0; j < lambda0.cols(); ++j) y[i] += lambda0(i, j);
  return y;
}

DemandSample::DemandSample(Grid3<Count> counts) : lam(std::move(counts)) {
  for (Count c : lam.data())
    if (c < 0) throw ShapeError("DemandSample: negative count");
}

CostModel::CostModel(Grid3<double> c_x, Grid3<double> c_w, Grid3<double> c_drop)
    : move(std::move(c_x)), wait(std::move(c_w)), drop(std::move(c_drop)) {
  if (!move.same_shape(wait) || !move.same_shape(drop))
    throw ShapeError("CostModel: tensors must share shape");
  for (double c : move.data())
    if (c < 0) throw ShapeError("CostModel: negative movement cost");
  for (double c : drop.data())
    if (c < 0) throw ShapeError("CostModel: negative drop cost");
  const int n = move.n(), T = move.horizon();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t) {
        if (wait(i, j, t) < 0) throw ShapeError("CostModel: negative waiting cost");
        if (t > 1 && wait(i, j, t) < wait(i, j, t - 1))
          throw ShapeError("CostModel: waiting cost must be non-decreasing in t");
      }
}

double CostModel::max_drop() const {
  double best = 0;
  for (double c : drop.data()) best = std::max(best, c);
  return best;
}

CostModel CostModel::scaled(const RoadNetwork& net, int T, double move_scale, double wait_scale,
                            double drop_cost) {
  const int n = net.n;
  Grid3<double> cx(n, T, 0.0), cw(n, T, 0.0), cd(n, T, drop_cost);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int t = 1; t <= T; ++t) {
        cx(i, j, t) = (i == j) ? 0.0 : move_scale * net.tau(i, j);
        cw(i, j, t) = wait_scale * static_cast<double>(t) * net.dt_s;
      }
  return CostModel(std::move(cx), std::move(cw), std::move(cd));
}

CostModel CostModel::defaults(const RoadNetwork& net, int T) {
  int max_tau = 1;
  for (int i = 0; i < net.n; ++i)
    for (int j = 0; j < net.n; ++j) max_tau = std::max(max_tau, net.tau(i, j));
  return scaled(net, T, 1.0, 1.0, 100.0 * max_tau);
}

std::vector<Count> availability(const FleetState& fleet, int t) {
  if (t < 1 || t > fleet.horizon()) throw std::out_of_range("availability: step outside horizon");
  std::vector<Count> s(fleet.stations());
  for (int i = 0; i < fleet.stations(); ++i)
    s[i] = fleet.incoming(i, t) + (t == 1 ? fleet.a[i] : 0);
  return s;
}

ConservationCheck check_flow_conservation(const Plan& plan, const FleetState& fleet,
                                          const RoadNetwork& net) {
  const int n = net.n, T = plan.T;
  if (plan.stations() != n || fleet.stations() != n)
    throw ShapeError("check_flow_conservation: station count mismatch");
  if (fleet.horizon() < T) throw ShapeError("check_flow_conservation: fleet horizon too short");

  for (int t = 1; t <= T; ++t) {
    std::vector<Count> supply = availability(fleet, t);
    for (int i = 0; i < n; ++i) {
      Count departures = 0, arrivals = 0;
      for (int j = 0; j < n; ++j) {
        departures += plan.x(i, j, t);
        const int t_launch = t - net.tau(j, i);
        if (t_launch >= 1) arrivals += plan.x(j, i, t_launch);
      }
      if (departures != supply[i] + arrivals) return {false, i, t};
    }
  }
  return {};
}

bool check_waiter_conservation(const Plan& plan, const OutstandingDemand& outstanding) {
  const int n = plan.stations();
  if (outstanding.stations() != n)
    throw ShapeError("check_waiter_conservation: station count mismatch");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Count served = 0;
      for (int t = 1; t <= plan.T; ++t) served += plan.w(i, j, t);
      if (served != outstanding.lambda0(i, j)) return false;
    }
  return true;
}

}  // namespace amod
