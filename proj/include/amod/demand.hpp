#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "amod/netflow.hpp"

namespace amod {

// One trip request: integer seconds from scenario start, origin and
// destination station.
struct TripRecord {
  long long t_s = 0;
  int origin = 0;
  int dest = 0;
};

// Time-ordered request list; the realized ground truth a scenario plays back.
struct DemandTrace {
  std::vector<TripRecord> records;

  void validate(int n_stations) const;
  long long last_time_s() const { return records.empty() ? 0 : records.back().t_s; }
};

// CSV with header "t,origin,dest", one row per request.
DemandTrace load_trace_csv(const std::string& path);
void save_trace_csv(const DemandTrace& trace, const std::string& path);

// Request at second t falls into planning step floor(t / dt_s) + 1.
inline long long step_of_time(long long t_s, int dt_s) { return t_s / dt_s + 1; }

// Bin requests with absolute steps [first_step, first_step + T) into an
// n x n x T tensor (tensor slot t = absolute step first_step + t - 1).
DemandSample bin_trace(const DemandTrace& trace, int n, int dt_s, long long first_step, int T);

// What a controller knows when it plans: recent realized demand bins
// (oldest first) and how many whole steps have elapsed since scenario start.
struct DemandHistory {
  Grid3<Count> recent;
  long long current_step = 0;
};

// Conditional generative model over future demand windows. Samples are
// i.i.d. given (model state, history) and deterministic in the seed.
class GenerativeModel {
 public:
  virtual ~GenerativeModel() = default;
  virtual std::vector<DemandSample> sample(const DemandHistory& rho, int T, int K,
                                           std::uint64_t seed) const = 0;
  // Expected demand per cell for the same window (point forecasts).
  virtual Grid3<double> mean_forecast(const DemandHistory& rho, int T) const = 0;
  virtual std::string name() const = 0;
};

// Independent Poisson(mean_ijt) per cell; the window is assumed stationary
// (the mean tensor is indexed by in-window step).
std::shared_ptr<GenerativeModel> poisson_model(Grid3<double> mean);

// Resamples whole historical days: each sample picks a day uniformly and
// returns its bins for the matching time-of-day window.
std::shared_ptr<GenerativeModel> bootstrap_model(std::vector<DemandTrace> historical, int n,
                                                 int dt_s);

// Non-causal oracle: every sample is the realized future itself.
// duration_s declares how far the trace is authoritative; sampling a window
// that starts past it throws std::out_of_range.
std::shared_ptr<GenerativeModel> perfect_model(const DemandTrace& future, int n, int dt_s,
                                               long long duration_s);

// Reads externally produced sample sets from a flat CSV "k,i,j,t,count"
// (k 0-based, stations 0-based, t 1-based); serves the first K of them.
std::shared_ptr<GenerativeModel> file_sample_model(const std::string& path, int n, int T);

// Block-structured mixture: a base OD rate plus, per time block, a possible
// burst out of one hotspot origin. This is the synthetic high-variance
// process used by trace generation, exposed as a model so a controller can
// plan against the true distribution.
struct MixtureSpec {
  int n = 0;
  Grid2<double> base_rate;             // requests/sec per (i,j), 0 diagonal
  double burst_rate = 0;               // extra requests/sec out of the burst origin
  double p_burst = 0;                  // probability a block bursts
  int block_s = 300;                   // regime block length, seconds
  std::vector<int> hotspot_origins;    // candidate burst origins

  static MixtureSpec commuter(int n, double base_total_rate, double burst_rate, double p_burst,
                              int block_s);
};

std::shared_ptr<GenerativeModel> mixture_model(MixtureSpec spec, int dt_s);

// Realize one trace from the mixture process over [0, duration_s).
DemandTrace generate_mixture_trace(const MixtureSpec& spec, long long duration_s,
                                   std::uint64_t seed);

// Constant-rate uniform process over all ordered pairs.
DemandTrace generate_uniform_trace(int n, double total_rate, long long duration_s,
                                   std::uint64_t seed);

// Moment-based sub-exponential parameters (sigma^2, b) from scalar samples:
// sigma^2 is the sample variance, b = max(1, max |deviation| / log(count)).
std::pair<double, double> estimate_subexponential(const std::vector<double>& samples);

}  // namespace amod
