#include "amod/demand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "amod/errors.hpp"

namespace amod {

void DemandTrace::validate(int n_stations) const {
  long long prev = 0;
  for (const auto& r : records) {
    if (r.t_s < prev) throw TraceError("DemandTrace: request times must be non-decreasing");
    if (r.origin < 0 || r.origin >= n_stations || r.dest < 0 || r.dest >= n_stations)
      throw TraceError("DemandTrace: station index out of range");
    prev = r.t_s;
  }
}

DemandTrace load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("load_trace_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw TraceError("load_trace_csv: empty file " + path);
  if (line != "t,origin,dest")
    throw TraceError("load_trace_csv: bad header '" + line + "' in " + path);
  DemandTrace trace;
  long long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    TripRecord r;
    char c1, c2;
    std::istringstream ss(line);
    if (!(ss >> r.t_s >> c1 >> r.origin >> c2 >> r.dest) || c1 != ',' || c2 != ',')
      throw TraceError("load_trace_csv: bad row " + std::to_string(lineno) + " in " + path);
    trace.records.push_back(r);
  }
  long long prev = trace.records.empty() ? 0 : trace.records.front().t_s;
  for (const auto& r : trace.records) {
    if (r.t_s < prev) throw TraceError("load_trace_csv: rows out of order in " + path);
    prev = r.t_s;
  }
  return trace;
}

void save_trace_csv(const DemandTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw TraceError("save_trace_csv: cannot open " + path);
  out << "t,origin,dest\n";
  for (const auto& r : trace.records) out << r.t_s << "," << r.origin << "," << r.dest << "\n";
  if (!out) throw TraceError("save_trace_csv: write failed for " + path);
}

DemandSample bin_trace(const DemandTrace& trace, int n, int dt_s, long long first_step, int T) {
  DemandSample out(n, T);
  for (const auto& r : trace.records) {
    const long long step = step_of_time(r.t_s, dt_s);
    if (step < first_step || step >= first_step + T) continue;
    out.lam(r.origin, r.dest, static_cast<int>(step - first_step + 1)) += 1;
  }
  return out;
}

namespace {

class PoissonModel : public GenerativeModel {
 public:
  explicit PoissonModel(Grid3<double> mean) : mean_(std::move(mean)) {
    for (double m : mean_.data())
      if (!(m >= 0) || !std::isfinite(m))
        throw std::invalid_argument("poisson_model: means must be finite and non-negative");
  }

  std::vector<DemandSample> sample(const DemandHistory&, int T, int K,
                                   std::uint64_t seed) const override {
    if (T > mean_.horizon()) throw std::out_of_range("poisson_model: horizon exceeds mean tensor");
    std::mt19937_64 rng(seed);
    std::vector<DemandSample> out;
    out.reserve(K);
    const int n = mean_.n();
    for (int k = 0; k < K; ++k) {
      DemandSample s(n, T);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int t = 1; t <= T; ++t) {
            const double m = mean_(i, j, t);
            if (m > 0) {
              std::poisson_distribution<long long> d(m);
              s.lam(i, j, t) = d(rng);
            }
          }
      out.push_back(std::move(s));
    }
    return out;
  }

  Grid3<double> mean_forecast(const DemandHistory&, int T) const override {
    if (T > mean_.horizon()) throw std::out_of_range("poisson_model: horizon exceeds mean tensor");
    Grid3<double> out(mean_.n(), T, 0.0);
    for (int i = 0; i < mean_.n(); ++i)
      for (int j = 0; j < mean_.n(); ++j)
        for (int t = 1; t <= T; ++t) out(i, j, t) = mean_(i, j, t);
    return out;
  }

  std::string name() const override { return "poisson"; }

 private:
  Grid3<double> mean_;
};

class BootstrapModel : public GenerativeModel {
 public:
  BootstrapModel(std::vector<DemandTrace> days, int n, int dt_s)
      : days_(std::move(days)), n_(n), dt_s_(dt_s) {
    if (days_.empty()) throw std::invalid_argument("bootstrap_model: need at least one day");
    for (const auto& d : days_) d.validate(n_);
  }

  std::vector<DemandSample> sample(const DemandHistory& rho, int T, int K,
                                   std::uint64_t seed) const override {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, days_.size() - 1);
    std::vector<DemandSample> out;
    out.reserve(K);
    for (int k = 0; k < K; ++k)
      out.push_back(bin_trace(days_[pick(rng)], n_, dt_s_, rho.current_step + 1, T));
    return out;
  }

  Grid3<double> mean_forecast(const DemandHistory& rho, int T) const override {
    Grid3<double> mean(n_, T, 0.0);
    for (const auto& d : days_) {
      DemandSample s = bin_trace(d, n_, dt_s_, rho.current_step + 1, T);
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
          for (int t = 1; t <= T; ++t) mean(i, j, t) += static_cast<double>(s.lam(i, j, t));
    }
    const double inv = 1.0 / static_cast<double>(days_.size());
    for (double& v : mean.data()) v *= inv;
    return mean;
  }

  std::string name() const override { return "bootstrap"; }

 private:
  std::vector<DemandTrace> days_;
  int n_, dt_s_;
};

class PerfectModel : public GenerativeModel {
 public:
  PerfectModel(const DemandTrace& future, int n, int dt_s, long long duration_s)
      : n_(n), dt_s_(dt_s), total_steps_((duration_s + dt_s - 1) / dt_s) {
    future.validate(n);
    if (future.last_time_s() >= duration_s)
      throw std::out_of_range("perfect_model: trace extends past its declared duration");
    truth_ = bin_trace(future, n, dt_s, 1, static_cast<int>(total_steps_));
  }

  std::vector<DemandSample> sample(const DemandHistory& rho, int T, int K,
                                   std::uint64_t) const override {
    DemandSample window = window_at(rho.current_step, T);
    return std::vector<DemandSample>(K, window);
  }

  Grid3<double> mean_forecast(const DemandHistory& rho, int T) const override {
    DemandSample w = window_at(rho.current_step, T);
    Grid3<double> mean(n_, T, 0.0);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int t = 1; t <= T; ++t) mean(i, j, t) = static_cast<double>(w.lam(i, j, t));
    return mean;
  }

  std::string name() const override { return "perfect"; }

 private:
  DemandSample window_at(long long current_step, int T) const {
    if (current_step >= total_steps_)
      throw std::out_of_range("perfect_model: window starts past trace coverage");
    DemandSample w(n_, T);
    for (int t = 1; t <= T; ++t) {
      const long long abs_step = current_step + t;
      if (abs_step > total_steps_) break;  // no demand past the scenario end
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) w.lam(i, j, t) = truth_.lam(i, j, static_cast<int>(abs_step));
    }
    return w;
  }

  int n_, dt_s_;
  long long total_steps_;
  DemandSample truth_;
};

class FileSampleModel : public GenerativeModel {
 public:
  FileSampleModel(const std::string& path, int n, int T) : n_(n), T_(T) {
    std::ifstream in(path);
    if (!in) throw TraceError("file_sample_model: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "k,i,j,t,count")
      throw TraceError("file_sample_model: bad header in " + path);
    long long lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      long long k, count;
      int i, j, t;
      char c[4];
      std::istringstream ss(line);
      if (!(ss >> k >> c[0] >> i >> c[1] >> j >> c[2] >> t >> c[3] >> count) || c[0] != ',' ||
          c[1] != ',' || c[2] != ',' || c[3] != ',')
        throw TraceError("file_sample_model: bad row " + std::to_string(lineno));
      if (k < 0 || i < 0 || i >= n || j < 0 || j >= n || t < 1 || t > T || count < 0)
        throw TraceError("file_sample_model: value out of range at row " + std::to_string(lineno));
      while (static_cast<long long>(samples_.size()) <= k) samples_.emplace_back(n, T);
      samples_[k].lam(i, j, t) += count;
    }
    if (samples_.empty()) throw TraceError("file_sample_model: no samples in " + path);
  }

  std::vector<DemandSample> sample(const DemandHistory&, int T, int K, std::uint64_t) const override {
    if (T != T_) throw ShapeError("file_sample_model: horizon mismatch");
    if (K > static_cast<int>(samples_.size()))
      throw std::out_of_range("file_sample_model: fewer stored samples than requested");
    return std::vector<DemandSample>(samples_.begin(), samples_.begin() + K);
  }

  Grid3<double> mean_forecast(const DemandHistory&, int T) const override {
    if (T != T_) throw ShapeError("file_sample_model: horizon mismatch");
    Grid3<double> mean(n_, T, 0.0);
    for (const auto& s : samples_)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
          for (int t = 1; t <= T; ++t) mean(i, j, t) += static_cast<double>(s.lam(i, j, t));
    for (double& v : mean.data()) v /= static_cast<double>(samples_.size());
    return mean;
  }

  std::string name() const override { return "file"; }

 private:
  int n_, T_;
  std::vector<DemandSample> samples_;
};

// Per-(block, k) burst realization drawn from the spec's marginal; blocks are
// independent, so the marginal is also the conditional given any history.
class MixtureModel : public GenerativeModel {
 public:
  MixtureModel(MixtureSpec spec, int dt_s) : spec_(std::move(spec)), dt_s_(dt_s) {
    if (spec_.n < 1) throw std::invalid_argument("mixture_model: bad station count");
    if (spec_.hotspot_origins.empty())
      for (int i = 0; i < spec_.n; ++i) spec_.hotspot_origins.push_back(i);
    if (spec_.p_burst < 0 || spec_.p_burst > 1)
      throw std::invalid_argument("mixture_model: p_burst must be a probability");
  }

  std::vector<DemandSample> sample(const DemandHistory& rho, int T, int K,
                                   std::uint64_t seed) const override {
    std::mt19937_64 rng(seed);
    std::vector<DemandSample> out;
    out.reserve(K);
    const int n = spec_.n;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<size_t> pick_hot(0, spec_.hotspot_origins.size() - 1);
    for (int k = 0; k < K; ++k) {
      DemandSample s(n, T);
      for (int t = 1; t <= T; ++t) {
        const long long abs_step = rho.current_step + t;  // 1-based absolute step
        const long long block = ((abs_step - 1) * dt_s_) / spec_.block_s;
        // one regime draw per (sample, block): reseed a block stream
        std::mt19937_64 block_rng(rng_mix(seed, static_cast<std::uint64_t>(k),
                                          static_cast<std::uint64_t>(block)));
        const bool burst = unit(block_rng) < spec_.p_burst;
        const int hot = burst ? spec_.hotspot_origins[pick_hot(block_rng)] : -1;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double rate = spec_.base_rate(i, j);
            if (burst && i == hot && i != j) rate += spec_.burst_rate / (n - 1);
            if (rate > 0) {
              std::poisson_distribution<long long> d(rate * dt_s_);
              s.lam(i, j, t) += d(rng);
            }
          }
      }
      out.push_back(std::move(s));
    }
    return out;
  }

  Grid3<double> mean_forecast(const DemandHistory&, int T) const override {
    const int n = spec_.n;
    Grid3<double> mean(n, T, 0.0);
    const double hot_share = spec_.p_burst / static_cast<double>(spec_.hotspot_origins.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int t = 1; t <= T; ++t) {
          double rate = spec_.base_rate(i, j);
          const bool is_hot = std::find(spec_.hotspot_origins.begin(), spec_.hotspot_origins.end(),
                                        i) != spec_.hotspot_origins.end();
          if (is_hot && i != j) rate += hot_share * spec_.burst_rate / (n - 1);
          mean(i, j, t) = rate * dt_s_;
        }
    return mean;
  }

  std::string name() const override { return "mixture"; }

 private:
  static std::uint64_t rng_mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t x = a + 0x9E3779B97F4A7C15ULL * (b + 1) + 0xBF58476D1CE4E5B9ULL * (c + 1);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
  }

  MixtureSpec spec_;
  int dt_s_;
};

}  // namespace

std::shared_ptr<GenerativeModel> poisson_model(Grid3<double> mean) {
  return std::make_shared<PoissonModel>(std::move(mean));
}

std::shared_ptr<GenerativeModel> bootstrap_model(std::vector<DemandTrace> historical, int n,
                                                 int dt_s) {
  return std::make_shared<BootstrapModel>(std::move(historical), n, dt_s);
}

std::shared_ptr<GenerativeModel> perfect_model(const DemandTrace& future, int n, int dt_s,
                                               long long duration_s) {
  return std::make_shared<PerfectModel>(future, n, dt_s, duration_s);
}

std::shared_ptr<GenerativeModel> file_sample_model(const std::string& path, int n, int T) {
  return std::make_shared<FileSampleModel>(path, n, T);
}

std::shared_ptr<GenerativeModel> mixture_model(MixtureSpec spec, int dt_s) {
  return std::make_shared<MixtureModel>(std::move(spec), dt_s);
}

MixtureSpec MixtureSpec::commuter(int n, double base_total_rate, double burst_rate, double p_burst,
                                  int block_s) {
  MixtureSpec spec;
  spec.n = n;
  spec.base_rate = Grid2<double>(n, n, 0.0);
  // residential half feeds the downtown half
  const int half = n / 2;
  const int pairs = std::max(1, half * (n - half));
  for (int i = 0; i < half; ++i)
    for (int j = half; j < n; ++j) spec.base_rate(i, j) = base_total_rate / pairs;
  spec.burst_rate = burst_rate;
  spec.p_burst = p_burst;
  spec.block_s = block_s;
  for (int i = 0; i < n; ++i) spec.hotspot_origins.push_back(i);
  return spec;
}

namespace {

DemandTrace sort_records(std::vector<TripRecord> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const TripRecord& a, const TripRecord& b) { return a.t_s < b.t_s; });
  DemandTrace t;
  t.records = std::move(records);
  return t;
}

}  // namespace

DemandTrace generate_mixture_trace(const MixtureSpec& spec, long long duration_s,
                                   std::uint64_t seed) {
  if (duration_s <= 0) throw std::invalid_argument("generate_mixture_trace: duration must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> hotspots = spec.hotspot_origins;
  if (hotspots.empty())
    for (int i = 0; i < spec.n; ++i) hotspots.push_back(i);
  std::uniform_int_distribution<size_t> pick_hot(0, hotspots.size() - 1);

  std::vector<TripRecord> records;
  for (long long b0 = 0; b0 < duration_s; b0 += spec.block_s) {
    const long long blen = std::min<long long>(spec.block_s, duration_s - b0);
    const bool burst = unit(rng) < spec.p_burst;
    const int hot = burst ? hotspots[pick_hot(rng)] : -1;
    std::uniform_int_distribution<long long> when(b0, b0 + blen - 1);
    for (int i = 0; i < spec.n; ++i)
      for (int j = 0; j < spec.n; ++j) {
        double rate = spec.base_rate(i, j);
        if (burst && i == hot && i != j) rate += spec.burst_rate / (spec.n - 1);
        if (rate <= 0) continue;
        std::poisson_distribution<long long> d(rate * blen);
        const long long count = d(rng);
        for (long long q = 0; q < count; ++q) records.push_back({when(rng), i, j});
      }
  }
  return sort_records(std::move(records));
}

DemandTrace generate_uniform_trace(int n, double total_rate, long long duration_s,
                                   std::uint64_t seed) {
  MixtureSpec spec;
  spec.n = n;
  spec.base_rate = Grid2<double>(n, n, 0.0);
  const int pairs = std::max(1, n * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) spec.base_rate(i, j) = total_rate / pairs;
  spec.p_burst = 0;
  spec.block_s = 300;
  spec.hotspot_origins = {0};
  return generate_mixture_trace(spec, duration_s, seed);
}

std::pair<double, double> estimate_subexponential(const std::vector<double>& samples) {
  if (samples.size() < 30)
    throw std::invalid_argument("estimate_subexponential: need at least 30 samples");
  double mean = 0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  double var = 0, maxdev = 0;
  for (double s : samples) {
    var += (s - mean) * (s - mean);
    maxdev = std::max(maxdev, std::abs(s - mean));
  }
  var /= static_cast<double>(samples.size() - 1);
  if (var == 0) return {0.0, 1.0};
  const double b = std::max(1.0, maxdev / std::log(static_cast<double>(samples.size())));
  return {var, b};
}

}  // namespace amod
