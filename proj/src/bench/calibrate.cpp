#include "shardex/bench/calibrate.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "shardex/bench/runner.hpp"
#include "shardex/error.hpp"

namespace shardex::bench {

namespace {

using Clock = std::chrono::steady_clock;
using Us = std::chrono::duration<double, std::micro>;

// Mean wall time of encoding a query frame and decoding a k-item reply.
double codec_ms(std::uint32_t k) {
  net::QueryMsg q;
  q.queryId = 1;
  q.keywords = {"keyword"};
  q.k = k;
  net::TopKMsg t;
  t.queryId = 1;
  for (std::uint32_t i = 0; i < k; ++i) t.items.push_back({"doc" + std::to_string(100000 + i), 1.0 - i * 1e-6});
  const auto frame = net::encode_frame(t);
  const std::span<const std::uint8_t> body(frame.data() + 4, frame.size() - 4);
  const unsigned iters = std::max(50u, 20000u / std::max(k, 1u));
  std::size_t sink = 0;
  const auto start = Clock::now();
  for (unsigned i = 0; i < iters; ++i) {
    sink += net::encode_frame(q).size();
    sink += std::get<net::TopKMsg>(net::decode_body(body)).items.size();
  }
  const double total = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  if (sink == 0) return 0;
  return total / iters;
}

}  // namespace

double network_service_from_decomposition(double C, double M, double S, double MminusO) {
  const double O = M - MminusO;
  if (O < 0) throw MeasurementError("network decomposition: M - (M - O) is negative (O=" + std::to_string(O) + ")");
  const double residual = C - M - S;
  if (residual < 0) throw MeasurementError("network decomposition: C - M - S is negative (" + std::to_string(residual) + ")");
  return residual + 2 * O;
}

model::KMap weights_from_latencies(const model::KMap& latencies) {
  auto it = latencies.find(10);
  if (it == latencies.end() || !(it->second > 0)) throw MeasurementError("top-10 latency missing or zero");
  model::KMap out;
  for (auto [k, t] : latencies) out[k] = k == 10 ? 1.0 : t / it->second;
  return out;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0;
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

double coefficient_of_variation(std::span<const double> v) {
  if (v.size() < 2) return 0;
  const double m = mean(v);
  if (m == 0) return 0;
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1)) / std::abs(m);
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw InvalidArgument("least squares needs equal-length, non-empty inputs");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0;
  double sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  LineFit f;
  f.slope = sxx == 0 ? 0 : sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

MergeCostFit fit_merge_cost(unsigned trialsPerPoint, std::uint64_t seed) {
  constexpr std::size_t kItems = 1000;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rank(0, 1);
  std::vector<double> heights;
  std::vector<double> perItemUs;
  for (std::size_t ns : {1, 2, 4, 8, 16, 32, 64}) {
    std::vector<std::vector<RankedItem>> data(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t i = 0; i < kItems; ++i) data[s].push_back({"d" + std::to_string(s * kItems + i), rank(rng)});
      std::sort(data[s].begin(), data[s].end(), [](const auto& a, const auto& b) { return a.rank > b.rank; });
    }
    std::vector<node::MergeStream> streams;
    for (std::size_t s = 0; s < ns; ++s) streams.push_back({static_cast<std::uint32_t>(s), data[s]});
    std::vector<double> samples;
    for (unsigned t = 0; t < trialsPerPoint; ++t) {
      const auto start = Clock::now();
      auto out = node::loser_tree_merge(streams, kItems);
      samples.push_back(Us(Clock::now() - start).count() / out.size());
    }
    // The median resists scheduler hiccups on a shared machine.
    std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
    heights.push_back(node::tree_height(ns));
    perItemUs.push_back(samples[samples.size() / 2]);
  }
  auto fit = least_squares(heights, perItemUs);
  return {std::max(fit.slope, 0.0), std::max(fit.intercept, 0.0)};
}

double measure_context_switch_us(unsigned rounds) {
  std::mutex mu;
  std::condition_variable cv;
  bool ping = true;
  const auto start = Clock::now();
  std::thread other([&] {
    for (unsigned i = 0; i < rounds; ++i) {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return !ping; });
      ping = true;
      cv.notify_one();
    }
  });
  for (unsigned i = 0; i < rounds; ++i) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return ping; });
    ping = false;
    cv.notify_one();
  }
  other.join();
  return Us(Clock::now() - start).count() / (2.0 * rounds);
}

std::uint64_t process_context_switches() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return static_cast<std::uint64_t>(u.ru_nvcsw) + static_cast<std::uint64_t>(u.ru_nivcsw);
}

bool CalibrationResult::noisy() const {
  return std::any_of(measurements.begin(), measurements.end(), [](const auto& m) { return m.noisy; });
}

std::string CalibrationResult::report() const {
  std::ostringstream o;
  for (const auto& m : measurements) {
    o << "# measured " << m.name << " mean=" << m.mean << " cv=" << m.cv << " n=" << m.samples
      << (m.noisy ? " NOISY" : "") << '\n';
  }
  for (auto [k, w] : slaveWeights) o << "# slave weight k" << k << "=" << w << '\n';
  for (const auto& n : notes) o << "# note: " << n << '\n';
  return o.str();
}

CalibrationResult calibrate(node::Master& master, const CalibrationOptions& options) {
  if (!options.probes.count(10) || options.probes.at(10).empty()) throw ConfigError("calibration needs top-10 probes");
  for (const auto& [key, ratio] : options.qmr) {
    if (ratio > 0 && (!options.probes.count(key.second) || options.probes.at(key.second).empty())) {
      throw ConfigError("calibration needs probes for k=" + std::to_string(key.second));
    }
  }

  CalibrationResult res;
  auto record = [&](std::string name, std::vector<double> values) {
    Measurement m;
    m.name = std::move(name);
    m.mean = mean(values);
    m.cv = coefficient_of_variation(values);
    m.samples = values.size();
    m.noisy = m.cv > options.cvThreshold;
    res.measurements.push_back(m);
    return m.mean;
  };

  const std::uint32_t ns = static_cast<std::uint32_t>(master.slave_count());
  auto& p = res.params;
  p.nm = 1;
  p.ncm = std::max(options.ncm, 1u);
  p.ns = ns;
  p.nh = 1;
  p.alpha = options.alpha;
  p.qmr = options.qmr;

  // One discarded round opens connections and warms code paths.
  master.client().ping_all();
  for (const auto& [k, probes] : options.probes) {
    auto first = probes.front();
    first.k = k;
    master.execute(first);
  }

  // Baseline messaging cost per slave without a query payload.
  std::vector<double> pingMaster;
  for (unsigned i = 0; i < options.pingsPerSlave; ++i) {
    for (const auto& r : master.client().ping_all()) pingMaster.push_back(r.masterTime.count() / 1000.0);
  }
  const double mMinusO = record("ping_master_ms", pingMaster);

  model::KMap slaveMedians;
  model::KMap networkByK;
  double childMs = 0;
  // k=10 first: its child cost is subtracted from the other k values.
  std::vector<std::uint32_t> order{10};
  for (const auto& [k, _] : options.probes) {
    if (k != 10) order.push_back(k);
  }
  for (auto k : order) {
    const auto& probes = options.probes.at(k);
    std::vector<double> parent, m, s, c;
    for (const auto& q : probes) {
      auto withK = q;
      withK.k = k;
      auto r = master.execute_text(qlang::format_query(withK));
      const auto& t = r.timing;
      parent.push_back(std::max(0.0, t.totalMs - t.fanoutMs - t.mergeMs));
      for (const auto& st : t.slaves) {
        m.push_back(st.masterMs);
        s.push_back(st.slaveMs);
        c.push_back(st.roundTripMs);
      }
    }
    const auto tag = ".k" + std::to_string(k);
    const double parentMs = record("parent_ms" + tag, parent);
    const double mMs = record("master_per_slave_ms" + tag, m);
    const double sMs = record("slave_ms" + tag, s);
    const double cMs = record("round_trip_ms" + tag, c);
    // Weights use the median so a few stalled samples do not skew the ratios.
    slaveMedians[k] = percentile(s, 50);

    const double codec = codec_ms(k);
    if (k == 10) {
      p.cost.tParentProcMs = parentMs;
      childMs = std::max(0.0, mMs - codec);
      p.cost.tChildProcMs = childMs;
    }
    p.cost.tMasterRpcMs[k] = codec;
    if (k != 10) p.cost.tMasterRpcMs[k] = std::max(0.0, mMs - childMs);

    double st;
    try {
      st = network_service_from_decomposition(cMs, mMs, sMs, mMinusO);
    } catch (const MeasurementError& e) {
      res.notes.push_back(std::string("k=") + std::to_string(k) + ": " + e.what() + "; clamped at 0");
      st = std::max(0.0, cMs - mMs - sMs) + 2 * std::max(0.0, mMs - mMinusO);
    }
    networkByK[k] = st;
  }
  p.cost.stNetworkMs = networkByK;

  const auto merge = fit_merge_cost(options.mergeTrials);
  p.cost.tComparisonUs = merge.tComparisonUs;
  p.cost.tBaseUs = merge.tBaseUs;
  p.cost.tPerContextSwitchUs = measure_context_switch_us(options.contextSwitchRounds);

  // Context switches per query, fitted against the number of slaves.
  const auto& endpoints = master.client().endpoints();
  for (const auto& [k, probes] : options.probes) {
    std::vector<double> xs, ys;
    const std::size_t lo = options.fitContextSwitchesOverSubsets ? 1 : ns;
    for (std::size_t n = lo; n <= ns; ++n) {
      node::Master sub(std::vector<net::Endpoint>(endpoints.begin(), endpoints.begin() + n));
      sub.client().ping_all();
      for (const auto& q : probes) {
        auto withK = q;
        withK.k = k;
        const auto before = process_context_switches();
        sub.execute(withK);
        xs.push_back(static_cast<double>(n));
        ys.push_back(static_cast<double>(process_context_switches() - before));
      }
    }
    auto fit = least_squares(xs, ys);
    if (lo == ns) fit = {0, mean(ys) / ns};
    p.cost.ncsBase[k] = std::max(0.0, fit.intercept);
    p.cost.ncsPerSlave[k] = std::max(0.0, fit.slope);
  }

  model::KMap masterByK;
  for (const auto& [k, _] : options.probes) masterByK[k] = model::master_service_time(k, ns, p.cost);
  auto weights_or_unit = [&](const model::KMap& t, std::string_view what) {
    try {
      return weights_from_latencies(t);
    } catch (const MeasurementError& e) {
      res.notes.push_back(std::string(what) + " weights set to 1: " + e.what());
      model::KMap unit;
      for (auto [k, _] : t) unit[k] = 1.0;
      return unit;
    }
  };
  p.wMaster = weights_or_unit(masterByK, "master");
  p.wNetwork = weights_or_unit(networkByK, "network");
  res.slaveWeights = weights_or_unit(slaveMedians, "slave");

  res.notes.push_back("M and S are in-process wall-clock timers, not process CPU times");
  res.notes.push_back("context switches are counted process-wide and include any co-located slaves");
  p.validate();
  return res;
}

}  // namespace shardex::bench
