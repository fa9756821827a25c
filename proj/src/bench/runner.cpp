#include "shardex/bench/runner.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "shardex/bench/workload.hpp"
#include "shardex/error.hpp"

namespace shardex::bench {

namespace {

using Clock = std::chrono::steady_clock;
using Ms = std::chrono::duration<double, std::milli>;

}  // namespace

void warmup(node::Master& master, std::span<const qlang::Query> warmupSet, std::span<const qlang::Query> measuredSet,
            bool allowEmpty) {
  if (warmupSet.empty() && !allowEmpty) throw InvalidArgument("warmup set is empty; pass the cold-run flag to allow it");
  check_disjoint(warmupSet, measuredSet);
  for (const auto& q : warmupSet) master.execute(q);
  master.client().stats_all(net::StatsOp::resetCounters);
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * (values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (values[hi] - values[lo]) * (pos - lo);
}

bool detect_instability(std::span<const QueryRecord> records, double windowMs) {
  if (records.empty() || !(windowMs > 0)) return false;
  double end = 0;
  for (const auto& r : records) end = std::max(end, r.scheduledMs + r.totalMs);
  std::size_t prev = 0;
  int rising = 0;
  for (double t = windowMs; t <= end; t += windowMs) {
    std::size_t inFlight = 0;
    for (const auto& r : records) {
      if (r.scheduledMs <= t && r.scheduledMs + r.totalMs > t) ++inFlight;
    }
    rising = inFlight > prev ? rising + 1 : 0;
    if (rising >= 3) return true;
    prev = inFlight;
  }
  return false;
}

RunMetrics run_benchmark(node::Master& master, std::span<const qlang::Query> queries, const RunOptions& options) {
  const auto schedule = poisson_schedule(queries.size(), options.lambdaQps, options.seed);
  RunMetrics m;
  m.issued = 0;
  std::vector<std::optional<QueryRecord>> slots(queries.size());
  std::mutex mu;
  std::atomic<bool> failed{false};

  std::vector<std::thread> inFlight;
  inFlight.reserve(queries.size());
  // Threads are started ahead of their arrival so thread creation stays
  // out of the measured time.
  constexpr auto kLead = std::chrono::milliseconds(2);
  const auto start = Clock::now() + kLead;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto planned = start + std::chrono::duration_cast<Clock::duration>(Ms(schedule[i]));
    std::this_thread::sleep_until(planned - kLead);
    if (failed.load()) break;
    ++m.issued;
    inFlight.emplace_back([&, i, planned] {
      std::this_thread::sleep_until(planned);
      if (failed.load()) return;
      try {
        auto result = master.execute(queries[i]);
        QueryRecord rec;
        rec.index = i;
        rec.type = queries[i].type;
        rec.k = queries[i].k;
        rec.scheduledMs = schedule[i];
        rec.totalMs = Ms(Clock::now() - planned).count();
        rec.timing = std::move(result.timing);
        rec.resultCount = result.items.size();
        slots[i] = std::move(rec);
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        if (!m.error) m.error = "query " + std::to_string(i) + ": " + e.what();
        failed.store(true);
      }
    });
  }
  for (auto& t : inFlight) t.join();
  m.makespanMs = Ms(Clock::now() - start).count();

  std::vector<double> totals;
  for (auto& s : slots) {
    if (!s) continue;
    totals.push_back(s->totalMs);
    m.records.push_back(std::move(*s));
  }
  if (!totals.empty()) {
    double sum = 0;
    for (double t : totals) sum += t;
    m.meanMs = sum / totals.size();
    m.p50Ms = percentile(totals, 50);
    m.p95Ms = percentile(totals, 95);
    m.p99Ms = percentile(totals, 99);
    m.throughputQps = m.makespanMs > 0 ? totals.size() / (m.makespanMs / 1000.0) : 0;
  }
  m.unstable = detect_instability(m.records, options.windowSeconds * 1000.0);
  return m;
}

std::string RunMetrics::to_text() const {
  std::ostringstream o;
  o << "# index,type,k,scheduled_ms,total_ms,slave_max_ms,merge_ms,results,m_i;...,s_i;...,nt_i;...\n";
  auto join = [&](const auto& slaves, auto field) {
    std::string s;
    for (std::size_t i = 0; i < slaves.size(); ++i) {
      if (i) s += ';';
      std::ostringstream v;
      v << slaves[i].*field;
      s += v.str();
    }
    return s;
  };
  for (const auto& r : records) {
    const auto& sl = r.timing.slaves;
    o << r.index << ',' << to_string(r.type) << ',' << r.k << ',' << r.scheduledMs << ',' << r.totalMs << ','
      << r.timing.slave_max_ms() << ',' << r.timing.mergeMs << ',' << r.resultCount << ','
      << join(sl, &node::SlaveTiming::masterMs) << ',' << join(sl, &node::SlaveTiming::slaveMs) << ','
      << join(sl, &node::SlaveTiming::networkMs) << '\n';
  }
  o << "# issued=" << issued << " completed=" << records.size() << '\n';
  o << "# mean_ms=" << meanMs << " p50_ms=" << p50Ms << " p95_ms=" << p95Ms << " p99_ms=" << p99Ms << '\n';
  o << "# throughput_qps=" << throughputQps << " makespan_ms=" << makespanMs << '\n';
  o << "# unstable=" << (unstable ? "yes" : "no") << '\n';
  if (error) o << "# error=" << *error << '\n';
  return o.str();
}

model::SojournSampleSet export_samples(std::span<const RunMetrics> runs, std::uint32_t np) {
  if (runs.empty()) throw MeasurementError("no runs to export");
  if (np == 0) throw InvalidArgument("np must be >= 1");
  const std::size_t queries = runs.front().issued;
  model::SojournSampleSet s;
  s.np = np;
  s.r = static_cast<std::uint32_t>(runs.size());
  s.perQuery.assign(queries, {});
  for (std::size_t q = 0; q < queries; ++q) s.queryIds.push_back(q);
  for (std::size_t rep = 0; rep < runs.size(); ++rep) {
    const auto& run = runs[rep];
    if (!run.ok() || run.records.size() != queries) {
      throw MeasurementError("repetition " + std::to_string(rep) + " is incomplete (" +
                             std::to_string(run.records.size()) + " of " + std::to_string(queries) + " queries)");
    }
    for (const auto& rec : run.records) {
      if (rec.timing.slaves.size() != np) {
        throw MeasurementError("query " + std::to_string(rec.index) + " has " +
                               std::to_string(rec.timing.slaves.size()) + " slave timings, expected " +
                               std::to_string(np));
      }
      for (const auto& st : rec.timing.slaves) {
        // Sub-microsecond slave times are reported as 0; keep them positive.
        s.perQuery[rec.index].push_back(std::max(st.slaveMs, 1e-3));
      }
    }
  }
  s.validate();
  return s;
}

}  // namespace shardex::bench
