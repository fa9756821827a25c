#include "shardex/cli/cli.hpp"

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "shardex/bench/calibrate.hpp"
#include "shardex/bench/corpus.hpp"
#include "shardex/bench/runner.hpp"
#include "shardex/bench/workload.hpp"
#include "shardex/error.hpp"
#include "shardex/node/master.hpp"
#include "shardex/node/slave.hpp"
#include "shardex/storage/disk_index.hpp"
#include "shardex/storage/index_file.hpp"

namespace shardex::cli {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + part + "'");
    }
  }
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot write");
  out << text;
  if (!out) throw IoError(path, "write failed");
}

// Blocks until SIGINT or SIGTERM. The mask must be installed before any
// thread starts so that no other thread takes the signal.
sigset_t block_shutdown_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

int wait_for_signal(const sigset_t& set) {
  int sig = 0;
  sigwait(&set, &sig);
  return sig;
}

void fill_pools_from_corpus(bench::WorkloadSpec& spec, const std::string& corpusPath) {
  std::set<std::string> words;
  std::set<std::int64_t> sites;
  std::set<std::int64_t> domains;
  for (const auto& d : bench::read_corpus_tsv(corpusPath)) {
    for (auto& t : ir::tokenize(d.content)) words.insert(std::move(t));
    sites.insert(d.siteId);
    domains.insert(d.domainId);
  }
  if (spec.keywords.empty()) spec.keywords.assign(words.begin(), words.end());
  if (spec.siteIds.empty()) spec.siteIds.assign(sites.begin(), sites.end());
  if (spec.domainIds.empty()) spec.domainIds.assign(domains.begin(), domains.end());
}

ir::LimitedStrategy parse_strategy(const std::string& s) {
  if (s == "auto") return ir::LimitedStrategy::automatic;
  if (s == "embedded") return ir::LimitedStrategy::embedded;
  if (s == "join") return ir::LimitedStrategy::scopeJoin;
  throw ConfigError("unknown strategy '" + s + "'");
}

}  // namespace

std::vector<EstimateRow> estimate_rows(const model::ModelParams& params, std::span<const model::SojournSampleSet> samples,
                                       std::span<const double> lambdaQps, std::uint32_t k) {
  if (samples.empty()) throw ConfigError("no sample sets");
  if (samples.size() != 1 && samples.size() != lambdaQps.size()) {
    throw ConfigError("give one sample set, or one per load point");
  }
  std::vector<EstimateRow> rows;
  for (std::size_t i = 0; i < lambdaQps.size(); ++i) {
    EstimateRow row;
    row.lambdaQps = lambdaQps[i];
    const auto& s = samples.size() == 1 ? samples[0] : samples[i];
    try {
      row.estimate = model::total_response_time(k, lambdaQps[i] / 1000.0, params, s);
    } catch (const SaturationError& e) {
      row.saturatedComponent = e.component();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_estimate(std::span<const EstimateRow> rows) {
  std::ostringstream o;
  o << "lambda_qps\tMN-EST\tSLAVE-MAX-EST\tTOTAL-EST\n";
  for (const auto& r : rows) {
    o << num(r.lambdaQps) << '\t';
    if (r.estimate) {
      o << num(r.estimate->queuing_ms()) << '\t' << num(r.estimate->slaveMaxMs) << '\t' << num(r.estimate->totalMs);
    } else {
      const auto cell = "SATURATED(" + r.saturatedComponent + ")";
      o << cell << "\t-\t" << cell;
    }
    o << '\n';
  }
  return o.str();
}

Table Table::parse(std::string_view text) {
  Table t;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, '\t')) cells.push_back(cell);
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size()) throw ConfigError("table row has " + std::to_string(cells.size()) + " cells, header has " + std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw ConfigError("table has no header");
  return t;
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ConfigError("no column '" + std::string(name) + "'");
}

std::vector<CompareRow> compare_tables(const Table& estimated, std::string_view estColumn, const Table& measured,
                                       std::string_view measuredColumn) {
  const auto ec = estimated.column(estColumn);
  const auto mc = measured.column(measuredColumn);
  auto value = [](const std::string& cell) {
    auto v = parse_doubles(cell);
    if (v.size() != 1) throw ConfigError("cell '" + cell + "' is not a number");
    return v[0];
  };
  std::vector<CompareRow> out;
  for (const auto& er : estimated.rows) {
    const double lambda = value(er[0]);
    const std::vector<std::string>* partner = nullptr;
    for (const auto& mr : measured.rows) {
      if (std::abs(value(mr[0]) - lambda) <= 1e-9 * std::max(1.0, std::abs(lambda))) partner = &mr;
    }
    if (!partner) throw ConfigError("no measured row for lambda " + er[0]);
    CompareRow row;
    row.lambdaQps = lambda;
    row.estimated = value(er[ec]);
    row.measured = value((*partner)[mc]);
    row.error = model::estimation_error(row.estimated, row.measured);
    out.push_back(row);
  }
  return out;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"shardex: distributed top-k search engine with a performance model"};
  app.name("shardex");
  app.require_subcommand(1);
  int status = kOk;

  // build-index
  auto* build = app.add_subcommand("build-index", "Partition a corpus and write one index file per segment");
  std::string corpusPath, outDir, embed = "siteId,domainId";
  std::size_t partitions = 1;
  std::uint32_t skipInterval = 128;
  build->add_option("--corpus", corpusPath, "Corpus TSV")->required();
  build->add_option("--out-dir", outDir, "Directory for segment-<i>.sdx files")->required();
  build->add_option("--partitions", partitions, "Number of segments")->check(CLI::PositiveNumber);
  build->add_option("--embed", embed, "Attributes embedded in postings (comma list, may be empty)");
  build->add_option("--skip-interval", skipInterval, "Postings per skip entry");
  build->callback([&] {
    std::vector<std::string> spec;
    std::stringstream ss(embed);
    for (std::string a; std::getline(ss, a, ',');) {
      if (!a.empty()) spec.push_back(a);
    }
    std::filesystem::create_directories(outDir);
    auto parts = bench::partition_round_robin(bench::read_corpus_tsv(corpusPath), partitions);
    out << "segment\tpath\tdocuments\tfile_bytes\tpinned_bytes\tposting_bytes\n";
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const auto n = parts[i].size();
      auto ranked = ir::assign_doc_ids(std::move(parts[i]));
      auto index = ir::build_index(ranked, spec, skipInterval);
      const auto path = std::filesystem::path(outDir) / ("segment-" + std::to_string(i) + ".sdx");
      auto summary = storage::save_index(index, path);
      out << i << '\t' << path.string() << '\t' << n << '\t' << summary.fileBytes << '\t' << summary.pinnedBytes << '\t'
          << summary.postingBytes << '\n';
    }
  });

  // slave
  auto* slave = app.add_subcommand("slave", "Serve one index segment");
  std::string listen, indexPath, strategy = "auto";
  std::uint64_t bufferBytes = 64ull << 20;
  unsigned concurrency = 4;
  std::uint64_t missLatencyUs = 0;
  slave->add_option("--listen", listen, "host:port")->required();
  slave->add_option("--index", indexPath, "Index file")->required();
  slave->add_option("--buffer-bytes", bufferBytes, "Pinned sections plus page cache budget");
  slave->add_option("--concurrency", concurrency, "Query worker threads")->check(CLI::PositiveNumber);
  slave->add_option("--miss-latency-us", missLatencyUs, "Simulated device time per page miss");
  slave->add_option("--strategy", strategy, "Limited search: auto, embedded or join");
  slave->callback([&] {
    const auto signals = block_shutdown_signals();
    auto index = storage::DiskIndex::load(indexPath, {bufferBytes, std::chrono::microseconds(missLatencyUs)});
    node::SlaveOptions so;
    so.strategy = parse_strategy(strategy);
    node::SlaveServer server(std::make_shared<node::Slave>(index, so), {net::Endpoint::parse(listen), concurrency});
    server.start();
    out << "listening\t" << server.endpoint().str() << std::endl;
    wait_for_signal(signals);
    server.stop();
  });

  // master
  auto* masterCmd = app.add_subcommand("master", "Accept user queries and fan them out to the slaves");
  std::string slaves;
  unsigned timeoutMs = 5000;
  masterCmd->add_option("--listen", listen, "host:port")->required();
  masterCmd->add_option("--slaves", slaves, "Comma-separated slave endpoints")->required();
  masterCmd->add_option("--timeout-ms", timeoutMs, "Per-query fan-out timeout");
  masterCmd->callback([&] {
    const auto signals = block_shutdown_signals();
    net::FanoutOptions fo;
    fo.timeout = std::chrono::milliseconds(timeoutMs);
    auto m = std::make_shared<node::Master>(net::parse_endpoints(slaves), fo);
    node::MasterServer server(m, net::Endpoint::parse(listen));
    server.start();
    out << "listening\t" << net::Endpoint{net::Endpoint::parse(listen).host, server.port()}.str() << std::endl;
    wait_for_signal(signals);
    server.stop();
  });

  // query
  auto* query = app.add_subcommand("query", "Run one query and print results with a timing breakdown");
  std::string queryText, format = "text";
  query->add_option("--slaves", slaves, "Comma-separated slave endpoints")->required();
  query->add_option("--format", format, "text or lines")->check(CLI::IsMember({"text", "lines"}));
  query->add_option("--timeout-ms", timeoutMs, "Fan-out timeout");
  query->add_option("query", queryText, "SELECT TOP k WHERE MATCH(content, \"kw\") ...")->required();
  query->callback([&] {
    net::FanoutOptions fo;
    fo.timeout = std::chrono::milliseconds(timeoutMs);
    node::Master m(net::parse_endpoints(slaves), fo);
    const auto r = m.execute_text(queryText);
    const auto& t = r.timing;
    const auto& eps = m.client().endpoints();
    if (format == "lines") {
      for (std::size_t i = 0; i < r.items.size(); ++i) {
        out << "item\t" << i + 1 << '\t' << r.items[i].docKey << '\t' << num(r.items[i].rank) << '\t' << r.items[i].source << '\n';
      }
      out << "timing\tparse_ms\t" << num(t.parseMs) << "\tfanout_ms\t" << num(t.fanoutMs) << "\tmerge_ms\t" << num(t.mergeMs)
          << "\ttotal_ms\t" << num(t.totalMs) << '\n';
      for (std::size_t i = 0; i < t.slaves.size(); ++i) {
        const auto& s = t.slaves[i];
        out << "slave\t" << i << '\t' << eps[i].str() << "\tm_ms\t" << num(s.masterMs) << "\ts_ms\t" << num(s.slaveMs)
            << "\tnt_ms\t" << num(s.networkMs) << "\trtt_ms\t" << num(s.roundTripMs) << '\n';
      }
    } else {
      out << r.items.size() << " result(s)\n";
      for (std::size_t i = 0; i < r.items.size(); ++i) {
        out << "  " << i + 1 << ". " << r.items[i].docKey << "  rank " << num(r.items[i].rank) << "  (slave "
            << r.items[i].source << ")\n";
      }
      out << "timing: parse " << num(t.parseMs) << " ms, fan-out " << num(t.fanoutMs) << " ms, merge " << num(t.mergeMs)
          << " ms, total " << num(t.totalMs) << " ms\n";
      for (std::size_t i = 0; i < t.slaves.size(); ++i) {
        const auto& s = t.slaves[i];
        out << "  slave " << i << " " << eps[i].str() << ": master " << num(s.masterMs) << " ms, slave " << num(s.slaveMs)
            << " ms, network " << num(s.networkMs) << " ms, round trip " << num(s.roundTripMs) << " ms\n";
      }
    }
  });

  // bench
  auto* benchCmd = app.add_subcommand("bench", "Drive a Poisson workload against the slaves");
  std::string queriesPath, warmupPath, metricsOut, samplesOut, summaryOut;
  bool cold = false, dropCache = false;
  double lambdaQps = 10, windowSeconds = 10;
  std::uint64_t seed = 1;
  std::uint32_t repetitions = 1;
  benchCmd->add_option("--slaves", slaves, "Comma-separated slave endpoints")->required();
  benchCmd->add_option("--queries", queriesPath, "Measured query file")->required();
  benchCmd->add_option("--warmup", warmupPath, "Independent warmup query file");
  benchCmd->add_flag("--cold", cold, "Allow running without a warmup set");
  benchCmd->add_option("--lambda-qps", lambdaQps, "Poisson arrival rate, queries per second")->check(CLI::PositiveNumber);
  benchCmd->add_option("--seed", seed, "Arrival schedule seed");
  benchCmd->add_option("--repetitions", repetitions, "Runs of the query set")->check(CLI::PositiveNumber);
  benchCmd->add_flag("--drop-cache", dropCache, "Empty slave page caches before every run");
  benchCmd->add_option("--window-seconds", windowSeconds, "Instability detection window");
  benchCmd->add_option("--timeout-ms", timeoutMs, "Per-query fan-out timeout");
  benchCmd->add_option("--metrics-out", metricsOut, "Per-query metrics of every run");
  benchCmd->add_option("--samples-out", samplesOut, "Slave sojourn sample set over all runs");
  benchCmd->add_option("--summary-out", summaryOut, "Append one summary row to this table");
  benchCmd->callback([&] {
    net::FanoutOptions fo;
    fo.timeout = std::chrono::milliseconds(timeoutMs);
    node::Master m(net::parse_endpoints(slaves), fo);
    const auto queries = bench::load_query_file(queriesPath);
    std::vector<qlang::Query> warm;
    if (!warmupPath.empty()) warm = bench::load_query_file(warmupPath);
    bench::warmup(m, warm, queries, cold);

    std::vector<bench::RunMetrics> runs;
    std::string metricsText;
    for (std::uint32_t rep = 0; rep < repetitions; ++rep) {
      if (dropCache) m.client().stats_all(net::StatsOp::dropCache);
      bench::RunOptions ro{lambdaQps, seed + rep, windowSeconds};
      runs.push_back(bench::run_benchmark(m, queries, ro));
      metricsText += "# run " + std::to_string(rep) + "\n" + runs.back().to_text();
      if (runs.back().error) break;
    }
    if (!metricsOut.empty()) write_text(metricsOut, metricsText);

    double meanSum = 0, p50 = 0, p95 = 0, p99 = 0, tput = 0;
    bool unstable = false;
    for (const auto& r : runs) {
      meanSum += r.meanMs;
      p50 += r.p50Ms;
      p95 += r.p95Ms;
      p99 += r.p99Ms;
      tput += r.throughputQps;
      unstable = unstable || r.unstable;
    }
    const double n = static_cast<double>(runs.size());
    std::ostringstream row;
    row << num(lambdaQps) << '\t' << num(meanSum / n) << '\t' << num(p50 / n) << '\t' << num(p95 / n) << '\t'
        << num(p99 / n) << '\t' << num(tput / n) << '\t' << (unstable ? "yes" : "no") << '\n';
    const std::string header = "lambda_qps\tMEASURED\tp50_ms\tp95_ms\tp99_ms\tthroughput_qps\tunstable\n";
    out << header << row.str();
    if (!summaryOut.empty()) {
      const bool fresh = !std::filesystem::exists(summaryOut) || std::filesystem::file_size(summaryOut) == 0;
      std::ofstream so(summaryOut, std::ios::app);
      if (!so) throw IoError(summaryOut, "cannot append");
      if (fresh) so << header;
      so << row.str();
    }
    for (const auto& r : runs) {
      if (r.error) {
        err << "error: run aborted: " << *r.error << '\n';
        status = kFailure;
        return;
      }
    }
    if (!samplesOut.empty()) {
      write_text(samplesOut, bench::export_samples(runs, static_cast<std::uint32_t>(m.slave_count())).serialize());
    }
    if (unstable) err << "warning: in-flight queries kept growing; this load point is unstable\n";
  });

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Measure model cost parameters on an idle deployment");
  std::string probesPath, ksText = "10", workloadPath, paramsOut;
  std::uint32_t ncm = std::max(1u, std::thread::hardware_concurrency());
  double alpha = 0.25;
  cal->add_option("--slaves", slaves, "Comma-separated slave endpoints")->required();
  cal->add_option("--probes", probesPath, "Probe query file; each query is run at every k")->required();
  cal->add_option("--ks", ksText, "Comma-separated top-k values to calibrate");
  cal->add_option("--workload", workloadPath, "Workload spec supplying the query mix");
  cal->add_option("--ncm", ncm, "Cores per master")->check(CLI::PositiveNumber);
  cal->add_option("--alpha", alpha, "CPU share of master service time")->check(CLI::Range(0.0, 1.0));
  cal->add_option("--out", paramsOut, "Model parameter file (stdout when absent)");
  cal->callback([&] {
    node::Master m(net::parse_endpoints(slaves));
    bench::CalibrationOptions co;
    co.ncm = ncm;
    co.alpha = alpha;
    if (!workloadPath.empty()) co.qmr = bench::WorkloadSpec::load(workloadPath).qmr;
    const auto probes = bench::load_query_file(probesPath);
    for (double k : parse_doubles(ksText)) co.probes[static_cast<std::uint32_t>(k)] = probes;
    if (!co.probes.count(10)) co.probes[10] = probes;
    const auto res = bench::calibrate(m, co);
    const auto text = res.report() + res.params.serialize();
    if (paramsOut.empty()) out << text;
    else write_text(paramsOut, text);
    if (res.noisy()) err << "warning: some measurements have CV above 25%; see the report lines\n";
  });

  // estimate
  auto* est = app.add_subcommand("estimate", "Project response times over a load grid");
  std::string paramsPath, gridText;
  std::vector<std::string> samplePaths;
  std::uint32_t nsOverride = 0, kValue = 10;
  est->add_option("--params", paramsPath, "Model parameter file")->required();
  est->add_option("--samples", samplePaths, "Sample set file, once or once per load point")->required();
  est->add_option("--lambda-grid", gridText, "Comma-separated arrival rates, queries per second")->required();
  est->add_option("--ns", nsOverride, "Number of slaves to project to");
  est->add_option("--k", kValue, "Top-k of the estimated query type");
  est->callback([&] {
    auto params = model::ModelParams::load(paramsPath);
    if (nsOverride) params.ns = nsOverride;
    params.validate();
    std::vector<model::SojournSampleSet> sets;
    for (const auto& p : samplePaths) sets.push_back(model::SojournSampleSet::load(p));
    const auto grid = parse_doubles(gridText);
    const auto rows = estimate_rows(params, sets, grid, kValue);
    out << format_estimate(rows);
    for (const auto& r : rows) {
      if (!r.estimate) status = kSaturated;
    }
  });

  // compare
  auto* cmp = app.add_subcommand("compare", "Estimation error of projected against measured response times");
  std::string estPath, measPath, column = "TOTAL-EST", measColumn;
  cmp->add_option("--estimated", estPath, "Output of estimate")->required();
  cmp->add_option("--measured", measPath, "Measured summary table")->required();
  cmp->add_option("--column", column, "Estimated column");
  cmp->add_option("--measured-column", measColumn, "Measured column (MEASURED, else the estimated column name)");
  cmp->callback([&] {
    const auto e = Table::parse(read_text(estPath));
    const auto mt = Table::parse(read_text(measPath));
    std::string mc = measColumn;
    if (mc.empty()) {
      mc = std::find(mt.header.begin(), mt.header.end(), "MEASURED") != mt.header.end() ? "MEASURED" : column;
    }
    out << "lambda_qps\testimated\tmeasured\terror\n";
    for (const auto& r : compare_tables(e, column, mt, mc)) {
      out << num(r.lambdaQps) << '\t' << num(r.estimated) << '\t' << num(r.measured) << '\t' << num(r.error) << '\n';
    }
  });

  // gen-corpus
  auto* gc = app.add_subcommand("gen-corpus", "Write a synthetic corpus");
  bench::CorpusOptions co;
  std::string corpusOut;
  gc->add_option("--docs", co.documents, "Documents");
  gc->add_option("--vocab", co.vocabulary, "Vocabulary size");
  gc->add_option("--sites", co.sites, "Distinct siteIds")->check(CLI::PositiveNumber);
  gc->add_option("--domains", co.domains, "Distinct domainIds")->check(CLI::PositiveNumber);
  gc->add_option("--seed", co.seed, "Generator seed");
  gc->add_option("--out", corpusOut, "Corpus TSV")->required();
  gc->callback([&] { bench::write_corpus_tsv(corpusOut, bench::generate_corpus(co)); });

  // gen-queries
  auto* gq = app.add_subcommand("gen-queries", "Write a query set with unique keywords and scope values");
  std::string specPath, queriesOut, warmupOut, qmrText;
  std::optional<std::uint32_t> count;
  std::optional<std::uint64_t> genSeed;
  std::uint32_t warmupCount = 0;
  gq->add_option("--spec", specPath, "Workload spec file");
  gq->add_option("--corpus", corpusPath, "Corpus whose vocabulary and ids fill empty pools");
  gq->add_option("--count", count, "Queries in the measured set");
  gq->add_option("--seed", genSeed, "Generator seed");
  gq->add_option("--qmr", qmrText, "Query mix, e.g. single.k10=0.8,multi.k50=0.2");
  gq->add_option("--out", queriesOut, "Measured query file")->required();
  gq->add_option("--warmup-out", warmupOut, "Independent warmup query file");
  gq->add_option("--warmup-count", warmupCount, "Queries in the warmup set");
  gq->callback([&] {
    bench::WorkloadSpec spec;
    std::string specText = specPath.empty() ? "" : read_text(specPath);
    if (!qmrText.empty()) {
      std::stringstream ss(qmrText);
      for (std::string part; std::getline(ss, part, ',');) specText += "\nqmr." + part;
    }
    const auto base = std::filesystem::path(specPath).parent_path();
    spec = bench::WorkloadSpec::read(specText, base.empty() ? "." : base);
    if (count) spec.queryCount = *count;
    if (genSeed) spec.seed = *genSeed;
    if (!corpusPath.empty()) fill_pools_from_corpus(spec, corpusPath);
    spec.validate();
    auto [measured, warm] = bench::generate_with_warmup(spec, warmupOut.empty() ? 0 : warmupCount);
    bench::save_query_file(queriesOut, measured);
    if (!warmupOut.empty()) bench::save_query_file(warmupOut, warm);
    out << "queries\t" << measured.size() << "\nwarmup\t" << warm.size() << '\n';
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kUsage;
  } catch (const SaturationError& e) {
    err << "error: " << e.what() << '\n';
    return kSaturated;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return status;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace shardex::cli
