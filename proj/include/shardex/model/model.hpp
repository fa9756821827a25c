#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shardex/types.hpp"

// Queuing model of the master and the network hubs plus a sample-based
// estimate of the slowest slave. All times are milliseconds; arrival rates
// are queries per millisecond.
namespace shardex::model {

enum class Component : std::uint8_t { masterCpu, masterMemBus, network };

std::string_view to_string(Component c);

using KMap = std::map<std::uint32_t, double>;

struct CostParams {
  double tParentProcMs = 0;
  double tChildProcMs = 0;
  KMap tMasterRpcMs;
  double tComparisonUs = 0;
  double tBaseUs = 0;
  double tPerContextSwitchUs = 0;
  KMap ncsBase;
  KMap ncsPerSlave;
  KMap stNetworkMs;

  friend bool operator==(const CostParams&, const CostParams&) = default;
};

using MixKey = std::pair<ConditionType, std::uint32_t>;

struct ModelParams {
  std::uint32_t nm = 1;   // master nodes
  std::uint32_t ncm = 1;  // cores per master
  std::uint32_t ns = 1;   // slaves
  std::uint32_t nh = 1;   // network hubs
  double alpha = 0.25;    // CPU share of master service time
  std::map<MixKey, double> qmr;
  KMap wMaster;
  KMap wNetwork;
  CostParams cost;

  // Throws ConfigError naming the first violated invariant.
  void validate() const;

  // Flat key=value text; '#' starts a comment. Throws ConfigError.
  static ModelParams parse(std::string_view text);
  static ModelParams load(const std::filesystem::path& path);
  std::string serialize() const;

  // Distinct k values present in the mix.
  std::vector<std::uint32_t> ks() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Constants measured on the five-slave reference testbed, single-keyword
// top-10 workload, weights 1.
ModelParams reference_params();

double lookup(const KMap& m, std::uint32_t k, std::string_view what);

// Unweighted per-server arrival rate.
double arrival_rate(Component c, double lambda, const ModelParams& p);
// sum_k w_c(k) * sum_sct qmr(sct, k)
double weight_multiplier(Component c, const ModelParams& p);
double weighted_arrival_rate(Component c, double lambda, const ModelParams& p);
double weight(Component c, std::uint32_t k, const ModelParams& p);

double merge_time(std::uint32_t k, std::uint32_t ns, const CostParams& c);
double context_switch_time(std::uint32_t k, std::uint32_t ns, const CostParams& c);
double master_service_time(std::uint32_t k, std::uint32_t ns, const CostParams& c);
// (cpu, memory bus) = (st * alpha, st * (1 - alpha)).
std::pair<double, double> split_alpha(double st, double alpha);
// Service time of the component for a top-k query.
double service_time(Component c, std::uint32_t k, const ModelParams& p);

// Mean number in system of an M/D/1 queue. Throws SaturationError when
// lambda * st >= 1.
double md1_queue_length(double lambda, double st, std::string_view component = "queue");
double component_queue_length(Component c, double lambda, const ModelParams& p);
double sojourn_time(Component c, std::uint32_t k, double lambda, const ModelParams& p);

// Per query, np * r slave sojourn times ordered by repetition, then slave.
struct SojournSampleSet {
  std::uint32_t np = 0;
  std::uint32_t r = 0;
  std::vector<std::uint64_t> queryIds;
  std::vector<std::vector<double>> perQuery;

  // Throws ConfigError when a sequence has the wrong length or a
  // non-positive time.
  void validate() const;
  // Lines "queryId,repetition,slaveId,sojourn_ms"; '#' lines skipped.
  static SojournSampleSet parse(std::string_view text);
  static SojournSampleSet load(const std::filesystem::path& path);
  std::string serialize() const;
};

// Mean over queries of the mean segment maximum, with each query's
// sequence cut into floor(np*r/ns) segments of ns; remainders are dropped.
double slave_max_partitioning(const SojournSampleSet& samples, std::uint32_t ns);

struct ResponseEstimate {
  double masterCpuMs = 0;
  double masterMemBusMs = 0;
  double networkMs = 0;
  double slaveMaxMs = 0;
  double totalMs = 0;

  double master_ms() const { return masterCpuMs + masterMemBusMs; }
  // max(master, network)
  double queuing_ms() const;
};

// max(X_cpu + X_mem, X_net) + slave max over p.ns. The sample set must be
// the one measured for this query type, k and lambda.
ResponseEstimate total_response_time(std::uint32_t k, double lambda, const ModelParams& p,
                                     const SojournSampleSet& samples);

double estimation_error(double estimated, double measured);

struct MeasuredPoint {
  double lambda = 0;       // queries per ms
  std::uint32_t k = 10;
  double measuredMs = 0;   // master plus network time
};

// Grid search over alpha in steps of 0.01 minimizing mean estimation error
// of the queuing part. 0.25 when points is empty. Throws ConfigError when
// no alpha is stable for every point.
double fit_alpha(std::span<const MeasuredPoint> points, const ModelParams& p);

struct Md1SimResult {
  double meanQueueLength = 0;  // time average, in system
  double meanSojourn = 0;
  std::uint64_t arrivals = 0;
};

// FIFO single server, exponential inter-arrivals, fixed service time.
Md1SimResult md1_simulate(double lambda, double st, std::uint64_t nArrivals, std::uint64_t seed);

}  // namespace shardex::model
