#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "shardex/model/model.hpp"
#include "shardex/node/master.hpp"

namespace shardex::bench {

// Network service time from a round trip split into master (M), slave (S)
// and the remainder, with O = M - MminusO counted on both ends:
// (C - M - S) + 2 * O. Throws MeasurementError on a negative intermediate.
double network_service_from_decomposition(double C, double M, double S, double MminusO);

// w(k) = t(k) / t(10). Throws MeasurementError when t(10) is missing or 0.
model::KMap weights_from_latencies(const model::KMap& latencies);

double mean(std::span<const double> v);
// Sample standard deviation over the mean; 0 for fewer than two values.
double coefficient_of_variation(std::span<const double> v);

struct LineFit {
  double intercept = 0;
  double slope = 0;
};
LineFit least_squares(std::span<const double> x, std::span<const double> y);

// Per-item merge cost as tBase + height * tComparison, fitted from timed
// loser-tree merges over 1..64 synthetic streams.
struct MergeCostFit {
  double tComparisonUs = 0;
  double tBaseUs = 0;
};
MergeCostFit fit_merge_cost(unsigned trialsPerPoint = 50, std::uint64_t seed = 7);

// Two threads handing a token back and forth; microseconds per switch.
double measure_context_switch_us(unsigned rounds = 20000);

// Voluntary plus involuntary context switches of the whole process so far.
std::uint64_t process_context_switches();

struct CalibrationOptions {
  std::map<model::MixKey, double> qmr{{{ConditionType::single, 10}, 1.0}};
  // Probe queries per top-k value; must include k=10 and every k of qmr.
  std::map<std::uint32_t, std::vector<qlang::Query>> probes;
  std::uint32_t ncm = 1;
  double alpha = 0.25;
  double cvThreshold = 0.25;
  unsigned pingsPerSlave = 20;
  unsigned mergeTrials = 50;
  unsigned contextSwitchRounds = 20000;
  bool fitContextSwitchesOverSubsets = true;
};

struct Measurement {
  std::string name;
  double mean = 0;
  double cv = 0;
  std::size_t samples = 0;
  bool noisy = false;
};

struct CalibrationResult {
  model::ModelParams params;
  model::KMap slaveWeights;  // mean s_i(k) / mean s_i(10)
  std::vector<Measurement> measurements;
  std::vector<std::string> notes;

  bool noisy() const;
  // '#' comment lines: measurements, noise flags and notes.
  std::string report() const;
};

// Runs the probes one at a time on an otherwise idle deployment and fills
// every cost entry of the model.
CalibrationResult calibrate(node::Master& master, const CalibrationOptions& options);

}  // namespace shardex::bench
