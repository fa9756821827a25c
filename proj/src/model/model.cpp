#include "shardex/model/model.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "shardex/error.hpp"

namespace shardex::model {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(what) + ": not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "k10" -> 10
std::uint32_t parse_k(std::string_view s, std::string_view key) {
  if (s.size() < 2 || s[0] != 'k') throw ConfigError("bad top-k suffix in key '" + std::string(key) + "'");
  return parse_number<std::uint32_t>(s.substr(1), key);
}

double require_nonnegative(double v, std::string_view key) {
  if (!(v >= 0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be a finite value >= 0");
  return v;
}

void check_map(const KMap& m, std::string_view name) {
  for (auto [k, v] : m) require_nonnegative(v, std::string(name) + ".k" + std::to_string(k));
}

constexpr double kUs = 1e-3;  // microseconds to milliseconds

}  // namespace

std::string_view to_string(Component c) {
  switch (c) {
    case Component::masterCpu: return "master-cpu";
    case Component::masterMemBus: return "master-membus";
    case Component::network: return "network";
  }
  return "?";
}

double lookup(const KMap& m, std::uint32_t k, std::string_view what) {
  auto it = m.find(k);
  if (it == m.end()) throw ConfigError("missing " + std::string(what) + " for k=" + std::to_string(k));
  return it->second;
}

void ModelParams::validate() const {
  if (nm == 0 || ncm == 0 || ns == 0 || nh == 0) throw ConfigError("nm, ncm, ns and nh must be >= 1");
  if (!(alpha >= 0 && alpha <= 1)) throw ConfigError("alpha must lie in [0, 1]");
  if (qmr.empty()) throw ConfigError("query mix is empty");
  double sum = 0;
  for (const auto& [key, v] : qmr) {
    if (!(v >= 0)) throw ConfigError("query mix ratios must be >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("query mix ratios sum to " + fmt(sum) + ", not 1");
  for (const auto* w : {&wMaster, &wNetwork}) {
    check_map(*w, "weight");
    auto it = w->find(10);
    if (it != w->end() && it->second != 1.0) throw ConfigError("weight of k=10 must be 1");
  }
  for (auto k : ks()) {
    lookup(wMaster, k, "w_master");
    lookup(wNetwork, k, "w_network");
  }
  require_nonnegative(cost.tParentProcMs, "t_parent_proc_ms");
  require_nonnegative(cost.tChildProcMs, "t_child_proc_ms");
  require_nonnegative(cost.tComparisonUs, "t_comparison_us");
  require_nonnegative(cost.tBaseUs, "t_base_us");
  require_nonnegative(cost.tPerContextSwitchUs, "t_per_context_switch_us");
  check_map(cost.tMasterRpcMs, "t_master_rpc_ms");
  check_map(cost.ncsBase, "ncs_base");
  check_map(cost.ncsPerSlave, "ncs_per_slave");
  check_map(cost.stNetworkMs, "st_network_ms");
  // Service times are taken at the top-10 unit.
  lookup(cost.tMasterRpcMs, 10, "t_master_rpc_ms");
  lookup(cost.ncsBase, 10, "ncs_base");
  lookup(cost.ncsPerSlave, 10, "ncs_per_slave");
  lookup(cost.stNetworkMs, 10, "st_network_ms");
}

std::vector<std::uint32_t> ModelParams::ks() const {
  std::set<std::uint32_t> out;
  for (const auto& [key, _] : qmr) out.insert(key.second);
  return {out.begin(), out.end()};
}

ModelParams ModelParams::parse(std::string_view text) {
  ModelParams p;
  p.qmr.clear();
  std::size_t lineNo = 0;
  std::set<std::string, std::less<>> seen;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineNo;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(lineNo) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.emplace(key).second) throw ConfigError("duplicate key '" + std::string(key) + "'");

    auto dot = key.find('.');
    const auto base = key.substr(0, dot);
    const auto rest = dot == std::string_view::npos ? std::string_view{} : key.substr(dot + 1);
    auto num = [&] { return parse_number<double>(value, key); };
    auto count = [&] { return parse_number<std::uint32_t>(value, key); };
    auto per_k = [&](KMap& m) {
      if (rest.empty()) throw ConfigError("key '" + std::string(key) + "' needs a .k<N> suffix");
      m[parse_k(rest, key)] = num();
    };

    if (key == "nm") p.nm = count();
    else if (key == "ncm") p.ncm = count();
    else if (key == "ns") p.ns = count();
    else if (key == "nh") p.nh = count();
    else if (key == "alpha") p.alpha = num();
    else if (key == "t_parent_proc_ms") p.cost.tParentProcMs = num();
    else if (key == "t_child_proc_ms") p.cost.tChildProcMs = num();
    else if (key == "t_comparison_us") p.cost.tComparisonUs = num();
    else if (key == "t_base_us") p.cost.tBaseUs = num();
    else if (key == "t_per_context_switch_us") p.cost.tPerContextSwitchUs = num();
    else if (base == "t_master_rpc_ms") per_k(p.cost.tMasterRpcMs);
    else if (base == "ncs_base") per_k(p.cost.ncsBase);
    else if (base == "ncs_per_slave") per_k(p.cost.ncsPerSlave);
    else if (base == "st_network_ms") per_k(p.cost.stNetworkMs);
    else if (base == "w_master") per_k(p.wMaster);
    else if (base == "w_network") per_k(p.wNetwork);
    else if (base == "qmr") {
      auto dot2 = rest.find('.');
      if (dot2 == std::string_view::npos) throw ConfigError("qmr key must be qmr.<type>.k<N>: '" + std::string(key) + "'");
      auto type = condition_type_from_string(rest.substr(0, dot2));
      if (!type) throw ConfigError("unknown condition type in '" + std::string(key) + "'");
      p.qmr[{*type, parse_k(rest.substr(dot2 + 1), key)}] = num();
    } else {
      throw ConfigError("unknown key '" + std::string(key) + "'");
    }
  }
  p.validate();
  return p;
}

ModelParams ModelParams::load(const std::filesystem::path& path) {
  try {
    return parse(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string ModelParams::serialize() const {
  std::ostringstream o;
  o << "nm=" << nm << "\nncm=" << ncm << "\nns=" << ns << "\nnh=" << nh << "\nalpha=" << fmt(alpha) << "\n";
  o << "t_parent_proc_ms=" << fmt(cost.tParentProcMs) << "\n";
  o << "t_child_proc_ms=" << fmt(cost.tChildProcMs) << "\n";
  o << "t_comparison_us=" << fmt(cost.tComparisonUs) << "\n";
  o << "t_base_us=" << fmt(cost.tBaseUs) << "\n";
  o << "t_per_context_switch_us=" << fmt(cost.tPerContextSwitchUs) << "\n";
  auto dump = [&](std::string_view name, const KMap& m) {
    for (auto [k, v] : m) o << name << ".k" << k << "=" << fmt(v) << "\n";
  };
  dump("t_master_rpc_ms", cost.tMasterRpcMs);
  dump("ncs_base", cost.ncsBase);
  dump("ncs_per_slave", cost.ncsPerSlave);
  dump("st_network_ms", cost.stNetworkMs);
  dump("w_master", wMaster);
  dump("w_network", wNetwork);
  for (const auto& [key, v] : qmr) o << "qmr." << to_string(key.first) << ".k" << key.second << "=" << fmt(v) << "\n";
  return o.str();
}

ModelParams reference_params() {
  ModelParams p;
  p.nm = 1;
  p.ncm = 1;
  p.ns = 5;
  p.nh = 1;
  p.alpha = 0.25;
  p.qmr = {{{ConditionType::single, 10}, 1.0}};
  p.wMaster = {{10, 1.0}};
  p.wNetwork = {{10, 1.0}};
  auto& c = p.cost;
  c.tParentProcMs = 1.516;
  c.tChildProcMs = 0.0181;
  c.tMasterRpcMs = {{10, 0.01}, {50, 0.011}, {1000, 0.031}};
  c.tComparisonUs = 0.191;
  c.tBaseUs = 0.28;
  c.tPerContextSwitchUs = 15.995;
  c.ncsBase = {{10, 80.869}, {50, 80.869}, {1000, 139.903}};
  c.ncsPerSlave = {{10, 1.991}, {50, 1.991}, {1000, 3.444}};
  c.stNetworkMs = {{10, 0.129}, {50, 0.222}, {1000, 0.318}};
  return p;
}

double arrival_rate(Component c, double lambda, const ModelParams& p) {
  if (lambda < 0) throw InvalidArgument("arrival rate must be >= 0");
  switch (c) {
    case Component::masterCpu: return lambda / (static_cast<double>(p.ncm) * p.nm);
    case Component::masterMemBus: return lambda / p.nm;
    case Component::network: return lambda * p.ns / p.nh;
  }
  return 0;
}

double weight(Component c, std::uint32_t k, const ModelParams& p) {
  return c == Component::network ? lookup(p.wNetwork, k, "w_network") : lookup(p.wMaster, k, "w_master");
}

double weight_multiplier(Component c, const ModelParams& p) {
  std::map<std::uint32_t, double> byK;
  for (const auto& [key, ratio] : p.qmr) byK[key.second] += ratio;
  double m = 0;
  for (auto [k, ratio] : byK) m += weight(c, k, p) * ratio;
  return m;
}

double weighted_arrival_rate(Component c, double lambda, const ModelParams& p) {
  return arrival_rate(c, lambda, p) * weight_multiplier(c, p);
}

double merge_time(std::uint32_t k, std::uint32_t ns, const CostParams& c) {
  if (ns == 0) throw InvalidArgument("ns must be >= 1");
  const double height = ns <= 1 ? 0.0 : static_cast<double>(std::bit_width(ns - 1));
  return k * (height * c.tComparisonUs + c.tBaseUs) * kUs;
}

double context_switch_time(std::uint32_t k, std::uint32_t ns, const CostParams& c) {
  if (ns == 0) throw InvalidArgument("ns must be >= 1");
  return c.tPerContextSwitchUs * kUs *
         (lookup(c.ncsBase, k, "ncs_base") + ns * lookup(c.ncsPerSlave, k, "ncs_per_slave"));
}

double master_service_time(std::uint32_t k, std::uint32_t ns, const CostParams& c) {
  return c.tParentProcMs + (c.tChildProcMs + lookup(c.tMasterRpcMs, k, "t_master_rpc_ms")) * ns +
         merge_time(k, ns, c) + context_switch_time(k, ns, c);
}

std::pair<double, double> split_alpha(double st, double alpha) {
  if (!(alpha >= 0 && alpha <= 1)) throw InvalidArgument("alpha must lie in [0, 1]");
  return {st * alpha, st * (1 - alpha)};
}

double service_time(Component c, std::uint32_t k, const ModelParams& p) {
  if (c == Component::network) return lookup(p.cost.stNetworkMs, k, "st_network_ms");
  auto [cpu, mem] = split_alpha(master_service_time(k, p.ns, p.cost), p.alpha);
  return c == Component::masterCpu ? cpu : mem;
}

double md1_queue_length(double lambda, double st, std::string_view component) {
  if (lambda < 0 || st < 0) throw InvalidArgument("arrival rate and service time must be >= 0");
  const double rho = lambda * st;
  if (rho >= 1) throw SaturationError(std::string(component), rho);
  return rho * rho / (2 * (1 - rho)) + rho;
}

double component_queue_length(Component c, double lambda, const ModelParams& p) {
  return md1_queue_length(weighted_arrival_rate(c, lambda, p), service_time(c, 10, p), to_string(c));
}

double sojourn_time(Component c, std::uint32_t k, double lambda, const ModelParams& p) {
  const double rate = weighted_arrival_rate(c, lambda, p);
  const double st = service_time(c, 10, p);
  // Empty-queue limit when nothing arrives.
  double x = rate == 0 ? st : md1_queue_length(rate, st, to_string(c)) / rate;
  x *= weight(c, k, p);
  if (c == Component::network) x *= static_cast<double>(p.ns) / p.nh;
  return x;
}

void SojournSampleSet::validate() const {
  if (np == 0 || r == 0) throw ConfigError("sample set needs np >= 1 and r >= 1");
  if (queryIds.size() != perQuery.size()) throw ConfigError("sample set query ids and sequences differ in count");
  const std::size_t expect = static_cast<std::size_t>(np) * r;
  for (std::size_t i = 0; i < perQuery.size(); ++i) {
    if (perQuery[i].size() != expect) {
      throw ConfigError("query " + std::to_string(queryIds[i]) + " has " + std::to_string(perQuery[i].size()) +
                        " samples, expected np*r=" + std::to_string(expect));
    }
    for (double t : perQuery[i]) {
      if (!(t > 0) || !std::isfinite(t)) throw ConfigError("query " + std::to_string(queryIds[i]) + " has a non-positive time");
    }
  }
}

SojournSampleSet SojournSampleSet::parse(std::string_view text) {
  std::map<std::uint64_t, std::map<std::pair<std::uint32_t, std::uint32_t>, double>> rows;
  std::set<std::uint32_t> reps;
  std::set<std::uint32_t> slaves;
  std::size_t lineNo = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineNo;
    if (line.empty() || line.front() == '#') continue;
    std::string_view fields[4];
    std::size_t n = 0;
    while (n < 4) {
      auto comma = line.find(',');
      fields[n++] = trim(line.substr(0, comma));
      if (comma == std::string_view::npos) {
        line = {};
        break;
      }
      line = line.substr(comma + 1);
    }
    if (n != 4 || !line.empty()) throw ConfigError("line " + std::to_string(lineNo) + ": expected 4 comma-separated fields");
    const auto where = "line " + std::to_string(lineNo);
    const auto q = parse_number<std::uint64_t>(fields[0], where);
    const auto rep = parse_number<std::uint32_t>(fields[1], where);
    const auto slave = parse_number<std::uint32_t>(fields[2], where);
    const auto t = parse_number<double>(fields[3], where);
    if (!rows[q].emplace(std::pair{rep, slave}, t).second) throw ConfigError(where + ": duplicate observation");
    reps.insert(rep);
    slaves.insert(slave);
  }
  SojournSampleSet s;
  s.np = static_cast<std::uint32_t>(slaves.size());
  s.r = static_cast<std::uint32_t>(reps.size());
  for (auto& [q, obs] : rows) {
    s.queryIds.push_back(q);
    auto& seq = s.perQuery.emplace_back();
    for (auto& [_, t] : obs) seq.push_back(t);  // ordered by (repetition, slave)
  }
  s.validate();
  return s;
}

SojournSampleSet SojournSampleSet::load(const std::filesystem::path& path) {
  try {
    return parse(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string SojournSampleSet::serialize() const {
  std::ostringstream o;
  o << "# queryId,repetition,slaveId,sojourn_ms\n";
  for (std::size_t i = 0; i < perQuery.size(); ++i) {
    for (std::size_t j = 0; j < perQuery[i].size(); ++j) {
      o << queryIds[i] << ',' << j / np << ',' << j % np << ',' << fmt(perQuery[i][j]) << '\n';
    }
  }
  return o.str();
}

double slave_max_partitioning(const SojournSampleSet& samples, std::uint32_t ns) {
  if (ns == 0) throw InvalidArgument("ns must be >= 1");
  if (samples.perQuery.empty()) throw InvalidArgument("sample set is empty");
  const std::size_t total = static_cast<std::size_t>(samples.np) * samples.r;
  if (ns > total) {
    throw InvalidArgument("ns=" + std::to_string(ns) + " exceeds np*r=" + std::to_string(total) + " samples per query");
  }
  double sum = 0;
  for (const auto& seq : samples.perQuery) {
    const std::size_t segments = seq.size() / ns;
    double maxima = 0;
    for (std::size_t s = 0; s < segments; ++s) {
      maxima += *std::max_element(seq.begin() + s * ns, seq.begin() + (s + 1) * ns);
    }
    sum += maxima / segments;
  }
  return sum / samples.perQuery.size();
}

double ResponseEstimate::queuing_ms() const { return std::max(master_ms(), networkMs); }

ResponseEstimate total_response_time(std::uint32_t k, double lambda, const ModelParams& p,
                                     const SojournSampleSet& samples) {
  ResponseEstimate e;
  e.masterCpuMs = sojourn_time(Component::masterCpu, k, lambda, p);
  e.masterMemBusMs = sojourn_time(Component::masterMemBus, k, lambda, p);
  e.networkMs = sojourn_time(Component::network, k, lambda, p);
  e.slaveMaxMs = slave_max_partitioning(samples, p.ns);
  e.totalMs = e.queuing_ms() + e.slaveMaxMs;
  return e;
}

double estimation_error(double estimated, double measured) {
  if (!(measured > 0)) throw InvalidArgument("measured value must be > 0");
  return std::abs(estimated - measured) / measured;
}

double fit_alpha(std::span<const MeasuredPoint> points, const ModelParams& p) {
  if (points.empty()) return 0.25;
  double best = -1;
  double bestErr = 0;
  ModelParams q = p;
  for (int step = 0; step <= 100; ++step) {
    q.alpha = step / 100.0;
    double err = 0;
    try {
      for (const auto& pt : points) {
        ResponseEstimate e;
        e.masterCpuMs = sojourn_time(Component::masterCpu, pt.k, pt.lambda, q);
        e.masterMemBusMs = sojourn_time(Component::masterMemBus, pt.k, pt.lambda, q);
        e.networkMs = sojourn_time(Component::network, pt.k, pt.lambda, q);
        err += estimation_error(e.queuing_ms(), pt.measuredMs);
      }
    } catch (const SaturationError&) {
      continue;
    }
    err /= points.size();
    if (best < 0 || err < bestErr) {
      best = q.alpha;
      bestErr = err;
    }
  }
  if (best < 0) throw ConfigError("no alpha in [0, 1] keeps every measured load point stable");
  return best;
}

Md1SimResult md1_simulate(double lambda, double st, std::uint64_t nArrivals, std::uint64_t seed) {
  if (lambda < 0 || st < 0) throw InvalidArgument("arrival rate and service time must be >= 0");
  Md1SimResult out;
  if (lambda == 0 || nArrivals == 0) return out;
  if (lambda * st >= 1) throw SaturationError("simulated queue", lambda * st);
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(lambda);
  double arrival = 0;
  double lastDeparture = 0;
  double area = 0;  // integral of customers in system over time
  for (std::uint64_t i = 0; i < nArrivals; ++i) {
    arrival += gap(rng);
    const double departure = std::max(arrival, lastDeparture) + st;
    area += departure - arrival;
    lastDeparture = departure;
  }
  out.arrivals = nArrivals;
  out.meanSojourn = area / nArrivals;
  out.meanQueueLength = lastDeparture > 0 ? area / lastDeparture : 0;
  return out;
}

}  // namespace shardex::model
