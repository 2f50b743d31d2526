#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "esdp/instance.hpp"
#include "esdp/policies.hpp"

namespace esdp {

// Raised when a policy emits a decision violating capacity or the arrival
// mask. This is a test tripwire: the run aborts rather than repairing.
class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MBoundMode { kAlpha, kExact };

inline std::string m_bound_mode_name(MBoundMode m) {
  return m == MBoundMode::kAlpha ? "alpha" : "exact";
}

inline MBoundMode parse_m_bound_mode(const std::string& name) {
  if (name == "alpha") return MBoundMode::kAlpha;
  if (name == "exact") return MBoundMode::kExact;
  throw std::invalid_argument("unknown m_bound mode: " + name);
}

inline const std::vector<std::string>& known_policies() {
  static const std::vector<std::string> names = {"esdp", "hswf", "lcf", "lwtf",
                                                 "oracle"};
  return names;
}

struct SimConfig {
  // Run shape
  std::int64_t horizon = 2000;
  std::uint64_t seed = 1;
  int replications = 10;
  std::vector<std::string> policies = {"esdp", "hswf", "lcf", "lwtf"};
  // Topology
  int num_ports = 8;
  int num_servers = 40;
  double edge_prob = 0.1;
  // Devices
  int num_resource_types = 3;
  int req_lo = 1;
  int req_hi = 2;
  int cap_lo = 1;
  int cap_hi = 2;
  double capacity_scale = 1.0;
  // Workload
  double arrival_prob = 0.9;
  double mu_lo = 0.1;
  double mu_hi = 1.0;
  double cost_mean = 0.5;
  double cost_std = 0.1;
  CostAggregation cost_aggregation = CostAggregation::kMean;
  std::int64_t mc_samples = 200000;
  // Schedules
  DeltaVariant delta_variant = DeltaVariant::kDefault;
  GVariant g_variant = GVariant::kDefault;
  double alpha = 0.5;
  // The exact knapsack bound keeps the exploration weight honest; the
  // alpha * |E| shortcut stays available for sensitivity studies.
  MBoundMode m_bound_mode = MBoundMode::kExact;
  double ucb_multiplier = 1.0;
  // Output
  bool trace_timing = false;
  bool trace_stats = false;
  std::string instance_file;  // reuse a saved instance instead of sampling

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (policies.empty()) throw std::invalid_argument("policy list is empty");
    for (const auto& p : policies) {
      bool known = false;
      for (const auto& k : known_policies()) known = known || k == p;
      if (!known) throw std::invalid_argument("unknown policy: " + p);
    }
    if (num_ports < 1 || num_servers < 1)
      throw std::invalid_argument("graph sizes must be >= 1");
    if (edge_prob < 0.0 || edge_prob > 1.0)
      throw std::invalid_argument("edge_prob outside [0,1]");
    if (num_resource_types < 1)
      throw std::invalid_argument("num_resource_types must be >= 1");
    if (req_lo < 1 || req_hi < req_lo)
      throw std::invalid_argument("bad requirement bounds");
    if (cap_lo < 0 || cap_hi < cap_lo)
      throw std::invalid_argument("bad capacity bounds");
    if (capacity_scale <= 0.0)
      throw std::invalid_argument("capacity_scale must be > 0");
    if (arrival_prob < 0.0 || arrival_prob > 1.0)
      throw std::invalid_argument("arrival_prob outside [0,1]");
    if (mu_lo > mu_hi) throw std::invalid_argument("mu_lo > mu_hi");
    if (cost_std < 0.0) throw std::invalid_argument("cost_std must be >= 0");
    if (mc_samples < 100000)
      throw std::invalid_argument("mc_samples must be >= 100000");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha outside [0,1]");
    if (ucb_multiplier <= 0.0)
      throw std::invalid_argument("ucb_multiplier must be > 0");
  }
};

inline std::uint64_t instance_seed_for(const SimConfig& cfg, int rep) {
  return derive_seed(cfg.seed, 1000 + rep);
}

inline std::uint64_t env_seed_for(const SimConfig& cfg, int rep) {
  return derive_seed(cfg.seed, 2000 + rep);
}

inline Instance sample_instance(const SimConfig& cfg, std::uint64_t instance_seed) {
  Instance inst;
  inst.seed = instance_seed;
  inst.graph = build_random_graph(cfg.num_ports, cfg.num_servers, cfg.edge_prob,
                                  derive_seed(instance_seed, 1));
  inst.resources = build_random_resources(
      inst.graph, cfg.num_resource_types, cfg.req_lo, cfg.req_hi, cfg.cap_lo,
      cfg.cap_hi, cfg.capacity_scale, derive_seed(instance_seed, 2));
  inst.arrivals.arrival_probs.assign(cfg.num_ports, cfg.arrival_prob);
  ValuationParams vp;
  vp.mu_lo = cfg.mu_lo;
  vp.mu_hi = cfg.mu_hi;
  vp.cost_mean = cfg.cost_mean;
  vp.cost_std = cfg.cost_std;
  vp.cost_aggregation = cfg.cost_aggregation;
  vp.mc_samples = cfg.mc_samples;
  inst.valuations = build_random_valuations(
      inst.graph, cfg.num_resource_types, vp, derive_seed(instance_seed, 3));
  inst.validate();
  return inst;
}

inline Schedules make_schedules(const SimConfig& cfg, const BipartiteGraph& g,
                                const ResourceModel& rm) {
  Schedules sched;
  sched.delta_variant = cfg.delta_variant;
  sched.g_variant = cfg.g_variant;
  sched.alpha = cfg.alpha;
  sched.ucb_multiplier = cfg.ucb_multiplier;
  if (cfg.m_bound_mode == MBoundMode::kAlpha)
    sched.cardinality_bound = std::max(
        1, static_cast<int>(std::ceil(cfg.alpha * g.num_edges())));
  else
    sched.cardinality_bound = std::max(1, max_feasible_cardinality(rm));
  sched.validate();
  return sched;
}

struct PolicySeries {
  std::string name;
  std::vector<double> sw;           // realized social welfare per slot
  std::vector<double> cum_sw;
  std::vector<double> regret;       // true-mean gap to the benchmark
  std::vector<double> cum_regret;
  std::vector<std::int64_t> wall_ns;
};

struct RunResult {
  std::int64_t horizon = 0;
  std::uint64_t instance_seed = 0;
  std::uint64_t env_seed = 0;
  double theorem1_prob = 0.0;
  std::vector<double> oracle_value;  // benchmark true-mean value per slot
  std::vector<double> cum_oracle;
  std::vector<PolicySeries> policies;

  const PolicySeries& series(const std::string& name) const {
    for (const auto& p : policies)
      if (p.name == name) return p;
    throw std::invalid_argument("no such policy series: " + name);
  }
};

// Hard tripwire on the two constraints every policy must honor.
inline void validate_decision(const DecisionVector& x, const ResourceModel& rm,
                              const BipartiteGraph& g,
                              const std::vector<std::uint8_t>& arrivals,
                              const std::string& policy_name, std::int64_t t) {
  if (!is_feasible(x, rm))
    throw SimError("policy " + policy_name + " violated capacity at t=" +
                   std::to_string(t));
  for (int e = 0; e < g.num_edges(); ++e)
    if (x.bits[e] && !arrivals[g.edges[e].first])
      throw SimError("policy " + policy_name +
                     " violated the arrival mask at t=" + std::to_string(t));
}

// Bound on the probability that every port yields a job in one slot.
inline double theorem1_probability(const std::vector<double>& arrival_probs) {
  double sum = 0.0;
  for (double p : arrival_probs) sum += p;
  const double gap = static_cast<double>(arrival_probs.size()) - sum;
  return std::exp(-(gap * gap) / 3.0);
}

// One replication: every policy sees the same arrival stream and, for the
// edges it selects, the same valuation draws. Unselected entries of the
// observation vector are poisoned so a policy peeking outside its own
// feedback trips the statistics guards.
inline RunResult run_single(const Instance& inst, const SimConfig& cfg,
                            std::uint64_t env_seed,
                            std::ostream* stats_dump = nullptr) {
  cfg.validate();
  const BipartiteGraph& g = inst.graph;
  const ResourceModel& rm = inst.resources;
  const Schedules sched = make_schedules(cfg, g, rm);

  std::vector<std::unique_ptr<Policy>> policies;
  for (const auto& name : cfg.policies)
    policies.push_back(make_policy(name, g, rm, inst.valuations, sched));

  RunResult result;
  result.horizon = cfg.horizon;
  result.instance_seed = inst.seed;
  result.env_seed = env_seed;
  result.theorem1_prob = theorem1_probability(inst.arrivals.arrival_probs);
  result.oracle_value.reserve(cfg.horizon);
  result.cum_oracle.reserve(cfg.horizon);
  result.policies.resize(policies.size());
  for (std::size_t i = 0; i < policies.size(); ++i) {
    result.policies[i].name = policies[i]->name();
    result.policies[i].sw.reserve(cfg.horizon);
    result.policies[i].cum_sw.reserve(cfg.horizon);
    result.policies[i].regret.reserve(cfg.horizon);
    result.policies[i].cum_regret.reserve(cfg.horizon);
    result.policies[i].wall_ns.reserve(cfg.horizon);
  }

  Rng env(env_seed);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double>& truth = inst.valuations.true_net_means;
  std::vector<double> observed(g.num_edges(), nan);
  double cum_oracle = 0.0;

  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    const std::vector<std::uint8_t> arrivals = sample_arrivals(inst.arrivals, env);
    const std::vector<double> z = sample_net_valuations(inst.valuations, env);

    auto [bench_x, bench_dp_value] =
        max_weight_feasible(truth, rm, arrival_edge_mask(g, arrivals));
    (void)bench_dp_value;
    // Benchmark value re-summed in edge order: a policy that picks the same
    // dispatch must land on a regret of exactly zero.
    double bench_value = 0.0;
    for (int e = 0; e < g.num_edges(); ++e)
      if (bench_x.bits[e]) bench_value += truth[e];
    result.oracle_value.push_back(bench_value);
    cum_oracle += bench_value;
    result.cum_oracle.push_back(cum_oracle);

    for (std::size_t i = 0; i < policies.size(); ++i) {
      PolicySeries& series = result.policies[i];
      const auto start = std::chrono::steady_clock::now();
      const PolicyDecision decision = policies[i]->decide(arrivals, t);
      const auto stop = std::chrono::steady_clock::now();
      series.wall_ns.push_back(
          std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start)
              .count());

      validate_decision(decision.x, rm, g, arrivals, series.name, t);

      double sw = 0.0, true_value = 0.0;
      for (int e = 0; e < g.num_edges(); ++e) {
        if (!decision.x.bits[e]) continue;
        sw += z[e];
        true_value += truth[e];
        observed[e] = z[e];
      }
      double regret = bench_value - true_value;
      if (regret < -1e-9)
        throw SimError("negative regret for policy " + series.name +
                       " at t=" + std::to_string(t) +
                       " (benchmark suboptimal)");
      if (regret < 0.0) regret = 0.0;

      policies[i]->observe(decision.x, observed, arrivals, t);
      for (int e = 0; e < g.num_edges(); ++e)
        if (decision.x.bits[e]) observed[e] = nan;

      series.sw.push_back(sw);
      series.cum_sw.push_back(series.cum_sw.empty() ? sw
                                                    : series.cum_sw.back() + sw);
      series.regret.push_back(regret);
      series.cum_regret.push_back(
          series.cum_regret.empty() ? regret : series.cum_regret.back() + regret);
    }

    if (stats_dump) {
      for (std::size_t i = 0; i < policies.size(); ++i) {
        const auto* esdp = dynamic_cast<const EsdpPolicy*>(policies[i].get());
        if (!esdp) continue;
        const EdgeStats& st = esdp->stats();
        for (int e = 0; e < g.num_edges(); ++e)
          (*stats_dump) << t << ',' << e << ',' << st.counts[e] << ','
                        << format_double(st.means[e]) << ','
                        << format_double(st.var_proxy[e]) << '\n';
      }
    }
  }
  return result;
}

// All replications. When no instance file is pinned, each replication samples
// its own world from a seed derived from the master seed; the environment
// stream is always policy-independent, so editing the policy list never
// perturbs the sampled arrivals or valuations.
inline std::vector<RunResult> run(const SimConfig& cfg,
                                  const Instance* fixed_instance = nullptr) {
  cfg.validate();
  std::vector<RunResult> results(cfg.replications);
  auto one = [&](int rep) {
    Instance inst;
    if (fixed_instance) {
      inst = *fixed_instance;
    } else {
      inst = sample_instance(cfg, instance_seed_for(cfg, rep));
    }
    return run_single(inst, cfg, env_seed_for(cfg, rep));
  };
  if (cfg.replications == 1) {
    results[0] = one(0);
    return results;
  }
  std::vector<std::future<RunResult>> futures;
  futures.reserve(cfg.replications);
  for (int rep = 0; rep < cfg.replications; ++rep)
    futures.push_back(std::async(std::launch::async, one, rep));
  for (int rep = 0; rep < cfg.replications; ++rep)
    results[rep] = futures[rep].get();
  return results;
}

struct SeriesStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

struct Aggregate {
  std::int64_t horizon = 0;
  std::vector<std::string> policy_names;
  std::map<std::string, SeriesStats> cum_sw;
  std::map<std::string, SeriesStats> cum_regret;
  std::map<std::string, SeriesStats> sw;
  SeriesStats oracle_cum;
  // mean cum_sw of esdp over mean cum_sw of each other policy, per slot
  std::map<std::string, std::vector<double>> ratio_vs_esdp;
};

inline SeriesStats mean_std(const std::vector<const std::vector<double>*>& rows) {
  SeriesStats out;
  if (rows.empty()) return out;
  const std::size_t n = rows[0]->size();
  out.mean.assign(n, 0.0);
  out.stddev.assign(n, 0.0);
  for (const auto* row : rows)
    for (std::size_t i = 0; i < n; ++i) out.mean[i] += (*row)[i];
  for (std::size_t i = 0; i < n; ++i) out.mean[i] /= rows.size();
  for (const auto* row : rows)
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (*row)[i] - out.mean[i];
      out.stddev[i] += d * d;
    }
  for (std::size_t i = 0; i < n; ++i)
    out.stddev[i] = std::sqrt(out.stddev[i] / rows.size());
  return out;
}

inline Aggregate aggregate(const std::vector<RunResult>& results) {
  if (results.empty()) throw std::invalid_argument("aggregate: no results");
  Aggregate agg;
  agg.horizon = results[0].horizon;
  for (const auto& r : results) {
    if (r.horizon != agg.horizon)
      throw std::invalid_argument("aggregate: mismatched horizons");
    if (r.policies.size() != results[0].policies.size())
      throw std::invalid_argument("aggregate: mismatched policy lists");
  }
  for (const auto& p : results[0].policies) agg.policy_names.push_back(p.name);

  std::vector<const std::vector<double>*> rows;
  for (std::size_t i = 0; i < agg.policy_names.size(); ++i) {
    const std::string& name = agg.policy_names[i];
    rows.clear();
    for (const auto& r : results) rows.push_back(&r.policies[i].cum_sw);
    agg.cum_sw[name] = mean_std(rows);
    rows.clear();
    for (const auto& r : results) rows.push_back(&r.policies[i].cum_regret);
    agg.cum_regret[name] = mean_std(rows);
    rows.clear();
    for (const auto& r : results) rows.push_back(&r.policies[i].sw);
    agg.sw[name] = mean_std(rows);
  }
  rows.clear();
  for (const auto& r : results) rows.push_back(&r.cum_oracle);
  agg.oracle_cum = mean_std(rows);

  const bool has_esdp =
      agg.cum_sw.find("esdp") != agg.cum_sw.end();
  if (has_esdp) {
    const auto& esdp_mean = agg.cum_sw["esdp"].mean;
    for (const auto& name : agg.policy_names) {
      if (name == "esdp") continue;
      const auto& other = agg.cum_sw[name].mean;
      std::vector<double> ratio(esdp_mean.size());
      for (std::size_t i = 0; i < ratio.size(); ++i)
        ratio[i] = other[i] != 0.0
                       ? esdp_mean[i] / other[i]
                       : std::numeric_limits<double>::quiet_NaN();
      agg.ratio_vs_esdp[name] = std::move(ratio);
    }
  }
  return agg;
}

// Trace rows: one line per (slot, policy). The wall_ns column is zeroed
// unless timing is explicitly enabled, keeping default traces byte-stable
// across reruns.
inline void write_trace_csv(std::ostream& os, const RunResult& result,
                            bool include_timing) {
  os << "t,policy,sw,cum_sw,oracle_value,regret,cum_regret,wall_ns\n";
  for (std::int64_t t = 1; t <= result.horizon; ++t) {
    const std::size_t i = static_cast<std::size_t>(t - 1);
    for (const auto& p : result.policies) {
      os << t << ',' << p.name << ',' << format_double(p.sw[i]) << ','
         << format_double(p.cum_sw[i]) << ','
         << format_double(result.oracle_value[i]) << ','
         << format_double(p.regret[i]) << ',' << format_double(p.cum_regret[i])
         << ',' << (include_timing ? p.wall_ns[i] : 0) << '\n';
    }
  }
}

}  // namespace esdp
