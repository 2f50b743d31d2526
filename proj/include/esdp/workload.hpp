#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "esdp/bipartite.hpp"
#include "esdp/rng.hpp"

namespace esdp {

// Per-port job arrival probabilities; at most one job per port per slot.
struct ArrivalModel {
  std::vector<double> arrival_probs;

  void validate() const {
    for (double p : arrival_probs)
      if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("arrival probability outside [0,1]");
  }
};

inline std::vector<std::uint8_t> sample_arrivals(const ArrivalModel& am, Rng& rng) {
  std::vector<std::uint8_t> out(am.arrival_probs.size(), 0);
  for (std::size_t l = 0; l < out.size(); ++l)
    out[l] = rng.bernoulli(am.arrival_probs[l]) ? 1 : 0;
  return out;
}

enum class CostAggregation { kMean, kSum };

inline std::string cost_aggregation_name(CostAggregation c) {
  return c == CostAggregation::kMean ? "mean" : "sum";
}

inline CostAggregation parse_cost_aggregation(const std::string& name) {
  if (name == "mean") return CostAggregation::kMean;
  if (name == "sum") return CostAggregation::kSum;
  throw std::invalid_argument("unknown cost aggregation: " + name);
}

// Per-channel valuation noise model. The net value revealed for a dispatched
// edge is clamp(N(raw_mean, raw_std) - edge_cost, 0, 1); `true_net_means`
// holds the mean of that clamped sampler and is the ground truth the
// omniscient benchmark and pseudo-regret are computed against.
struct ValuationModel {
  std::vector<double> raw_means;       // mu_e
  std::vector<double> raw_stds;        // sigma_e
  std::vector<double> edge_costs;      // aggregated supply cost per edge
  std::vector<double> true_net_means;  // mean of the clamped net sampler

  std::size_t num_edges() const { return raw_means.size(); }

  void validate() const {
    const std::size_t n = raw_means.size();
    if (raw_stds.size() != n || edge_costs.size() != n)
      throw std::invalid_argument("valuation model dimension mismatch");
    if (!true_net_means.empty() && true_net_means.size() != n)
      throw std::invalid_argument("true_net_means dimension mismatch");
    for (double v : true_net_means)
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("true net mean outside [0,1]");
    for (double s : raw_stds)
      if (s < 0.0) throw std::invalid_argument("negative valuation std");
  }
};

inline double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// One fresh net-valuation vector for the slot. The whole vector is drawn even
// though a policy only ever observes the entries it selected.
inline std::vector<double> sample_net_valuations(const ValuationModel& vm, Rng& rng) {
  std::vector<double> z(vm.num_edges(), 0.0);
  for (std::size_t e = 0; e < z.size(); ++e)
    z[e] = clamp01(rng.normal(vm.raw_means[e], vm.raw_stds[e]) - vm.edge_costs[e]);
  return z;
}

// Monte Carlo estimate of the clamped net-valuation mean per edge. This is
// the ground truth for regret traces; it is computed once per instance and
// serialized with it, so reruns never depend on re-estimation.
inline std::vector<double> compute_true_net_means(const ValuationModel& vm,
                                                  std::int64_t num_samples,
                                                  std::uint64_t seed) {
  if (num_samples < 100000)
    throw std::invalid_argument("compute_true_net_means: need >= 1e5 samples");
  std::vector<double> means(vm.num_edges(), 0.0);
  for (std::size_t e = 0; e < vm.num_edges(); ++e) {
    if (vm.raw_stds[e] == 0.0) {  // degenerate sampler, mean is exact
      means[e] = clamp01(vm.raw_means[e] - vm.edge_costs[e]);
      continue;
    }
    Rng rng(derive_seed(seed, 0x9d00 + e));
    double sum = 0.0;
    for (std::int64_t i = 0; i < num_samples; ++i)
      sum += clamp01(rng.normal(vm.raw_means[e], vm.raw_stds[e]) - vm.edge_costs[e]);
    means[e] = clamp01(sum / static_cast<double>(num_samples));
  }
  return means;
}

struct ValuationParams {
  double mu_lo = 0.1;
  double mu_hi = 1.0;
  double cost_mean = 0.5;
  double cost_std = 0.1;
  CostAggregation cost_aggregation = CostAggregation::kMean;
  std::int64_t mc_samples = 200000;
};

// Samples raw means uniformly on [mu_lo, mu_hi], sets sigma = mu / 2, draws
// one supply-cost value per (device type, edge) from N(cost_mean, cost_std),
// aggregates them per edge, and fixes the ground-truth net means.
inline ValuationModel build_random_valuations(const BipartiteGraph& g,
                                              int num_resource_types,
                                              const ValuationParams& p,
                                              std::uint64_t seed) {
  if (p.mu_lo > p.mu_hi)
    throw std::invalid_argument("build_random_valuations: mu_lo > mu_hi");
  Rng rng(derive_seed(seed, 0x7661));
  const int num_edges = g.num_edges();
  ValuationModel vm;
  vm.raw_means.resize(num_edges);
  vm.raw_stds.resize(num_edges);
  vm.edge_costs.resize(num_edges);
  for (int e = 0; e < num_edges; ++e) {
    const double mu = p.mu_lo + (p.mu_hi - p.mu_lo) * rng.uniform01();
    vm.raw_means[e] = mu;
    vm.raw_stds[e] = mu / 2.0;
    double cost = 0.0;
    for (int k = 0; k < num_resource_types; ++k)
      cost += rng.normal(p.cost_mean, p.cost_std);
    if (p.cost_aggregation == CostAggregation::kMean)
      cost /= static_cast<double>(num_resource_types);
    vm.edge_costs[e] = clamp01(cost);
  }
  vm.true_net_means =
      compute_true_net_means(vm, p.mc_samples, derive_seed(seed, 0x6d63));
  vm.validate();
  return vm;
}

}  // namespace esdp
