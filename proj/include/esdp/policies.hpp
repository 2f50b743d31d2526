#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "esdp/bipartite.hpp"
#include "esdp/knapdp.hpp"
#include "esdp/stats.hpp"
#include "esdp/workload.hpp"

namespace esdp {

struct PolicyDecision {
  DecisionVector x;
  // Diagnostics; only meaningful for the policies that fill them in.
  std::int64_t chosen_budget = -1;     // selected s for the budgeted family
  double index_value = 0.0;           // s + ucb_multiplier * sqrt(objective)
  std::vector<int> service_order;     // ports in greedy service order
};

// Zeroes every edge whose port has no arrival this slot.
inline void apply_arrival_mask(DecisionVector& x, const BipartiteGraph& g,
                               const std::vector<std::uint8_t>& arrivals) {
  for (int l = 0; l < g.num_ports; ++l) {
    if (arrivals[l]) continue;
    for (int e : g.port_edges[l]) x.bits[e] = 0;
  }
}

inline std::vector<std::uint8_t> arrival_edge_mask(
    const BipartiteGraph& g, const std::vector<std::uint8_t>& arrivals) {
  std::vector<std::uint8_t> allowed(g.num_edges(), 0);
  for (int e = 0; e < g.num_edges(); ++e)
    allowed[e] = arrivals[g.edges[e].first];
  return allowed;
}

// Budget selection over a solved family: the largest index value
// s + ucb_multiplier * sqrt(objective(s)), ties resolved to the smallest s.
inline std::pair<std::int64_t, double> pick_budget(const FamilyResult& family,
                                                   double ucb_multiplier) {
  std::int64_t best_s = -1;
  double best_value = 0.0;
  for (std::int64_t s = 0; s <= family.s_max(); ++s) {
    const FamilyEntry& entry = family.at(s);
    if (!entry.feasible) continue;
    const double value =
        static_cast<double>(s) +
        ucb_multiplier * std::sqrt(static_cast<double>(entry.objective));
    if (best_s < 0 || value > best_value) {
      best_s = s;
      best_value = value;
    }
  }
  if (best_s < 0)
    throw std::logic_error("pick_budget: s = 0 must always be feasible");
  return {best_s, best_value};
}

// Decision rule given already-scaled statistics: solve the budget family,
// pick the index-maximizing budget, then mask out non-arrived ports.
inline PolicyDecision esdp_decide_scaled(const ScaledStats& ss,
                                         const ResourceModel& rm,
                                         const BipartiteGraph& g,
                                         const std::vector<std::uint8_t>& arrivals,
                                         double ucb_multiplier,
                                         DPTable* workspace = nullptr) {
  BudgetedInstance inst;
  inst.requirements = rm.requirements;
  inst.capacities = rm.capacities;
  inst.scaled_means = ss.scaled_means;
  inst.scaled_vars = ss.scaled_vars;
  inst.s_max = ss.s_max;
  const FamilyResult family = solve_family(inst, workspace);
  auto [s_star, index_value] = pick_budget(family, ucb_multiplier);
  PolicyDecision out;
  out.x = family.at(s_star).x;
  out.chosen_budget = s_star;
  out.index_value = index_value;
  apply_arrival_mask(out.x, g, arrivals);
  return out;
}

class Policy {
 public:
  virtual ~Policy() = default;
  virtual const std::string& name() const = 0;
  virtual PolicyDecision decide(const std::vector<std::uint8_t>& arrivals,
                                std::int64_t t) = 0;
  // Semi-bandit feedback: `observed` is only valid at indices with x_e == 1.
  virtual void observe(const DecisionVector& x,
                       const std::vector<double>& observed,
                       const std::vector<std::uint8_t>& arrivals,
                       std::int64_t t) = 0;
};

// Upper-confidence dispatching via the scaled budgeted DP.
class EsdpPolicy final : public Policy {
 public:
  EsdpPolicy(const BipartiteGraph& g, const ResourceModel& rm, Schedules sched)
      : graph_(&g), resources_(&rm), sched_(sched), stats_(g.num_edges()) {
    sched_.validate();
  }

  const std::string& name() const override { return name_; }

  PolicyDecision decide(const std::vector<std::uint8_t>& arrivals,
                        std::int64_t t) override {
    const ScaledStats ss = scale(stats_, sched_, t);
    return esdp_decide_scaled(ss, *resources_, *graph_, arrivals,
                              sched_.ucb_multiplier, &workspace_);
  }

  void observe(const DecisionVector& x, const std::vector<double>& observed,
               const std::vector<std::uint8_t>& /*arrivals*/,
               std::int64_t t) override {
    update(stats_, x, observed, sched_, t);
  }

  const EdgeStats& stats() const { return stats_; }
  const Schedules& schedules() const { return sched_; }

 private:
  const BipartiteGraph* graph_;
  const ResourceModel* resources_;
  Schedules sched_;
  EdgeStats stats_;
  DPTable workspace_;
  std::string name_ = "esdp";
};

// Shared state of the greedy baselines: plain per-edge observation averages
// (no variance term anywhere) and per-port waiting counters.
struct BaselineState {
  std::vector<std::int64_t> counts;
  std::vector<double> value_sums;
  std::vector<std::int64_t> waiting;  // slots waited since last dispatch

  BaselineState(int num_edges, int num_ports)
      : counts(num_edges, 0), value_sums(num_edges, 0.0), waiting(num_ports, 0) {}

  double estimate(int e) const {
    return counts[e] > 0 ? value_sums[e] / static_cast<double>(counts[e]) : 0.0;
  }
};

enum class BaselineKind { kHswf, kLcf, kLwtf };

// One-channel-per-port greedy fill. Each arrived port contributes a single
// candidate channel (best estimate, or cheapest for LCF); ports are served in
// rank order and a port whose channel no longer fits is skipped, not blocking
// the ports behind it.
class GreedyBaselinePolicy final : public Policy {
 public:
  GreedyBaselinePolicy(BaselineKind kind, const BipartiteGraph& g,
                       const ResourceModel& rm, const ValuationModel& vm)
      : kind_(kind),
        graph_(&g),
        resources_(&rm),
        valuations_(&vm),
        state_(g.num_edges(), g.num_ports),
        name_(kind == BaselineKind::kHswf   ? "hswf"
              : kind == BaselineKind::kLcf  ? "lcf"
                                            : "lwtf") {}

  const std::string& name() const override { return name_; }

  PolicyDecision decide(const std::vector<std::uint8_t>& arrivals,
                        std::int64_t /*t*/) override {
    const BipartiteGraph& g = *graph_;
    const ResourceModel& rm = *resources_;
    std::vector<int> ports;
    std::vector<int> channel(g.num_ports, -1);
    std::vector<double> key(g.num_ports, 0.0);
    for (int l = 0; l < g.num_ports; ++l) {
      if (!arrivals[l] || g.port_edges[l].empty()) continue;
      int best = -1;
      double best_key = 0.0;
      for (int e : g.port_edges[l]) {
        const double k = kind_ == BaselineKind::kLcf ? valuations_->edge_costs[e]
                                                     : state_.estimate(e);
        const bool better = best < 0 || (kind_ == BaselineKind::kLcf
                                             ? k < best_key
                                             : k > best_key);
        if (better) {
          best = e;
          best_key = k;
        }
      }
      channel[l] = best;
      key[l] = rank_key(l, best);
      ports.push_back(l);
    }
    std::sort(ports.begin(), ports.end(), [&](int a, int b) {
      if (key[a] != key[b]) return key[a] > key[b];
      return a < b;
    });

    PolicyDecision out;
    out.x = DecisionVector(g.num_edges());
    out.service_order = ports;
    std::vector<long long> used(rm.num_resource_types, 0);
    for (int l : ports) {
      const int e = channel[l];
      bool fits = true;
      for (int k = 0; k < rm.num_resource_types; ++k)
        if (used[k] + rm.requirements[k][e] > rm.capacities[k]) {
          fits = false;
          break;
        }
      if (!fits) continue;
      out.x.bits[e] = 1;
      for (int k = 0; k < rm.num_resource_types; ++k)
        used[k] += rm.requirements[k][e];
    }
    return out;
  }

  void observe(const DecisionVector& x, const std::vector<double>& observed,
               const std::vector<std::uint8_t>& arrivals,
               std::int64_t /*t*/) override {
    const BipartiteGraph& g = *graph_;
    for (int e = 0; e < g.num_edges(); ++e) {
      if (!x.bits[e]) continue;
      state_.counts[e] += 1;
      state_.value_sums[e] += observed[e];
    }
    for (int l = 0; l < g.num_ports; ++l) {
      bool dispatched = false;
      for (int e : g.port_edges[l]) dispatched = dispatched || x.bits[e];
      if (dispatched)
        state_.waiting[l] = 0;
      else if (arrivals[l])
        state_.waiting[l] += 1;
    }
  }

  const BaselineState& state() const { return state_; }

 private:
  double rank_key(int port, int edge) const {
    switch (kind_) {
      case BaselineKind::kHswf:
        return state_.estimate(edge);
      case BaselineKind::kLcf:
        // Greater key = served earlier, so cheaper ranks first.
        return -valuations_->edge_costs[edge];
      case BaselineKind::kLwtf:
        return static_cast<double>(state_.waiting[port]);
    }
    return 0.0;
  }

  BaselineKind kind_;
  const BipartiteGraph* graph_;
  const ResourceModel* resources_;
  const ValuationModel* valuations_;
  BaselineState state_;
  std::string name_;
};

// Benchmark that knows the true net means and solves each slot exactly over
// the arrived ports.
class OraclePolicy final : public Policy {
 public:
  OraclePolicy(const BipartiteGraph& g, const ResourceModel& rm,
               const ValuationModel& vm)
      : graph_(&g), resources_(&rm), valuations_(&vm) {}

  const std::string& name() const override { return name_; }

  PolicyDecision decide(const std::vector<std::uint8_t>& arrivals,
                        std::int64_t /*t*/) override {
    PolicyDecision out;
    auto [x, value] = max_weight_feasible(valuations_->true_net_means,
                                          *resources_,
                                          arrival_edge_mask(*graph_, arrivals));
    out.x = std::move(x);
    out.index_value = value;
    return out;
  }

  void observe(const DecisionVector&, const std::vector<double>&,
               const std::vector<std::uint8_t>&, std::int64_t) override {}

 private:
  const BipartiteGraph* graph_;
  const ResourceModel* resources_;
  const ValuationModel* valuations_;
  std::string name_ = "oracle";
};

inline std::unique_ptr<Policy> make_policy(const std::string& name,
                                           const BipartiteGraph& g,
                                           const ResourceModel& rm,
                                           const ValuationModel& vm,
                                           const Schedules& sched) {
  if (name == "esdp") return std::make_unique<EsdpPolicy>(g, rm, sched);
  if (name == "hswf")
    return std::make_unique<GreedyBaselinePolicy>(BaselineKind::kHswf, g, rm, vm);
  if (name == "lcf")
    return std::make_unique<GreedyBaselinePolicy>(BaselineKind::kLcf, g, rm, vm);
  if (name == "lwtf")
    return std::make_unique<GreedyBaselinePolicy>(BaselineKind::kLwtf, g, rm, vm);
  if (name == "oracle") return std::make_unique<OraclePolicy>(g, rm, vm);
  throw std::invalid_argument("unknown policy: " + name);
}

}  // namespace esdp
