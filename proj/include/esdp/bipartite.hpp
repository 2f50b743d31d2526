#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "esdp/rng.hpp"

namespace esdp {

// A binary dispatch vector over edge indices: bit e == 1 means the job of
// edge e's port is dispatched through that channel this slot.
struct DecisionVector {
  std::vector<std::uint8_t> bits;

  DecisionVector() = default;
  explicit DecisionVector(std::size_t num_edges) : bits(num_edges, 0) {}

  std::size_t size() const { return bits.size(); }
  int ones() const {
    int n = 0;
    for (auto b : bits) n += b != 0;
    return n;
  }
  bool operator==(const DecisionVector& o) const { return bits == o.bits; }
};

// Port/server topology with a stable edge indexing. Edge index e is the
// coordinate system for every decision vector, statistic, and DP table, so
// `edges` is kept sorted by (port, server) and never reordered afterwards.
struct BipartiteGraph {
  int num_ports = 0;
  int num_servers = 0;
  std::vector<std::pair<int, int>> edges;       // (port, server), sorted
  std::vector<std::vector<int>> port_edges;     // incident edge ids per port
  std::vector<std::vector<int>> server_edges;   // incident edge ids per server

  int num_edges() const { return static_cast<int>(edges.size()); }

  void rebuild_incidence() {
    port_edges.assign(num_ports, {});
    server_edges.assign(num_servers, {});
    for (int e = 0; e < num_edges(); ++e) {
      port_edges[edges[e].first].push_back(e);
      server_edges[edges[e].second].push_back(e);
    }
  }

  void validate() const {
    if (num_ports < 1 || num_servers < 1)
      throw std::invalid_argument("graph must have at least one port and one server");
    std::set<std::pair<int, int>> seen;
    for (const auto& [l, r] : edges) {
      if (l < 0 || l >= num_ports || r < 0 || r >= num_servers)
        throw std::invalid_argument("edge endpoint out of range");
      if (!seen.insert({l, r}).second)
        throw std::invalid_argument("duplicate edge (" + std::to_string(l) + "," +
                                    std::to_string(r) + ")");
    }
    if (!std::is_sorted(edges.begin(), edges.end()))
      throw std::invalid_argument("edges must be sorted by (port, server)");
  }
};

// Samples each (port, server) pair independently with probability edge_prob.
// A port that ends up isolated gets one uniformly random server attached so
// that a missing arrival is the only reason a port can sit idle.
inline BipartiteGraph build_random_graph(int num_ports, int num_servers,
                                         double edge_prob, std::uint64_t seed) {
  if (num_ports < 1 || num_servers < 1)
    throw std::invalid_argument("build_random_graph: sizes must be >= 1");
  if (edge_prob < 0.0 || edge_prob > 1.0)
    throw std::invalid_argument("build_random_graph: edge_prob outside [0,1]");

  Rng rng(derive_seed(seed, 0x6772));
  BipartiteGraph g;
  g.num_ports = num_ports;
  g.num_servers = num_servers;
  std::vector<int> degree(num_ports, 0);
  for (int l = 0; l < num_ports; ++l) {
    for (int r = 0; r < num_servers; ++r) {
      if (rng.bernoulli(edge_prob)) {
        g.edges.emplace_back(l, r);
        ++degree[l];
      }
    }
  }
  for (int l = 0; l < num_ports; ++l) {
    if (degree[l] == 0) {
      int r = static_cast<int>(rng.uniform_int(0, num_servers - 1));
      g.edges.emplace_back(l, r);
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.rebuild_incidence();
  g.validate();
  return g;
}

// Device requirements and capacities: `requirements[k][e]` units of device
// type k are locked when edge e is dispatched, against a cluster-wide budget
// of `capacities[k]` units.
struct ResourceModel {
  int num_resource_types = 0;
  std::vector<std::vector<int>> requirements;  // [k][e]
  std::vector<int> capacities;                 // [k]

  int num_edges() const {
    return requirements.empty() ? 0 : static_cast<int>(requirements[0].size());
  }

  void validate(int expected_edges) const {
    if (num_resource_types < 1)
      throw std::invalid_argument("resource model needs at least one device type");
    if (static_cast<int>(requirements.size()) != num_resource_types ||
        static_cast<int>(capacities.size()) != num_resource_types)
      throw std::invalid_argument("resource model dimension mismatch");
    for (const auto& row : requirements) {
      if (static_cast<int>(row.size()) != expected_edges)
        throw std::invalid_argument("requirement row length != edge count");
      for (int a : row)
        if (a < 0) throw std::invalid_argument("negative requirement entry");
    }
    for (int c : capacities)
      if (c < 0) throw std::invalid_argument("negative capacity");
    for (int e = 0; e < expected_edges; ++e) {
      bool consumes = false;
      for (int k = 0; k < num_resource_types; ++k)
        consumes = consumes || requirements[k][e] >= 1;
      if (!consumes)
        throw std::invalid_argument("edge " + std::to_string(e) +
                                    " consumes no resource");
    }
  }
};

// Integer requirement entries uniform on [req_lo, req_hi]; capacities uniform
// on [cap_lo, cap_hi], scaled by capacity_scale, then raised so every device
// type admits at least one single-edge dispatch.
inline ResourceModel build_random_resources(const BipartiteGraph& g,
                                            int num_resource_types, int req_lo,
                                            int req_hi, int cap_lo, int cap_hi,
                                            double capacity_scale,
                                            std::uint64_t seed) {
  if (num_resource_types < 1)
    throw std::invalid_argument("build_random_resources: need >= 1 device type");
  if (req_lo < 1 || req_hi < req_lo)
    throw std::invalid_argument("build_random_resources: bad requirement bounds");
  if (cap_lo < 0 || cap_hi < cap_lo)
    throw std::invalid_argument("build_random_resources: bad capacity bounds");
  if (capacity_scale <= 0.0)
    throw std::invalid_argument("build_random_resources: capacity_scale must be > 0");

  Rng rng(derive_seed(seed, 0x7265));
  const int num_edges = g.num_edges();
  ResourceModel rm;
  rm.num_resource_types = num_resource_types;
  rm.requirements.assign(num_resource_types, std::vector<int>(num_edges, 0));
  rm.capacities.assign(num_resource_types, 0);
  for (int k = 0; k < num_resource_types; ++k)
    for (int e = 0; e < num_edges; ++e)
      rm.requirements[k][e] = static_cast<int>(rng.uniform_int(req_lo, req_hi));
  for (int k = 0; k < num_resource_types; ++k) {
    int c = static_cast<int>(rng.uniform_int(cap_lo, cap_hi));
    c = static_cast<int>(std::ceil(c * capacity_scale));
    int max_req = 0;
    for (int e = 0; e < num_edges; ++e)
      max_req = std::max(max_req, rm.requirements[k][e]);
    rm.capacities[k] = std::max(c, max_req);
  }
  rm.validate(num_edges);
  return rm;
}

// True iff A*x <= c componentwise.
inline bool is_feasible(const DecisionVector& x, const ResourceModel& rm) {
  if (static_cast<int>(x.size()) != rm.num_edges())
    throw std::invalid_argument("is_feasible: decision length != edge count");
  for (int k = 0; k < rm.num_resource_types; ++k) {
    long long used = 0;
    for (int e = 0; e < rm.num_edges(); ++e)
      if (x.bits[e]) used += rm.requirements[k][e];
    if (used > rm.capacities[k]) return false;
  }
  return true;
}

}  // namespace esdp
