#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "esdp/bipartite.hpp"
#include "esdp/workload.hpp"

namespace esdp {

// One sampled world: topology, device requirements/capacities, arrival
// probabilities, and the valuation model including its ground-truth means.
struct Instance {
  std::uint64_t seed = 0;
  BipartiteGraph graph;
  ResourceModel resources;
  ArrivalModel arrivals;
  ValuationModel valuations;

  void validate() const {
    graph.validate();
    resources.validate(graph.num_edges());
    arrivals.validate();
    valuations.validate();
    if (static_cast<int>(arrivals.arrival_probs.size()) != graph.num_ports)
      throw std::invalid_argument("instance: arrival probs != port count");
    if (static_cast<int>(valuations.num_edges()) != graph.num_edges())
      throw std::invalid_argument("instance: valuation length != edge count");
  }
};

// Shortest round-trip decimal form; instance and trace files must re-parse
// to the exact same bits.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc())
    throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& tok) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw std::runtime_error("bad double token: " + tok);
  return v;
}

namespace detail {

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string next() {
    std::string tok;
    if (!(in_ >> tok)) throw std::runtime_error("instance file truncated");
    return tok;
  }
  void expect(const std::string& key) {
    const std::string tok = next();
    if (tok != key)
      throw std::runtime_error("instance file: expected '" + key + "', got '" +
                               tok + "'");
  }
  long long next_int() {
    const std::string tok = next();
    long long v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw std::runtime_error("bad integer token: " + tok);
    return v;
  }
  std::uint64_t next_u64() {
    const std::string tok = next();
    std::uint64_t v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw std::runtime_error("bad unsigned token: " + tok);
    return v;
  }
  double next_double() { return parse_double(next()); }

 private:
  std::istream& in_;
};

inline void write_doubles(std::ostream& os, const char* key,
                          const std::vector<double>& vs) {
  os << key;
  for (double v : vs) os << ' ' << format_double(v);
  os << '\n';
}

inline void read_doubles(TokenReader& r, const char* key, std::size_t n,
                         std::vector<double>& out) {
  r.expect(key);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = r.next_double();
}

}  // namespace detail

inline void save_instance(const Instance& inst, std::ostream& os) {
  inst.validate();
  os << "esdp-instance 1\n";
  os << "seed " << inst.seed << '\n';
  os << "ports " << inst.graph.num_ports << '\n';
  os << "servers " << inst.graph.num_servers << '\n';
  os << "edges " << inst.graph.num_edges() << '\n';
  for (const auto& [l, r] : inst.graph.edges) os << l << ' ' << r << '\n';
  os << "resource_types " << inst.resources.num_resource_types << '\n';
  os << "requirements\n";
  for (const auto& rowv : inst.resources.requirements) {
    for (std::size_t e = 0; e < rowv.size(); ++e)
      os << (e ? " " : "") << rowv[e];
    os << '\n';
  }
  os << "capacities";
  for (int c : inst.resources.capacities) os << ' ' << c;
  os << '\n';
  detail::write_doubles(os, "arrival_probs", inst.arrivals.arrival_probs);
  detail::write_doubles(os, "raw_means", inst.valuations.raw_means);
  detail::write_doubles(os, "raw_stds", inst.valuations.raw_stds);
  detail::write_doubles(os, "edge_costs", inst.valuations.edge_costs);
  detail::write_doubles(os, "true_net_means", inst.valuations.true_net_means);
}

inline Instance load_instance(std::istream& is) {
  detail::TokenReader r(is);
  r.expect("esdp-instance");
  if (r.next_int() != 1) throw std::runtime_error("unsupported instance version");
  Instance inst;
  r.expect("seed");
  inst.seed = r.next_u64();
  r.expect("ports");
  inst.graph.num_ports = static_cast<int>(r.next_int());
  r.expect("servers");
  inst.graph.num_servers = static_cast<int>(r.next_int());
  r.expect("edges");
  const int num_edges = static_cast<int>(r.next_int());
  inst.graph.edges.resize(num_edges);
  for (auto& [l, rr] : inst.graph.edges) {
    l = static_cast<int>(r.next_int());
    rr = static_cast<int>(r.next_int());
  }
  inst.graph.rebuild_incidence();
  r.expect("resource_types");
  const int num_res = static_cast<int>(r.next_int());
  inst.resources.num_resource_types = num_res;
  r.expect("requirements");
  inst.resources.requirements.assign(num_res, std::vector<int>(num_edges));
  for (auto& rowv : inst.resources.requirements)
    for (auto& a : rowv) a = static_cast<int>(r.next_int());
  r.expect("capacities");
  inst.resources.capacities.resize(num_res);
  for (auto& c : inst.resources.capacities) c = static_cast<int>(r.next_int());
  const auto num_ports = static_cast<std::size_t>(inst.graph.num_ports);
  detail::read_doubles(r, "arrival_probs", num_ports, inst.arrivals.arrival_probs);
  detail::read_doubles(r, "raw_means", num_edges, inst.valuations.raw_means);
  detail::read_doubles(r, "raw_stds", num_edges, inst.valuations.raw_stds);
  detail::read_doubles(r, "edge_costs", num_edges, inst.valuations.edge_costs);
  detail::read_doubles(r, "true_net_means", num_edges,
                       inst.valuations.true_net_means);
  inst.validate();
  return inst;
}

inline std::string instance_to_string(const Instance& inst) {
  std::ostringstream os;
  save_instance(inst, os);
  return os.str();
}

inline Instance instance_from_string(const std::string& text) {
  std::istringstream is(text);
  return load_instance(is);
}

}  // namespace esdp
