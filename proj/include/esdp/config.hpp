#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "esdp/simulator.hpp"

namespace esdp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& value) {
  T v{};
  const std::string t = trim(value);
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ConfigError("not a valid number: '" + value + "'");
  return v;
}

inline double parse_real(const std::string& value) {
  return parse_number<double>(value);
}

inline bool parse_bool(const std::string& value) {
  const std::string t = trim(value);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError("not a boolean: '" + value + "'");
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(value);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

}  // namespace detail

struct ConfigKey {
  std::string name;
  std::function<std::string(const SimConfig&)> get;
  std::function<void(SimConfig&, const std::string&)> set;
};

// The typed schema: every recognized key with its printer and parser.
// Serialization order is the declaration order below.
inline const std::vector<ConfigKey>& config_schema() {
  using detail::parse_bool;
  using detail::parse_number;
  using detail::parse_real;
  static const std::vector<ConfigKey> schema = {
      {"horizon", [](const SimConfig& c) { return std::to_string(c.horizon); },
       [](SimConfig& c, const std::string& v) {
         c.horizon = parse_number<std::int64_t>(v);
       }},
      {"seed", [](const SimConfig& c) { return std::to_string(c.seed); },
       [](SimConfig& c, const std::string& v) {
         c.seed = parse_number<std::uint64_t>(v);
       }},
      {"replications",
       [](const SimConfig& c) { return std::to_string(c.replications); },
       [](SimConfig& c, const std::string& v) {
         c.replications = parse_number<int>(v);
       }},
      {"policies",
       [](const SimConfig& c) { return detail::join_list(c.policies); },
       [](SimConfig& c, const std::string& v) {
         c.policies = detail::split_list(v);
       }},
      {"num_ports", [](const SimConfig& c) { return std::to_string(c.num_ports); },
       [](SimConfig& c, const std::string& v) {
         c.num_ports = parse_number<int>(v);
       }},
      {"num_servers",
       [](const SimConfig& c) { return std::to_string(c.num_servers); },
       [](SimConfig& c, const std::string& v) {
         c.num_servers = parse_number<int>(v);
       }},
      {"edge_prob", [](const SimConfig& c) { return format_double(c.edge_prob); },
       [](SimConfig& c, const std::string& v) { c.edge_prob = parse_real(v); }},
      {"num_resource_types",
       [](const SimConfig& c) { return std::to_string(c.num_resource_types); },
       [](SimConfig& c, const std::string& v) {
         c.num_resource_types = parse_number<int>(v);
       }},
      {"req_lo", [](const SimConfig& c) { return std::to_string(c.req_lo); },
       [](SimConfig& c, const std::string& v) { c.req_lo = parse_number<int>(v); }},
      {"req_hi", [](const SimConfig& c) { return std::to_string(c.req_hi); },
       [](SimConfig& c, const std::string& v) { c.req_hi = parse_number<int>(v); }},
      {"cap_lo", [](const SimConfig& c) { return std::to_string(c.cap_lo); },
       [](SimConfig& c, const std::string& v) { c.cap_lo = parse_number<int>(v); }},
      {"cap_hi", [](const SimConfig& c) { return std::to_string(c.cap_hi); },
       [](SimConfig& c, const std::string& v) { c.cap_hi = parse_number<int>(v); }},
      {"capacity_scale",
       [](const SimConfig& c) { return format_double(c.capacity_scale); },
       [](SimConfig& c, const std::string& v) {
         c.capacity_scale = parse_real(v);
       }},
      {"arrival_prob",
       [](const SimConfig& c) { return format_double(c.arrival_prob); },
       [](SimConfig& c, const std::string& v) { c.arrival_prob = parse_real(v); }},
      {"mu_lo", [](const SimConfig& c) { return format_double(c.mu_lo); },
       [](SimConfig& c, const std::string& v) { c.mu_lo = parse_real(v); }},
      {"mu_hi", [](const SimConfig& c) { return format_double(c.mu_hi); },
       [](SimConfig& c, const std::string& v) { c.mu_hi = parse_real(v); }},
      {"cost_mean", [](const SimConfig& c) { return format_double(c.cost_mean); },
       [](SimConfig& c, const std::string& v) { c.cost_mean = parse_real(v); }},
      {"cost_std", [](const SimConfig& c) { return format_double(c.cost_std); },
       [](SimConfig& c, const std::string& v) { c.cost_std = parse_real(v); }},
      {"cost_aggregation",
       [](const SimConfig& c) { return cost_aggregation_name(c.cost_aggregation); },
       [](SimConfig& c, const std::string& v) {
         c.cost_aggregation = parse_cost_aggregation(detail::trim(v));
       }},
      {"mc_samples",
       [](const SimConfig& c) { return std::to_string(c.mc_samples); },
       [](SimConfig& c, const std::string& v) {
         c.mc_samples = parse_number<std::int64_t>(v);
       }},
      {"delta_variant",
       [](const SimConfig& c) { return delta_variant_name(c.delta_variant); },
       [](SimConfig& c, const std::string& v) {
         c.delta_variant = parse_delta_variant(detail::trim(v));
       }},
      {"g_variant",
       [](const SimConfig& c) { return g_variant_name(c.g_variant); },
       [](SimConfig& c, const std::string& v) {
         c.g_variant = parse_g_variant(detail::trim(v));
       }},
      {"alpha", [](const SimConfig& c) { return format_double(c.alpha); },
       [](SimConfig& c, const std::string& v) { c.alpha = parse_real(v); }},
      {"m_bound_mode",
       [](const SimConfig& c) { return m_bound_mode_name(c.m_bound_mode); },
       [](SimConfig& c, const std::string& v) {
         c.m_bound_mode = parse_m_bound_mode(detail::trim(v));
       }},
      {"ucb_multiplier",
       [](const SimConfig& c) { return format_double(c.ucb_multiplier); },
       [](SimConfig& c, const std::string& v) {
         c.ucb_multiplier = parse_real(v);
       }},
      {"trace_timing",
       [](const SimConfig& c) { return c.trace_timing ? "true" : "false"; },
       [](SimConfig& c, const std::string& v) { c.trace_timing = parse_bool(v); }},
      {"trace_stats",
       [](const SimConfig& c) { return c.trace_stats ? "true" : "false"; },
       [](SimConfig& c, const std::string& v) { c.trace_stats = parse_bool(v); }},
      {"instance_file", [](const SimConfig& c) { return c.instance_file; },
       [](SimConfig& c, const std::string& v) { c.instance_file = detail::trim(v); }},
  };
  return schema;
}

inline void set_config_key(SimConfig& cfg, const std::string& key,
                           const std::string& value) {
  for (const auto& spec : config_schema()) {
    if (spec.name != key) continue;
    try {
      spec.set(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError("key '" + key + "': " + e.what());
    }
    return;
  }
  throw ConfigError("unknown config key: '" + key + "'");
}

// key = value lines; '#' starts a comment. Unknown keys are rejected by name.
inline SimConfig parse_config(std::istream& is,
                              const SimConfig& base = SimConfig{}) {
  SimConfig cfg = base;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    set_config_key(cfg, key, value);
  }
  return cfg;
}

inline SimConfig load_config(const std::string& path,
                             const SimConfig& base = SimConfig{}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return parse_config(in, base);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// `key=value` items, e.g. from repeated --set flags.
inline void apply_overrides(SimConfig& cfg,
                            const std::vector<std::string>& overrides) {
  for (const auto& item : overrides) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override must look like key=value: '" + item + "'");
    set_config_key(cfg, detail::trim(item.substr(0, eq)),
                   detail::trim(item.substr(eq + 1)));
  }
}

// Canonical echo: every key, schema order. Re-parsing reproduces the config
// exactly, which is what makes emitted runs re-executable.
inline std::string serialize_config(const SimConfig& cfg) {
  std::string out;
  for (const auto& spec : config_schema())
    out += spec.name + " = " + spec.get(cfg) + "\n";
  return out;
}

}  // namespace esdp
