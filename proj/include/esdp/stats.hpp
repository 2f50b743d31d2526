#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "esdp/bipartite.hpp"

namespace esdp {

// Shrinking tolerance sequences. The default is 1/(ln(ln(t+1)+1)+1); the
// alternatives trade scaling resolution against DP size.
enum class DeltaVariant { kDefault, kInvLog, kInvLogLog, kInvLogLogLog };

// Exploration-weight sequences; the default couples ln(t+1) with the
// cardinality bound, "ln-only" drops the bound term entirely.
enum class GVariant { kDefault, kLnLnOnly, kLnOnly };

inline std::string delta_variant_name(DeltaVariant v) {
  switch (v) {
    case DeltaVariant::kDefault: return "default";
    case DeltaVariant::kInvLog: return "inv-log";
    case DeltaVariant::kInvLogLog: return "inv-loglog";
    case DeltaVariant::kInvLogLogLog: return "inv-logloglog";
  }
  return "?";
}

inline DeltaVariant parse_delta_variant(const std::string& name) {
  if (name == "default") return DeltaVariant::kDefault;
  if (name == "inv-log") return DeltaVariant::kInvLog;
  if (name == "inv-loglog") return DeltaVariant::kInvLogLog;
  if (name == "inv-logloglog") return DeltaVariant::kInvLogLogLog;
  throw std::invalid_argument("unknown delta variant: " + name);
}

inline std::string g_variant_name(GVariant v) {
  switch (v) {
    case GVariant::kDefault: return "default";
    case GVariant::kLnLnOnly: return "lnln-only";
    case GVariant::kLnOnly: return "ln-only";
  }
  return "?";
}

inline GVariant parse_g_variant(const std::string& name) {
  if (name == "default") return GVariant::kDefault;
  if (name == "lnln-only") return GVariant::kLnLnOnly;
  if (name == "ln-only") return GVariant::kLnOnly;
  throw std::invalid_argument("unknown g variant: " + name);
}

struct Schedules {
  DeltaVariant delta_variant = DeltaVariant::kDefault;
  GVariant g_variant = GVariant::kDefault;
  int cardinality_bound = 1;  // bound on max ||x||_1 over feasible dispatches
  double alpha = 0.5;
  double ucb_multiplier = 1.0;

  void validate() const {
    if (cardinality_bound < 1)
      throw std::invalid_argument("cardinality_bound must be >= 1");
    if (alpha < 0.0 || alpha > 1.0)
      throw std::invalid_argument("alpha outside [0,1]");
    if (ucb_multiplier <= 0.0)
      throw std::invalid_argument("ucb_multiplier must be > 0");
  }
};

inline double eval_delta(const Schedules& s, double t) {
  if (t < 0.0) throw std::invalid_argument("eval_delta: t must be >= 0");
  const double lt = std::log(t + 1.0);
  switch (s.delta_variant) {
    case DeltaVariant::kDefault:
      return 1.0 / (std::log(lt + 1.0) + 1.0);
    case DeltaVariant::kInvLog:
      return 1.0 / (lt + 1.0);
    case DeltaVariant::kInvLogLog:
      return 1.0 / std::log(lt + 1.0);  // +inf at t == 0; schedules start at t = 1
    case DeltaVariant::kInvLogLogLog:
      return 1.0 / (std::log(std::log(lt + 1.0) + 1.0) + 1.0);
  }
  throw std::invalid_argument("eval_delta: unknown variant");
}

inline double eval_g(const Schedules& s, double t) {
  if (t < 0.0) throw std::invalid_argument("eval_g: t must be >= 0");
  const double lt = std::log(t + 1.0);
  const double m = static_cast<double>(s.cardinality_bound);
  switch (s.g_variant) {
    case GVariant::kDefault:
      return lt + 4.0 * std::log(lt + 1.0) * m;
    case GVariant::kLnLnOnly:
      return 4.0 * std::log(lt + 1.0) * m;
    case GVariant::kLnOnly:
      return lt;
  }
  throw std::invalid_argument("eval_g: unknown variant");
}

// Running per-channel statistics: selection counts, observed-value sums,
// empirical means, and the g(t)/(2n) variance proxy. A never-selected edge
// carries mean 0 and an infinite variance proxy.
struct EdgeStats {
  std::vector<std::int64_t> counts;
  std::vector<double> value_sums;
  std::vector<double> means;
  std::vector<double> var_proxy;

  explicit EdgeStats(int num_edges)
      : counts(num_edges, 0),
        value_sums(num_edges, 0.0),
        means(num_edges, 0.0),
        var_proxy(num_edges, std::numeric_limits<double>::infinity()) {}

  int num_edges() const { return static_cast<int>(counts.size()); }
};

// Folds one slot of semi-bandit feedback into the statistics: only edges with
// x_e == 1 contribute an observation, but means and variance proxies are
// refreshed for every edge because g(t) moves each slot.
inline void update(EdgeStats& stats, const DecisionVector& x,
                   const std::vector<double>& observed, const Schedules& sched,
                   std::int64_t t) {
  if (x.size() != static_cast<std::size_t>(stats.num_edges()) ||
      observed.size() != static_cast<std::size_t>(stats.num_edges()))
    throw std::invalid_argument("update: dimension mismatch");
  for (int e = 0; e < stats.num_edges(); ++e) {
    if (!x.bits[e]) continue;
    const double z = observed[e];
    if (!(z >= 0.0 && z <= 1.0))
      throw std::invalid_argument("update: observation outside [0,1]");
    stats.counts[e] += 1;
    stats.value_sums[e] += z;
  }
  const double g = eval_g(sched, static_cast<double>(t));
  for (int e = 0; e < stats.num_edges(); ++e) {
    if (stats.counts[e] > 0) {
      stats.means[e] = std::min(
          1.0, std::max(0.0, stats.value_sums[e] /
                                 static_cast<double>(stats.counts[e])));
      stats.var_proxy[e] = g / (2.0 * static_cast<double>(stats.counts[e]));
    } else {
      stats.means[e] = 0.0;
      stats.var_proxy[e] = std::numeric_limits<double>::infinity();
    }
  }
}

// Integer scale-ups of the running statistics, ready for the budgeted DP.
// `unexplored_sentinel` is the finite stand-in for the infinite variance
// proxy of a never-selected edge: it is large enough that any feasible
// solution containing such an edge beats every fully-explored one on the
// scaled-variance objective.
struct ScaledStats {
  std::int64_t scale_factor = 1;               // xi(t)
  std::vector<std::int64_t> scaled_means;      // ceil(xi * mean)
  std::vector<std::int64_t> scaled_vars;       // ceil(xi^2 * var proxy)
  std::int64_t s_max = 0;                      // xi(t) * cardinality bound
  std::int64_t unexplored_sentinel = 0;
};

inline ScaledStats scale(const EdgeStats& stats, const Schedules& sched,
                         std::int64_t t) {
  if (t < 1) throw std::invalid_argument("scale: decision slots start at t = 1");
  const int num_edges = stats.num_edges();
  const double delta = eval_delta(sched, static_cast<double>(t));
  const double g = eval_g(sched, static_cast<double>(t));
  ScaledStats out;
  out.scale_factor = static_cast<std::int64_t>(
      std::ceil(static_cast<double>(sched.cardinality_bound) / delta));
  if (out.scale_factor < 1)
    throw std::logic_error("scale: nonpositive scale factor");
  const double xi = static_cast<double>(out.scale_factor);
  out.s_max = out.scale_factor * sched.cardinality_bound;
  out.unexplored_sentinel = 2 * static_cast<std::int64_t>(num_edges) *
                            static_cast<std::int64_t>(std::ceil(xi * xi * g));
  out.scaled_means.resize(num_edges);
  out.scaled_vars.resize(num_edges);
  for (int e = 0; e < num_edges; ++e) {
    if (stats.counts[e] > 0) {
      out.scaled_means[e] =
          static_cast<std::int64_t>(std::ceil(xi * stats.means[e]));
      const double var = g / (2.0 * static_cast<double>(stats.counts[e]));
      out.scaled_vars[e] =
          static_cast<std::int64_t>(std::ceil(xi * xi * var));
    } else {
      out.scaled_means[e] = 0;
      out.scaled_vars[e] = out.unexplored_sentinel;
    }
  }
  return out;
}

}  // namespace esdp
