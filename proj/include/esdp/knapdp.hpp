#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "esdp/bipartite.hpp"
#include "esdp/rng.hpp"

namespace esdp {

// One per-slot input to the budgeted DP: integer requirement matrix and
// capacities, integer scaled means (budget weights) and scaled variances
// (objective weights), and the top of the budget range.
struct BudgetedInstance {
  std::vector<std::vector<int>> requirements;  // [k][e]
  std::vector<int> capacities;                 // [k]
  std::vector<std::int64_t> scaled_means;      // budget weight per edge
  std::vector<std::int64_t> scaled_vars;       // objective weight per edge
  std::int64_t s_max = 0;

  int num_edges() const { return static_cast<int>(scaled_means.size()); }
  int num_resources() const { return static_cast<int>(capacities.size()); }

  void validate() const {
    if (s_max < 0) throw std::invalid_argument("budgeted instance: s_max < 0");
    if (capacities.empty())
      throw std::invalid_argument("budgeted instance: no resource types");
    if (requirements.size() != capacities.size())
      throw std::invalid_argument("budgeted instance: requirement rows != K");
    for (const auto& row : requirements)
      if (static_cast<int>(row.size()) != num_edges())
        throw std::invalid_argument("budgeted instance: row length != |E|");
    if (scaled_vars.size() != scaled_means.size())
      throw std::invalid_argument("budgeted instance: weight length mismatch");
    for (auto v : scaled_means)
      if (v < 0) throw std::invalid_argument("budgeted instance: negative mean");
    for (auto v : scaled_vars)
      if (v < 0) throw std::invalid_argument("budgeted instance: negative var");
    for (int c : capacities) {
      if (c < 0) throw std::invalid_argument("budgeted instance: negative capacity");
      if (c > 30000)
        throw std::invalid_argument("budgeted instance: capacity exceeds solver range");
    }
    for (const auto& row : requirements)
      for (int a : row)
        if (a > 30000)
          throw std::invalid_argument(
              "budgeted instance: requirement exceeds solver range");
  }
};

// Marker for states with no feasible completion. Kept far from the int64
// boundary so adding an objective weight can never wrap.
inline constexpr std::int64_t kDpInfeasible =
    std::numeric_limits<std::int64_t>::min() / 4;

// Value / take-bit / resource-usage tables over (budget s, residual-capacity
// point, edge cursor). The usage slice mirrors the reconstructed solution of
// each state so capacity can be re-checked without unrolling the backtrack.
struct DPTable {
  std::int64_t s_count = 0;
  int grid_size = 0;
  int num_edges = 0;
  int num_resources = 0;
  std::vector<std::int64_t> values;
  std::vector<std::uint8_t> take;
  std::vector<std::int16_t> usage;

  std::size_t state_index(std::int64_t s, int cidx, int i) const {
    return (static_cast<std::size_t>(s) * grid_size + cidx) *
               (num_edges + 1) +
           i;
  }
  std::int64_t value_at(std::int64_t s, int cidx, int i) const {
    return values[state_index(s, cidx, i)];
  }
  bool take_at(std::int64_t s, int cidx, int i) const {
    return take[state_index(s, cidx, i)] != 0;
  }
};

struct FamilyEntry {
  bool feasible = false;
  std::int64_t objective = 0;
  DecisionVector x;
};

// Solutions indexed by budget s in {0..s_max}.
struct FamilyResult {
  std::vector<FamilyEntry> by_budget;

  const FamilyEntry& at(std::int64_t s) const { return by_budget.at(s); }
  std::int64_t s_max() const {
    return static_cast<std::int64_t>(by_budget.size()) - 1;
  }
};

namespace detail {

// Mixed-radix layout of the residual-capacity grid.
struct CapacityGrid {
  int grid_size = 1;
  std::vector<int> strides;  // per resource type
  std::vector<int> radix;    // capacity + 1 per resource type

  explicit CapacityGrid(const std::vector<int>& capacities) {
    strides.resize(capacities.size());
    radix.resize(capacities.size());
    long long size = 1;
    for (std::size_t k = 0; k < capacities.size(); ++k) {
      strides[k] = static_cast<int>(size);
      radix[k] = capacities[k] + 1;
      size *= radix[k];
      if (size > (1LL << 30))
        throw std::invalid_argument("capacity grid too large");
    }
    grid_size = static_cast<int>(size);
  }

  int coord(int cidx, int k) const { return (cidx / strides[k]) % radix[k]; }
};

}  // namespace detail

// Number of DP states the solver allocates for an instance.
inline std::size_t dp_table_states(const BudgetedInstance& inst) {
  detail::CapacityGrid grid(inst.capacities);
  return static_cast<std::size_t>(inst.s_max + 1) * grid.grid_size *
         (inst.num_edges() + 1);
}

// Solves the whole budget family in one table: for every s in {0..s_max},
// maximize scaled_vars^T x subject to A x <= c and scaled_means^T x >= s.
// The recursion walks edges back to front; the take branch clips both the
// residual budget and the residual capacity at zero, and a take whose
// reconstructed solution overruns the true residual capacity is reverted to
// the skip branch. Ties prefer skip, so the reported vector is the
// lexicographically smallest optimal solution.
inline FamilyResult solve_family(const BudgetedInstance& inst,
                                 DPTable* table_out = nullptr) {
  inst.validate();
  const int num_edges = inst.num_edges();
  const int num_res = inst.num_resources();
  const detail::CapacityGrid grid(inst.capacities);
  const int grid_size = grid.grid_size;
  const std::int64_t s_count = inst.s_max + 1;

  const std::size_t num_states =
      static_cast<std::size_t>(s_count) * grid_size * (num_edges + 1);
  if (num_states > std::size_t(500'000'000))
    throw std::invalid_argument("solve_family: DP table would exceed 5e8 states");

  DPTable local;
  DPTable& table = table_out ? *table_out : local;
  table.s_count = s_count;
  table.grid_size = grid_size;
  table.num_edges = num_edges;
  table.num_resources = num_res;
  // Every state is written below, so the buffers are resized, not cleared;
  // a caller-held table doubles as a reusable workspace across slots.
  table.values.resize(num_states);
  table.take.resize(num_states);
  table.usage.resize(num_states * num_res);

  // Per-edge requirement columns and, per (edge, residual point), the grid
  // index after the clipped subtraction max(c' - A_col, 0).
  std::vector<std::int16_t> columns(static_cast<std::size_t>(num_edges) * num_res);
  for (int e = 0; e < num_edges; ++e)
    for (int k = 0; k < num_res; ++k)
      columns[static_cast<std::size_t>(e) * num_res + k] =
          static_cast<std::int16_t>(inst.requirements[k][e]);
  std::vector<int> cut_index(static_cast<std::size_t>(num_edges) * grid_size);
  std::vector<std::int16_t> coords(static_cast<std::size_t>(grid_size) * num_res);
  for (int cidx = 0; cidx < grid_size; ++cidx)
    for (int k = 0; k < num_res; ++k)
      coords[static_cast<std::size_t>(cidx) * num_res + k] =
          static_cast<std::int16_t>(grid.coord(cidx, k));
  for (int e = 0; e < num_edges; ++e) {
    for (int cidx = 0; cidx < grid_size; ++cidx) {
      int target = 0;
      for (int k = 0; k < num_res; ++k) {
        const int left = std::max(
            grid.coord(cidx, k) - inst.requirements[k][e], 0);
        target += left * grid.strides[k];
      }
      cut_index[static_cast<std::size_t>(e) * grid_size + cidx] = target;
    }
  }

  std::int64_t* values = table.values.data();
  std::uint8_t* take = table.take.data();
  std::int16_t* usage = table.usage.data();
  const int row = num_edges + 1;

  for (std::int64_t s = 0; s < s_count; ++s) {
    for (int cidx = 0; cidx < grid_size; ++cidx) {
      const std::size_t base =
          (static_cast<std::size_t>(s) * grid_size + cidx) * row;
      values[base + num_edges] = (s == 0) ? 0 : kDpInfeasible;
      take[base + num_edges] = 0;
      std::memset(usage + (base + num_edges) * num_res, 0,
                  sizeof(std::int16_t) * num_res);
      for (int i = num_edges - 1; i >= 0; --i) {
        const std::size_t state = base + i;
        const std::size_t skip_state = base + i + 1;
        const std::int64_t skip_value = values[skip_state];
        if (cidx == 0) {  // residual capacity exhausted in every dimension
          values[state] = skip_value;
          take[state] = 0;
          std::memcpy(usage + state * num_res, usage + skip_state * num_res,
                      sizeof(std::int16_t) * num_res);
          continue;
        }
        std::int64_t sub_s = s - inst.scaled_means[i];
        if (sub_s < 0) sub_s = 0;
        const int sub_cidx =
            cut_index[static_cast<std::size_t>(i) * grid_size + cidx];
        const std::size_t sub_state =
            (static_cast<std::size_t>(sub_s) * grid_size + sub_cidx) * row + i +
            1;
        const std::int64_t sub_value = values[sub_state];
        const std::int64_t take_value =
            sub_value == kDpInfeasible ? kDpInfeasible
                                       : sub_value + inst.scaled_vars[i];
        if (take_value > skip_value) {
          // Candidate take; verify the rebuilt solution against the true
          // residual capacity and revert if the clipping hid a deficit.
          const std::int16_t* col = columns.data() +
                                    static_cast<std::size_t>(i) * num_res;
          const std::int16_t* sub_usage = usage + sub_state * num_res;
          const std::int16_t* cap = coords.data() +
                                    static_cast<std::size_t>(cidx) * num_res;
          bool fits = true;
          for (int k = 0; k < num_res; ++k) {
            if (sub_usage[k] + col[k] > cap[k]) {
              fits = false;
              break;
            }
          }
          if (fits) {
            values[state] = take_value;
            take[state] = 1;
            std::int16_t* out = usage + state * num_res;
            for (int k = 0; k < num_res; ++k)
              out[k] = static_cast<std::int16_t>(sub_usage[k] + col[k]);
            continue;
          }
        }
        values[state] = skip_value;
        take[state] = 0;
        std::memcpy(usage + state * num_res, usage + skip_state * num_res,
                    sizeof(std::int16_t) * num_res);
      }
    }
  }

  FamilyResult result;
  result.by_budget.resize(s_count);
  const int full = grid_size - 1;
  for (std::int64_t s = 0; s < s_count; ++s) {
    FamilyEntry& entry = result.by_budget[s];
    entry.x = DecisionVector(num_edges);
    const std::int64_t v = values[table.state_index(s, full, 0)];
    if (v == kDpInfeasible) {
      entry.feasible = false;
      entry.objective = 0;
      continue;
    }
    entry.feasible = true;
    entry.objective = v;
    std::int64_t cur_s = s;
    int cur_c = full;
    for (int i = 0; i < num_edges; ++i) {
      if (take[table.state_index(cur_s, cur_c, i)]) {
        entry.x.bits[i] = 1;
        cur_c = cut_index[static_cast<std::size_t>(i) * grid_size + cur_c];
        cur_s -= inst.scaled_means[i];
        if (cur_s < 0) cur_s = 0;
      }
    }
  }
  return result;
}

// Exhaustive reference solver; same tie rule (lexicographically smallest
// optimal vector). Only meant for small edge counts.
inline FamilyResult brute_force_family(const BudgetedInstance& inst) {
  inst.validate();
  const int num_edges = inst.num_edges();
  if (num_edges > 20)
    throw std::invalid_argument("brute_force_family: refusing |E| > 20");
  const int num_res = inst.num_resources();
  FamilyResult result;
  result.by_budget.resize(inst.s_max + 1);
  for (auto& e : result.by_budget) e.x = DecisionVector(num_edges);

  const std::uint32_t num_masks = 1u << num_edges;
  for (std::uint32_t mask = 0; mask < num_masks; ++mask) {
    bool feasible = true;
    for (int k = 0; k < num_res && feasible; ++k) {
      long long used = 0;
      for (int e = 0; e < num_edges; ++e)
        if (mask & (1u << e)) used += inst.requirements[k][e];
      feasible = used <= inst.capacities[k];
    }
    if (!feasible) continue;
    std::int64_t budget = 0, objective = 0;
    DecisionVector x(num_edges);
    for (int e = 0; e < num_edges; ++e) {
      if (mask & (1u << e)) {
        x.bits[e] = 1;
        budget += inst.scaled_means[e];
        objective += inst.scaled_vars[e];
      }
    }
    const std::int64_t top = std::min(budget, inst.s_max);
    for (std::int64_t s = 0; s <= top; ++s) {
      FamilyEntry& entry = result.by_budget[s];
      if (!entry.feasible || objective > entry.objective ||
          (objective == entry.objective &&
           std::lexicographical_compare(x.bits.begin(), x.bits.end(),
                                        entry.x.bits.begin(),
                                        entry.x.bits.end()))) {
        entry.feasible = true;
        entry.objective = objective;
        entry.x = x;
      }
    }
  }
  return result;
}

// Independent re-check of a solved family: every feasible entry must satisfy
// the capacity rows and meet its budget.
inline bool verify_family(const BudgetedInstance& inst,
                          const FamilyResult& family, std::string* why = nullptr) {
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(family.by_budget.size());
       ++s) {
    const FamilyEntry& entry = family.by_budget[s];
    if (!entry.feasible) continue;
    for (int k = 0; k < inst.num_resources(); ++k) {
      long long used = 0;
      for (int e = 0; e < inst.num_edges(); ++e)
        if (entry.x.bits[e]) used += inst.requirements[k][e];
      if (used > inst.capacities[k]) {
        if (why) *why = "capacity row " + std::to_string(k) +
                        " violated at s=" + std::to_string(s);
        return false;
      }
    }
    std::int64_t budget = 0, objective = 0;
    for (int e = 0; e < inst.num_edges(); ++e) {
      if (entry.x.bits[e]) {
        budget += inst.scaled_means[e];
        objective += inst.scaled_vars[e];
      }
    }
    if (budget < s) {
      if (why) *why = "budget not met at s=" + std::to_string(s);
      return false;
    }
    if (objective != entry.objective) {
      if (why) *why = "objective mismatch at s=" + std::to_string(s);
      return false;
    }
  }
  return true;
}

// Writes the DP frontier (value at full capacity, cursor 0) per budget.
inline void dump_family(const FamilyResult& family, std::ostream& os) {
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(family.by_budget.size());
       ++s) {
    const FamilyEntry& e = family.by_budget[s];
    os << "s=" << s;
    if (!e.feasible) {
      os << " infeasible\n";
      continue;
    }
    os << " objective=" << e.objective << " x=";
    for (auto b : e.x.bits) os << int(b);
    os << "\n";
  }
}

// Exact maximizer of weights^T x subject to A x <= c and x_e = 0 wherever
// the mask is 0. Real-valued weights; ties prefer the sparser branch, so
// zero-weight edges are never picked up.
inline std::pair<DecisionVector, double> max_weight_feasible(
    const std::vector<double>& weights, const ResourceModel& rm,
    const std::vector<std::uint8_t>& allowed) {
  const int num_edges = rm.num_edges();
  if (static_cast<int>(weights.size()) != num_edges ||
      static_cast<int>(allowed.size()) != num_edges)
    throw std::invalid_argument("max_weight_feasible: dimension mismatch");
  const detail::CapacityGrid grid(rm.capacities);
  const int grid_size = grid.grid_size;
  const int num_res = rm.num_resource_types;
  const int row = num_edges + 1;

  std::vector<double> values(static_cast<std::size_t>(grid_size) * row, 0.0);
  std::vector<std::uint8_t> take(values.size(), 0);
  for (int cidx = 0; cidx < grid_size; ++cidx) {
    for (int i = num_edges - 1; i >= 0; --i) {
      const std::size_t state = static_cast<std::size_t>(cidx) * row + i;
      const double skip_value = values[state + 1];
      double best = skip_value;
      bool took = false;
      if (allowed[i]) {
        bool fits = true;
        int target = 0;
        for (int k = 0; k < num_res; ++k) {
          const int left = grid.coord(cidx, k) - rm.requirements[k][i];
          if (left < 0) {
            fits = false;
            break;
          }
          target += left * grid.strides[k];
        }
        if (fits) {
          const double take_value =
              values[static_cast<std::size_t>(target) * row + i + 1] + weights[i];
          if (take_value > best) {
            best = take_value;
            took = true;
            take[state] = 1;
          }
        }
      }
      values[state] = best;
      if (!took) take[state] = 0;
    }
  }

  DecisionVector x(num_edges);
  int cidx = grid_size - 1;
  for (int i = 0; i < num_edges; ++i) {
    if (!take[static_cast<std::size_t>(cidx) * row + i]) continue;
    x.bits[i] = 1;
    int target = 0;
    for (int k = 0; k < num_res; ++k)
      target += (grid.coord(cidx, k) - rm.requirements[k][i]) * grid.strides[k];
    cidx = target;
  }
  return {x, values[static_cast<std::size_t>(grid_size - 1) * row]};
}

// Small random instances for DP-vs-enumeration equivalence checks. Every
// edge consumes at least one unit of some device type, mirroring the
// resource-model invariant.
inline BudgetedInstance random_budgeted_instance(Rng& rng, int max_edges = 10,
                                                 int max_resources = 2,
                                                 int max_capacity = 3,
                                                 int max_mean = 8,
                                                 int max_var = 50) {
  BudgetedInstance inst;
  const int num_edges = static_cast<int>(rng.uniform_int(0, max_edges));
  const int num_res = static_cast<int>(rng.uniform_int(1, max_resources));
  inst.requirements.assign(num_res, std::vector<int>(num_edges, 0));
  inst.capacities.resize(num_res);
  for (int k = 0; k < num_res; ++k)
    inst.capacities[k] = static_cast<int>(rng.uniform_int(0, max_capacity));
  for (int e = 0; e < num_edges; ++e) {
    for (int k = 0; k < num_res; ++k)
      inst.requirements[k][e] = static_cast<int>(rng.uniform_int(0, 2));
    const int forced = static_cast<int>(rng.uniform_int(0, num_res - 1));
    inst.requirements[forced][e] =
        std::max(1, inst.requirements[forced][e]);
  }
  inst.scaled_means.resize(num_edges);
  inst.scaled_vars.resize(num_edges);
  std::int64_t total_mean = 0;
  for (int e = 0; e < num_edges; ++e) {
    inst.scaled_means[e] = rng.uniform_int(0, max_mean);
    inst.scaled_vars[e] = rng.uniform_int(0, max_var);
    total_mean += inst.scaled_means[e];
  }
  inst.s_max = rng.uniform_int(0, total_mean + 3);
  return inst;
}

// Largest number of edges any capacity-feasible dispatch can select.
inline int max_feasible_cardinality(const ResourceModel& rm) {
  std::vector<double> ones(rm.num_edges(), 1.0);
  std::vector<std::uint8_t> allowed(rm.num_edges(), 1);
  auto [x, value] = max_weight_feasible(ones, rm, allowed);
  (void)x;
  return static_cast<int>(value + 0.5);
}

}  // namespace esdp
