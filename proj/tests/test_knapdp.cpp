#include "esdp/knapdp.hpp"

#include <gtest/gtest.h>

#include <limits>

#include "esdp/rng.hpp"

namespace esdp {
namespace {

BudgetedInstance make_instance(std::vector<std::vector<int>> req,
                               std::vector<int> cap,
                               std::vector<std::int64_t> means,
                               std::vector<std::int64_t> vars,
                               std::int64_t s_max) {
  BudgetedInstance inst;
  inst.requirements = std::move(req);
  inst.capacities = std::move(cap);
  inst.scaled_means = std::move(means);
  inst.scaled_vars = std::move(vars);
  inst.s_max = s_max;
  return inst;
}

std::vector<std::uint8_t> bits(std::initializer_list<int> v) {
  std::vector<std::uint8_t> out;
  for (int b : v) out.push_back(static_cast<std::uint8_t>(b));
  return out;
}

TEST(SolveFamily, ZeroBudgetZeroProfit) {
  const auto inst = make_instance({{1, 1}}, {1}, {3, 5}, {0, 0}, 0);
  const FamilyResult family = solve_family(inst);
  ASSERT_TRUE(family.at(0).feasible);
  EXPECT_EQ(family.at(0).objective, 0);
  EXPECT_EQ(family.at(0).x.ones(), 0);
}

TEST(SolveFamily, TwoEdgeWorkedExample) {
  const auto inst = make_instance({{1, 1}}, {1}, {3, 5}, {4, 9}, 8);
  const FamilyResult family = solve_family(inst);
  ASSERT_TRUE(family.at(5).feasible);
  EXPECT_EQ(family.at(5).objective, 9);
  EXPECT_EQ(family.at(5).x.bits, bits({0, 1}));
  // Capacity 1 forbids both edges; no single edge reaches a budget of 8.
  EXPECT_FALSE(family.at(8).feasible);
  EXPECT_FALSE(family.at(6).feasible);
  EXPECT_FALSE(family.at(7).feasible);
  for (std::int64_t s = 0; s <= 5; ++s) {
    ASSERT_TRUE(family.at(s).feasible);
    EXPECT_EQ(family.at(s).objective, 9);
    EXPECT_EQ(family.at(s).x.bits, bits({0, 1}));
  }
}

TEST(SolveFamily, ThreeEdgeWorkedExample) {
  const auto inst = make_instance({{1, 1, 1}}, {2}, {2, 2, 2}, {5, 7, 3}, 6);
  const FamilyResult family = solve_family(inst);
  ASSERT_TRUE(family.at(4).feasible);
  EXPECT_EQ(family.at(4).objective, 12);
  EXPECT_EQ(family.at(4).x.bits, bits({1, 1, 0}));
}

TEST(SolveFamily, MatchesBruteForceOnWorkedExample) {
  const auto inst = make_instance({{1, 1}}, {1}, {3, 5}, {4, 9}, 8);
  const FamilyResult dp = solve_family(inst);
  const FamilyResult bf = brute_force_family(inst);
  for (std::int64_t s = 0; s <= 8; ++s) {
    EXPECT_EQ(dp.at(s).feasible, bf.at(s).feasible) << "s=" << s;
    if (dp.at(s).feasible) {
      EXPECT_EQ(dp.at(s).objective, bf.at(s).objective) << "s=" << s;
      EXPECT_EQ(dp.at(s).x.bits, bf.at(s).x.bits) << "s=" << s;
    }
  }
}

TEST(BruteForceFamily, EqualWeightsPickMaxCardinality) {
  const auto inst = make_instance({{1, 1, 1, 1}}, {3}, {1, 1, 1, 1},
                                  {6, 6, 6, 6}, 4);
  const FamilyResult bf = brute_force_family(inst);
  ASSERT_TRUE(bf.at(0).feasible);
  EXPECT_EQ(bf.at(0).objective, 18);  // three edges fit
  EXPECT_EQ(bf.at(0).x.ones(), 3);
  EXPECT_FALSE(bf.at(4).feasible);  // four edges never fit
}

TEST(BruteForceFamily, EmptyEdgeSet) {
  const auto inst = make_instance({{}}, {2}, {}, {}, 3);
  const FamilyResult bf = brute_force_family(inst);
  ASSERT_TRUE(bf.at(0).feasible);
  EXPECT_EQ(bf.at(0).objective, 0);
  for (std::int64_t s = 1; s <= 3; ++s) EXPECT_FALSE(bf.at(s).feasible);
  const FamilyResult dp = solve_family(inst);
  ASSERT_TRUE(dp.at(0).feasible);
  for (std::int64_t s = 1; s <= 3; ++s) EXPECT_FALSE(dp.at(s).feasible);
}

TEST(BruteForceFamily, RefusesLargeInstances) {
  BudgetedInstance inst;
  inst.requirements.assign(1, std::vector<int>(21, 1));
  inst.capacities = {1};
  inst.scaled_means.assign(21, 1);
  inst.scaled_vars.assign(21, 1);
  inst.s_max = 1;
  EXPECT_THROW(brute_force_family(inst), std::invalid_argument);
}

TEST(SolveFamily, ClippedCapacityDeficitIsCaught) {
  // Edge 0 needs 2 units in row 0 but only 1 is available; the clipped
  // recursion would hide the deficit without the explicit re-check.
  const auto inst = make_instance({{2, 1}, {1, 1}}, {1, 2}, {4, 1}, {100, 1}, 4);
  const FamilyResult dp = solve_family(inst);
  const FamilyResult bf = brute_force_family(inst);
  for (std::int64_t s = 0; s <= 4; ++s) {
    EXPECT_EQ(dp.at(s).feasible, bf.at(s).feasible) << "s=" << s;
    if (dp.at(s).feasible) {
      EXPECT_EQ(dp.at(s).objective, bf.at(s).objective) << "s=" << s;
      EXPECT_EQ(dp.at(s).x.bits, bf.at(s).x.bits) << "s=" << s;
    }
  }
  std::string why;
  EXPECT_TRUE(verify_family(inst, dp, &why)) << why;
}

TEST(SolveFamily, RandomizedEquivalenceWithEnumeration) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const BudgetedInstance inst = random_budgeted_instance(rng);
    const FamilyResult dp = solve_family(inst);
    const FamilyResult bf = brute_force_family(inst);
    std::string why;
    ASSERT_TRUE(verify_family(inst, dp, &why)) << "trial " << trial << ": " << why;
    for (std::int64_t s = 0; s <= inst.s_max; ++s) {
      ASSERT_EQ(dp.at(s).feasible, bf.at(s).feasible)
          << "trial " << trial << " s=" << s;
      if (!dp.at(s).feasible) continue;
      ASSERT_EQ(dp.at(s).objective, bf.at(s).objective)
          << "trial " << trial << " s=" << s;
      ASSERT_EQ(dp.at(s).x.bits, bf.at(s).x.bits)
          << "trial " << trial << " s=" << s << " (tie rule mismatch)";
    }
  }
}

TEST(SolveFamily, ObjectiveNonincreasingInBudget) {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const BudgetedInstance inst = random_budgeted_instance(rng);
    const FamilyResult dp = solve_family(inst);
    for (std::int64_t s = 1; s <= inst.s_max; ++s) {
      if (!dp.at(s).feasible) {
        // Once infeasible, larger budgets stay infeasible.
        for (std::int64_t u = s; u <= inst.s_max; ++u)
          EXPECT_FALSE(dp.at(u).feasible);
        break;
      }
      EXPECT_LE(dp.at(s).objective, dp.at(s - 1).objective);
    }
  }
}

TEST(SolveFamily, TableMonotonicityInvariants) {
  Rng rng(88);
  for (int trial = 0; trial < 20; ++trial) {
    const BudgetedInstance inst = random_budgeted_instance(rng, 6, 2, 2, 5, 9);
    DPTable table;
    solve_family(inst, &table);
    const detail::CapacityGrid grid(inst.capacities);
    const int num_edges = inst.num_edges();
    for (std::int64_t s = 0; s < table.s_count; ++s) {
      for (int c = 0; c < grid.grid_size; ++c) {
        for (int i = 0; i <= num_edges; ++i) {
          const std::int64_t v = table.value_at(s, c, i);
          if (s > 0) EXPECT_LE(v, table.value_at(s - 1, c, i));
          if (i < num_edges) EXPECT_GE(v, table.value_at(s, c, i + 1));
          for (std::size_t k = 0; k < inst.capacities.size(); ++k) {
            if (grid.coord(c, static_cast<int>(k)) <
                inst.capacities[k])
              EXPECT_LE(v, table.value_at(s, c + grid.strides[k], i));
          }
        }
      }
    }
  }
}

TEST(SolveFamily, StateCountMatchesFormula) {
  const auto inst = make_instance({{1, 2}, {2, 1}}, {2, 3}, {1, 2}, {3, 4}, 5);
  DPTable table;
  solve_family(inst, &table);
  EXPECT_EQ(dp_table_states(inst),
            static_cast<std::size_t>(6) * (3 * 4) * 3);
  EXPECT_EQ(table.values.size(), dp_table_states(inst));
}

TEST(SolveFamily, InfeasibleMarkerSaturates) {
  // Huge objective weights with an unreachable budget: the marker must not
  // wrap into a plausible value.
  const auto inst = make_instance({{1, 1}}, {1}, {1, 1},
                                  {std::numeric_limits<std::int64_t>::max() / 16,
                                   std::numeric_limits<std::int64_t>::max() / 16},
                                  2);
  const FamilyResult dp = solve_family(inst);
  EXPECT_TRUE(dp.at(1).feasible);
  EXPECT_FALSE(dp.at(2).feasible);  // needs both edges, capacity forbids
}

TEST(MaxWeightFeasible, NothingProfitable) {
  ResourceModel rm;
  rm.num_resource_types = 1;
  rm.requirements = {{1, 1, 1}};
  rm.capacities = {2};
  const std::vector<double> weights = {0.0, -0.5, 0.0};
  const std::vector<std::uint8_t> allowed(3, 1);
  auto [x, value] = max_weight_feasible(weights, rm, allowed);
  EXPECT_EQ(x.ones(), 0);
  EXPECT_DOUBLE_EQ(value, 0.0);
}

TEST(MaxWeightFeasible, WorkedExampleFullMask) {
  ResourceModel rm;
  rm.num_resource_types = 1;
  rm.requirements = {{1, 1, 1}};
  rm.capacities = {2};
  const std::vector<double> weights = {0.2, 0.7, 0.5};
  auto [x, value] = max_weight_feasible(weights, rm, {1, 1, 1});
  EXPECT_EQ(x.bits, bits({0, 1, 1}));
  EXPECT_DOUBLE_EQ(value, 1.2);
}

TEST(MaxWeightFeasible, MaskExcludesBestEdge) {
  ResourceModel rm;
  rm.num_resource_types = 1;
  rm.requirements = {{1, 1, 1}};
  rm.capacities = {2};
  const std::vector<double> weights = {0.2, 0.7, 0.5};
  auto [x, value] = max_weight_feasible(weights, rm, {1, 0, 1});
  EXPECT_EQ(x.bits, bits({1, 0, 1}));
  EXPECT_DOUBLE_EQ(value, 0.7);
}

TEST(MaxWeightFeasible, MatchesEnumerationOnRandomInstances) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int num_edges = 1 + static_cast<int>(rng.uniform_int(0, 9));
    const int num_res = 1 + static_cast<int>(rng.uniform_int(0, 1));
    ResourceModel rm;
    rm.num_resource_types = num_res;
    rm.requirements.assign(num_res, std::vector<int>(num_edges));
    rm.capacities.resize(num_res);
    for (int k = 0; k < num_res; ++k) {
      rm.capacities[k] = static_cast<int>(rng.uniform_int(0, 3));
      for (int e = 0; e < num_edges; ++e)
        rm.requirements[k][e] = static_cast<int>(rng.uniform_int(0, 2));
    }
    std::vector<double> weights(num_edges);
    std::vector<std::uint8_t> allowed(num_edges);
    for (int e = 0; e < num_edges; ++e) {
      weights[e] = rng.uniform01() - 0.2;
      allowed[e] = rng.bernoulli(0.8);
    }
    auto [x, value] = max_weight_feasible(weights, rm, allowed);
    // Enumerate.
    double best = -1.0;
    for (std::uint32_t mask = 0; mask < (1u << num_edges); ++mask) {
      bool ok = true;
      for (int e = 0; e < num_edges && ok; ++e)
        if ((mask & (1u << e)) && !allowed[e]) ok = false;
      for (int k = 0; k < num_res && ok; ++k) {
        int used = 0;
        for (int e = 0; e < num_edges; ++e)
          if (mask & (1u << e)) used += rm.requirements[k][e];
        ok = used <= rm.capacities[k];
      }
      if (!ok) continue;
      double w = 0.0;
      for (int e = 0; e < num_edges; ++e)
        if (mask & (1u << e)) w += weights[e];
      best = std::max(best, w);
    }
    EXPECT_NEAR(value, best, 1e-12) << "trial " << trial;
    // The returned vector is itself feasible, masked, and worth `value`.
    double check = 0.0;
    for (int e = 0; e < num_edges; ++e) {
      if (!x.bits[e]) continue;
      EXPECT_TRUE(allowed[e]);
      check += weights[e];
    }
    EXPECT_NEAR(check, value, 1e-12);
    EXPECT_TRUE(is_feasible(x, rm));
  }
}

TEST(MaxFeasibleCardinality, CountsPackableEdges) {
  ResourceModel rm;
  rm.num_resource_types = 2;
  rm.requirements = {{1, 1, 1, 1}, {1, 1, 2, 1}};
  rm.capacities = {3, 3};
  EXPECT_EQ(max_feasible_cardinality(rm), 3);
}

}  // namespace
}  // namespace esdp
