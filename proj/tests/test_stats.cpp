#include "esdp/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "esdp/rng.hpp"

namespace esdp {
namespace {

Schedules sched_with(DeltaVariant dv, GVariant gv, int bound) {
  Schedules s;
  s.delta_variant = dv;
  s.g_variant = gv;
  s.cardinality_bound = bound;
  return s;
}

TEST(EvalDelta, KnownValues) {
  const Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kDefault, 16);
  EXPECT_DOUBLE_EQ(eval_delta(s, 0.0), 1.0);
  EXPECT_NEAR(eval_delta(s, 2000.0), 0.3173, 5e-4);

  Schedules inv_log = s;
  inv_log.delta_variant = DeltaVariant::kInvLog;
  EXPECT_DOUBLE_EQ(eval_delta(inv_log, 0.0), 1.0);
}

TEST(EvalDelta, AllVariantsPositiveAndStrictlyDecreasing) {
  for (DeltaVariant v : {DeltaVariant::kDefault, DeltaVariant::kInvLog,
                         DeltaVariant::kInvLogLog, DeltaVariant::kInvLogLogLog}) {
    const Schedules s = sched_with(v, GVariant::kDefault, 8);
    double prev = eval_delta(s, 1.0);
    EXPECT_GT(prev, 0.0);
    for (int t = 2; t <= 5000; t += 13) {
      const double d = eval_delta(s, t);
      EXPECT_GT(d, 0.0);
      EXPECT_LT(d, prev) << delta_variant_name(v) << " at t=" << t;
      prev = d;
    }
  }
}

TEST(EvalG, KnownValues) {
  Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kDefault, 16);
  EXPECT_DOUBLE_EQ(eval_g(s, 0.0), 0.0);
  const double expected =
      std::log(2.0) + 4.0 * std::log(std::log(2.0) + 1.0) * 16.0;
  EXPECT_NEAR(eval_g(s, 1.0), 34.39, 0.01);
  EXPECT_DOUBLE_EQ(eval_g(s, 1.0), expected);

  s.g_variant = GVariant::kLnOnly;
  EXPECT_NEAR(eval_g(s, std::exp(1.0) - 1.0), 1.0, 1e-12);

  s.g_variant = GVariant::kLnLnOnly;
  EXPECT_DOUBLE_EQ(eval_g(s, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(eval_g(s, 1.0), 4.0 * std::log(std::log(2.0) + 1.0) * 16.0);
}

TEST(Update, AveragesTwoObservations) {
  const Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kDefault, 16);
  EdgeStats stats(2);
  DecisionVector x(2);
  x.bits = {1, 0};
  update(stats, x, {0.4, 0.0}, s, 1);
  update(stats, x, {0.6, 0.0}, s, 2);
  EXPECT_EQ(stats.counts[0], 2);
  EXPECT_DOUBLE_EQ(stats.means[0], 0.5);
  EXPECT_EQ(stats.counts[1], 0);
  EXPECT_DOUBLE_EQ(stats.means[1], 0.0);
  EXPECT_TRUE(std::isinf(stats.var_proxy[1]));
}

TEST(Update, VarianceProxyTracksG) {
  const Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kDefault, 16);
  EdgeStats stats(1);
  DecisionVector x(1);
  x.bits = {1};
  update(stats, x, {0.5}, s, 1);
  update(stats, x, {0.5}, s, 1);  // n = 2 at the g(1) snapshot
  // g(1) with bound 16 is about 34.39; proxy = g / (2n)
  EXPECT_NEAR(stats.var_proxy[0], 8.598, 1e-2);
  EXPECT_DOUBLE_EQ(stats.var_proxy[0], eval_g(s, 1.0) / 4.0);
}

TEST(Update, EmptySelectionOnlyRescalesVariance) {
  const Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kLnOnly, 4);
  EdgeStats stats(2);
  DecisionVector pick(2);
  pick.bits = {1, 1};
  update(stats, pick, {0.3, 0.7}, s, 1);
  const auto counts = stats.counts;
  const auto means = stats.means;
  DecisionVector none(2);
  update(stats, none, {0.0, 0.0}, s, 50);
  EXPECT_EQ(stats.counts, counts);
  EXPECT_EQ(stats.means, means);
  EXPECT_DOUBLE_EQ(stats.var_proxy[0], eval_g(s, 50.0) / 2.0);
}

TEST(Update, DoublingGDoublesEveryProxy) {
  // ln-only g: g(1) = ln 2 and g(3) = ln 4 = 2 ln 2.
  const Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kLnOnly, 4);
  EdgeStats stats(3);
  DecisionVector x(3);
  x.bits = {1, 1, 1};
  update(stats, x, {0.2, 0.5, 0.9}, s, 1);
  update(stats, x, {0.4, 0.1, 0.8}, s, 1);
  DecisionVector none(3);
  const std::vector<double> empty_obs(3, 0.0);
  update(stats, none, empty_obs, s, 1);
  const std::vector<double> at_g1 = stats.var_proxy;
  update(stats, none, empty_obs, s, 3);
  for (int e = 0; e < 3; ++e)
    EXPECT_NEAR(stats.var_proxy[e] / at_g1[e], 2.0, 1e-12);
}

TEST(Update, RejectsOutOfRangeObservations) {
  const Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kDefault, 4);
  EdgeStats stats(1);
  DecisionVector x(1);
  x.bits = {1};
  EXPECT_THROW(update(stats, x, {1.5}, s, 1), std::invalid_argument);
  EXPECT_THROW(update(stats, x, {std::nan("")}, s, 1), std::invalid_argument);
}

TEST(Scale, CeilingArithmetic) {
  // Directly mirrors the scaling formulas at a slot where they are easy to
  // recompute: xi = ceil(bound / delta), scaled mean = ceil(xi * mean),
  // scaled var = ceil(xi^2 * g / (2n)).
  const Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kDefault, 16);
  EdgeStats stats(2);
  DecisionVector x(2);
  x.bits = {1, 0};
  update(stats, x, {0.5, 0.0}, s, 1);
  update(stats, x, {0.5, 0.0}, s, 1);

  const std::int64_t t = 1;
  const double delta = eval_delta(s, 1.0);
  const double g = eval_g(s, 1.0);
  const ScaledStats ss = scale(stats, s, t);
  const auto expected_xi =
      static_cast<std::int64_t>(std::ceil(16.0 / delta));
  EXPECT_EQ(ss.scale_factor, expected_xi);
  EXPECT_EQ(ss.s_max, expected_xi * 16);
  const double xi = static_cast<double>(expected_xi);
  EXPECT_EQ(ss.scaled_means[0],
            static_cast<std::int64_t>(std::ceil(xi * 0.5)));
  EXPECT_EQ(ss.scaled_vars[0],
            static_cast<std::int64_t>(std::ceil(xi * xi * g / 4.0)));
  // Unexplored edge: zero scaled mean, sentinel variance.
  EXPECT_EQ(ss.scaled_means[1], 0);
  EXPECT_EQ(ss.scaled_vars[1], ss.unexplored_sentinel);
  EXPECT_EQ(ss.unexplored_sentinel,
            2 * 2 * static_cast<std::int64_t>(std::ceil(xi * xi * g)));
}

TEST(Scale, HandWorkedCeilingExample) {
  // xi = 16 and a variance proxy of 8.598 scale to ceil(256 * 8.598) = 2202;
  // a mean of 0.5 scales to exactly 8.
  const double xi = 16.0;
  EXPECT_EQ(static_cast<std::int64_t>(std::ceil(xi * 0.5)), 8);
  EXPECT_EQ(static_cast<std::int64_t>(std::ceil(xi * xi * 8.598)), 2202);
}

TEST(Scale, ZeroMeanScalesToZero) {
  const Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kDefault, 4);
  EdgeStats stats(1);
  DecisionVector x(1);
  x.bits = {1};
  update(stats, x, {0.0}, s, 1);  // explored but all observations clamped to 0
  const ScaledStats ss = scale(stats, s, 1);
  EXPECT_EQ(ss.scaled_means[0], 0);
  EXPECT_LT(ss.scaled_vars[0], ss.unexplored_sentinel);
}

TEST(Scale, SentinelDominatesExploredVariances) {
  Rng rng(31);
  const Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kDefault, 8);
  for (int trial = 0; trial < 50; ++trial) {
    const int num_edges = 1 + static_cast<int>(rng.uniform_int(0, 11));
    EdgeStats stats(num_edges);
    DecisionVector x(num_edges);
    bool any_explored = false;
    for (int e = 0; e < num_edges; ++e) {
      x.bits[e] = rng.bernoulli(0.7);
      any_explored = any_explored || x.bits[e];
    }
    std::vector<double> obs(num_edges);
    for (auto& o : obs) o = rng.uniform01();
    update(stats, x, obs, s, 1);
    const std::int64_t t = 1 + rng.uniform_int(0, 3000);
    const ScaledStats ss = scale(stats, s, t);
    if (!any_explored) continue;
    std::int64_t max_explored = 0;
    for (int e = 0; e < num_edges; ++e)
      if (stats.counts[e] > 0)
        max_explored = std::max(max_explored, ss.scaled_vars[e]);
    EXPECT_GT(ss.unexplored_sentinel, num_edges * max_explored);
  }
}

TEST(Scale, SandwichInequalityEverywhere) {
  Rng rng(32);
  const Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kDefault, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const int num_edges = 1 + static_cast<int>(rng.uniform_int(0, 9));
    EdgeStats stats(num_edges);
    // A few random update rounds.
    const int rounds = 1 + static_cast<int>(rng.uniform_int(0, 4));
    for (int round = 0; round < rounds; ++round) {
      DecisionVector x(num_edges);
      std::vector<double> obs(num_edges, 0.0);
      for (int e = 0; e < num_edges; ++e) {
        x.bits[e] = rng.bernoulli(0.6);
        obs[e] = rng.uniform01();
      }
      update(stats, x, obs, s, round + 1);
    }
    const std::int64_t t = 1 + rng.uniform_int(0, 5000);
    const ScaledStats ss = scale(stats, s, t);
    const double xi = static_cast<double>(ss.scale_factor);
    for (int e = 0; e < num_edges; ++e) {
      if (stats.counts[e] == 0) continue;
      const double scaled = static_cast<double>(ss.scaled_means[e]);
      EXPECT_GE(scaled, xi * stats.means[e]);
      EXPECT_LE(scaled, xi * stats.means[e] + 1.0);
      EXPECT_GE(ss.scaled_means[e], 0);
      EXPECT_LE(ss.scaled_means[e], ss.scale_factor);
    }
  }
}

TEST(Scale, ScaleFactorNondecreasingForDefaultVariant) {
  const Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kDefault, 16);
  EdgeStats stats(1);
  std::int64_t prev = 0;
  for (std::int64_t t = 1; t <= 4000; t += 7) {
    const ScaledStats ss = scale(stats, s, t);
    EXPECT_GE(ss.scale_factor, prev);
    prev = ss.scale_factor;
  }
}

TEST(Update, IncrementalMeansMatchFromScratchRecomputation) {
  Rng rng(33);
  const int num_edges = 6;
  const Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kDefault, 4);
  EdgeStats stats(num_edges);
  std::vector<std::vector<double>> history(num_edges);
  for (int step = 0; step < 10000; ++step) {
    DecisionVector x(num_edges);
    std::vector<double> obs(num_edges, 0.0);
    for (int e = 0; e < num_edges; ++e) {
      x.bits[e] = rng.bernoulli(0.4);
      if (x.bits[e]) {
        obs[e] = rng.uniform01();
        history[e].push_back(obs[e]);
      }
    }
    update(stats, x, obs, s, step + 1);
  }
  for (int e = 0; e < num_edges; ++e) {
    if (history[e].empty()) {
      EXPECT_EQ(stats.counts[e], 0);
      continue;
    }
    double sum = 0.0;
    for (double v : history[e]) sum += v;
    EXPECT_EQ(stats.counts[e], static_cast<std::int64_t>(history[e].size()));
    EXPECT_NEAR(stats.means[e], sum / history[e].size(), 1e-9);
    EXPECT_NEAR(stats.means[e] * stats.counts[e], stats.value_sums[e], 1e-9);
  }
}

TEST(Scale, RequiresDecisionSlot) {
  const Schedules s = sched_with(DeltaVariant::kDefault, GVariant::kDefault, 4);
  EdgeStats stats(1);
  EXPECT_THROW(scale(stats, s, 0), std::invalid_argument);
}

}  // namespace
}  // namespace esdp
