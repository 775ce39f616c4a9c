#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "bitrade/learners.hpp"

using namespace bitrade;

namespace {
void expect_gap_bound(const Transcript& tr, std::uint64_t K) {
  const double bound = 1.0 / static_cast<double>(K);
  for (const auto& r : tr.records) ASSERT_LE(r.posted.p - r.posted.q, bound) << "round " << r.t;
  EXPECT_LE(tr.summary.violation, static_cast<double>(tr.records.size()) / static_cast<double>(K));
}

// Access wrapper that only forwards post(); the learner template must not
// need anything else.
struct CountingAccess {
  Market* m;
  std::uint64_t posts = 0;
  bool post(PricePair x) {
    ++posts;
    return m->post(x);
  }
  std::uint64_t rounds_consumed() const { return m->rounds_consumed(); }
  std::uint64_t rounds_remaining() const { return m->rounds_remaining(); }
};
static_assert(RoundAccess<CountingAccess>);
}  // namespace

TEST(Schedules, Stochastic) {
  auto s = schedule_stochastic(10000, 0.75);
  EXPECT_EQ(s.K, 10u);
  EXPECT_NEAR(s.alpha, 0.1, 1e-12);
  EXPECT_EQ(s.T0, 100u);
  s = schedule_stochastic(1000000, 0.75);
  EXPECT_EQ(s.K, 32u);
  EXPECT_NEAR(s.alpha, std::pow(10.0, -1.5), 1e-12);
  EXPECT_EQ(s.T0, 1000u);
  try {
    schedule_stochastic(10000, 0.5);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_EQ(std::string(e.what()), "beta outside [3/4, 6/7]");
  }
  EXPECT_THROW(schedule_stochastic(1, 0.8), std::invalid_argument);
}

TEST(Schedules, Adversarial) {
  const auto s = schedule_adversarial(10000, 0.75);
  EXPECT_EQ(s.K, 10u);
  EXPECT_EQ(s.N, 100u);
  EXPECT_NEAR(s.alpha, 10.0, 1e-12);
  EXPECT_EQ(s.block_len, 100u);
  EXPECT_EQ(s.probe_cap, 14u);
  EXPECT_GE(s.block_len, 2 * s.probe_cap);
  EXPECT_THROW(schedule_adversarial(50, 0.75), HorizonExhausted);
}

TEST(Stochastic, DiagonalPointMass) {
  const Environment env(PointMass{{0.5, 0.5}});
  const auto run = run_stochastic(env, 10000, 0.75, 1e-3, 1);
  const auto commit = run.outcome.forest.pair(run.outcome.committed);
  const auto explore = run.transcript.summary.explore_rounds;
  for (std::size_t t = explore; t < run.transcript.records.size(); ++t) {
    EXPECT_EQ(run.transcript.records[t].posted.p, commit.p);
    EXPECT_EQ(run.transcript.records[t].gft, 0.0);
  }
  EXPECT_LE(run.transcript.summary.violation, 1000.0);
  expect_gap_bound(run.transcript, run.schedule.K);
}

TEST(Stochastic, UniformSeeds) {
  double mean_regret = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Environment env(IndependentUniform{}, seed);
    const auto run = run_stochastic(env, 10000, 0.75, 1e-3, seed);
    expect_gap_bound(run.transcript, run.schedule.K);
    EXPECT_LE(run.transcript.summary.violation, 1000.0);
    EXPECT_EQ(run.transcript.records.size(), 10000u);
    mean_regret += run.transcript.summary.regret / 10;
  }
  EXPECT_GT(mean_regret, 0.0);
}

TEST(Stochastic, NeverTradingInstance) {
  const Environment env(PointMass{{0.9, 0.1}});
  const auto run = run_stochastic(env, 10000, 0.75, 1e-3, 4);
  EXPECT_EQ(run.transcript.summary.regret, 0.0);
  EXPECT_EQ(run.transcript.summary.violation, 0.0);
}

TEST(Stochastic, HorizonTooSmall) {
  const Environment env(IndependentUniform{}, 1);
  try {
    run_stochastic(env, 10, 0.75, 1e-3, 1);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_EQ(std::string(e.what()), "horizon too small for schedule");
  }
}

TEST(Stochastic, LearnerNeedsOnlyPost) {
  const Environment env(IndependentUniform{}, 9);
  Market m(env, 10000);
  CountingAccess access{&m};
  CounterRng rng(9, 1);
  play_stochastic(access, schedule_stochastic(10000, 0.75), 1e-3, rng);
  EXPECT_EQ(access.posts, 10000u);
}

TEST(Stochastic, Reproducible) {
  const Environment env(IndependentUniform{}, 5);
  const auto a = run_stochastic(env, 20000, 0.8, 1e-3, 5);
  const auto b = run_stochastic(env, 20000, 0.8, 1e-3, 5);
  EXPECT_EQ(a.transcript.summary.regret, b.transcript.summary.regret);
  EXPECT_EQ(a.outcome.committed, b.outcome.committed);
}

TEST(Adversarial, ConstantSequence) {
  const Environment env(FixedSequence{{{0.3, 0.7}}, true});
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto run = run_adversarial(env, 10000, 0.75, 1e-3, seed);
    expect_gap_bound(run.transcript, run.schedule.K);
    EXPECT_LE(run.transcript.summary.violation, 1000.0);
    const auto best = best_fixed_price_hindsight(run.transcript.vals);
    EXPECT_NEAR(best.total, 4000.0, 1e-9);
    const double r = run.transcript.summary.regret;
    EXPECT_TRUE(std::isfinite(r));
    EXPECT_LT(r, 4000.0);
    EXPECT_NEAR(r, best.total - cumulative_gft(run.transcript.records), 1e-9);
  }
}

TEST(Adversarial, BlockAccounting) {
  const Environment env(IndependentUniform{}, 3);
  const auto run = run_adversarial(env, 30000, 0.8, 1e-3, 3);
  const auto& o = run.outcome;
  const auto& s = run.schedule;
  ASSERT_EQ(o.block_leaves.size(), s.N);
  std::uint64_t probes = 0;
  for (std::size_t j = 0; j < o.block_leaves.size(); ++j) {
    probes += 2 * o.block_leaves[j];
    if (j) EXPECT_GE(o.block_leaves[j], o.block_leaves[j - 1]);
  }
  EXPECT_EQ(o.explore_rounds, probes);
  EXPECT_LE(o.arms_ever, s.probe_cap);
  EXPECT_LE(o.forest.max_leaf_depth(), s.max_depth);
  expect_gap_bound(run.transcript, s.K);
}

TEST(Adversarial, ConcentratedMassRefinesGrid) {
  // All mass inside one root square: its n-hat grows by ~4 per block and
  // eventually clears the confidence threshold.
  const Environment env(PointMass{{0.55, 0.55}});
  const auto run = run_adversarial(env, 1000000, 6.0 / 7.0, 0.5, 2);
  EXPECT_GT(run.outcome.forest.split_count(), 0u);
  EXPECT_LE(run.outcome.arms_ever, run.schedule.probe_cap);
  EXPECT_LE(run.outcome.forest.max_leaf_depth(), run.schedule.max_depth);
  expect_gap_bound(run.transcript, run.schedule.K);
}

TEST(Adversarial, Reproducible) {
  const Environment env(IndependentUniform{}, 8);
  const auto a = run_adversarial(env, 20000, 0.8, 1e-3, 8);
  const auto b = run_adversarial(env, 20000, 0.8, 1e-3, 8);
  EXPECT_EQ(a.transcript.summary.regret, b.transcript.summary.regret);
  EXPECT_EQ(a.outcome.exploited, b.outcome.exploited);
}
