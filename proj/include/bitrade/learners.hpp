#pragma once

// End-to-end learners for a violation budget T^beta, beta in [3/4, 6/7]:
//   - run_stochastic: adaptive grid, per-leaf GFT estimation, then commit;
//   - run_adversarial: block decomposition with a grid refined at run time
//     and a sleeping-expert choice of the exploited pair per block.
// Both only ever post pairs with p - q <= 1/K, so V_T <= T/K deterministically.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitrade/core.hpp"
#include "bitrade/environment.hpp"
#include "bitrade/estimators.hpp"
#include "bitrade/grid.hpp"
#include "bitrade/market.hpp"
#include "bitrade/random.hpp"
#include "bitrade/sleeping_expert.hpp"

namespace bitrade {

inline constexpr double kBetaMin = 3.0 / 4.0;
inline constexpr double kBetaMax = 6.0 / 7.0;

namespace detail {
inline void check_beta(double beta) {
  if (!(beta >= kBetaMin - 1e-12 && beta <= kBetaMax + 1e-12))
    throw std::invalid_argument("beta outside [3/4, 6/7]");
}

/// Round half up with floor 1.
inline std::uint64_t round_at_least_one(double x) {
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(x + 0.5)));
}

/// Neumaier sum, used for the violation so that V_T <= T/K survives rounding.
inline double compensated_sum(const std::vector<double>& xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}
}  // namespace detail

/// Number of seller/buyer price cells K = ceil(T^{1-beta}); the ceiling keeps
/// T/K <= T^beta.
inline std::uint64_t cells_for(double T, double beta) {
  return std::max<std::uint64_t>(1, ceil_tolerant(std::pow(T, 1.0 - beta)));
}

struct ScheduleStochastic {
  std::uint64_t K = 1;
  double alpha = 1.0;
  std::uint64_t T0 = 1;
  int M = 1;
};

inline ScheduleStochastic schedule_stochastic(std::uint64_t T, double beta) {
  if (T < 2) throw std::invalid_argument("horizon must be >= 2");
  detail::check_beta(beta);
  const double t = static_cast<double>(T);
  ScheduleStochastic s;
  s.K = cells_for(t, beta);
  s.alpha = std::pow(t, -beta / 3.0);
  s.T0 = std::max<std::uint64_t>(1, ceil_tolerant(std::pow(t, 2.0 * beta / 3.0)));
  s.M = grid_levels(s.K, s.alpha);
  return s;
}

struct ScheduleAdversarial {
  std::uint64_t K = 1;
  std::uint64_t N = 1;
  double alpha = 1.0;
  std::uint64_t block_len = 1;
  int max_depth = 0;          ///< D = ceil(log2(4N/(K alpha)))
  std::uint64_t arm_capacity = 1;  ///< K (2^{D+1} - 1)
  std::uint64_t probe_cap = 0;     ///< K + ceil(4N/(alpha K))
};

inline ScheduleAdversarial schedule_adversarial(std::uint64_t T, double beta) {
  if (T < 2) throw std::invalid_argument("horizon must be >= 2");
  detail::check_beta(beta);
  const double t = static_cast<double>(T);
  ScheduleAdversarial s;
  s.K = cells_for(t, beta);
  s.N = detail::round_at_least_one(std::pow(t, 2.0 * beta / 3.0));
  s.alpha = std::pow(t, beta / 3.0);
  s.block_len = T / s.N;
  const double ratio = 4.0 * static_cast<double>(s.N) / (s.alpha * static_cast<double>(s.K));
  s.max_depth = ratio > 1.0 ? static_cast<int>(ceil_tolerant(std::log2(ratio))) : 0;
  s.arm_capacity = s.K * ((std::uint64_t{2} << s.max_depth) - 1);
  s.probe_cap = s.K + ceil_tolerant(ratio);
  if (s.block_len < 2 * s.probe_cap) throw HorizonExhausted();
  return s;
}

struct Summary {
  std::uint64_t T = 0;
  double regret = 0.0;     ///< R_T against the best fixed price in hindsight
  double violation = 0.0;  ///< V_T = -sum of revenues
  std::size_t grid_leaves = 0;
  std::uint64_t explore_rounds = 0;
};

/// Per-round transcript plus ground-truth valuations (metrics only).
struct Transcript {
  std::vector<RoundRecord> records;
  std::vector<Valuation> vals;
  Summary summary;
};

inline Summary summarize(const std::vector<RoundRecord>& records, const std::vector<Valuation>& vals) {
  Summary s;
  s.T = records.size();
  std::vector<double> subsidies;
  subsidies.reserve(records.size());
  for (const auto& r : records) subsidies.push_back(-r.rev);
  s.violation = detail::compensated_sum(subsidies);
  s.regret = regret(vals, records);
  return s;
}

inline Transcript finish(Market& market, std::size_t leaves, std::uint64_t explore) {
  Transcript tr{market.records(), market.valuations(), {}};
  tr.summary = summarize(tr.records, tr.vals);
  tr.summary.grid_leaves = leaves;
  tr.summary.explore_rounds = explore;
  return tr;
}

// ---------------------------------------------------------------------------
// Stochastic valuations: explore, then commit.

struct StochasticOutcome {
  GridForest forest;
  std::vector<NodeId> leaves;      ///< ascending q
  std::vector<double> estimates;   ///< aligned with leaves
  NodeId committed = kNoNode;
  std::uint64_t grid_rounds = 0;
  std::uint64_t estimation_rounds = 0;
};

/// Learner body; talks to the market only through `access`.
template <RoundAccess Access>
StochasticOutcome play_stochastic(Access& access, const ScheduleStochastic& s, double delta,
                                  CounterRng& rng) {
  GridBuild grid = build_grid_stochastic(access, s.K, s.alpha, delta);
  StochasticOutcome out{std::move(grid.forest), {}, {}, kNoNode, grid.rounds, 0};
  out.leaves = out.forest.leaves();
  if (out.leaves.size() * s.T0 > access.rounds_remaining()) throw HorizonExhausted();

  out.estimates.reserve(out.leaves.size());
  for (NodeId id : out.leaves)
    out.estimates.push_back(gft_est_rep(access, out.forest.pair(id), s.T0, rng));
  out.estimation_rounds = out.leaves.size() * s.T0;

  // Leaves are in ascending q, so the first maximum is the smallest-q tie.
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.estimates.size(); ++i)
    if (out.estimates[i] > out.estimates[best]) best = i;
  out.committed = out.leaves[best];

  const PricePair commit = out.forest.pair(out.committed);
  while (access.rounds_remaining() > 0) access.post(commit);
  return out;
}

struct StochasticRun {
  Transcript transcript;
  StochasticOutcome outcome;
  ScheduleStochastic schedule;
};

inline StochasticRun run_stochastic(const Environment& env, std::uint64_t T, double beta,
                                    double delta, std::uint64_t seed) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  const auto schedule = schedule_stochastic(T, beta);
  Market market(env, T);
  MarketView view(market);
  CounterRng rng(seed, 1);
  auto outcome = play_stochastic(view, schedule, delta, rng);
  auto transcript =
      finish(market, outcome.leaves.size(), outcome.grid_rounds + outcome.estimation_rounds);
  return {std::move(transcript), std::move(outcome), schedule};
}

// ---------------------------------------------------------------------------
// Adversarial valuations: block decomposition.

struct AdversarialOutcome {
  GridForest forest;
  std::vector<std::size_t> block_leaves;  ///< |F_j| per block
  std::vector<NodeId> exploited;          ///< arm played in each block
  std::size_t arms_ever = 0;              ///< |union of F_j|
  std::uint64_t explore_rounds = 0;
};

template <RoundAccess Access>
AdversarialOutcome play_adversarial(Access& access, const ScheduleAdversarial& s, double delta,
                                    std::uint64_t T, CounterRng& rng) {
  AdversarialOutcome out{GridForest(s.K), {}, {}, 0, 0};
  DynamicSleepingExpert expert(s.N, s.arm_capacity);
  std::vector<double> counts(s.K, 0.0);  // n-hat, indexed by node
  std::vector<bool> ever(s.K, false);

  const double width =
      4.0 * std::sqrt(std::log(2.0 * static_cast<double>(T) / delta) * static_cast<double>(s.N) / 2.0);
  const double ka = static_cast<double>(s.K) * s.alpha;

  std::vector<std::uint64_t> slots;
  for (std::uint64_t j = 0; j < s.N; ++j) {
    const std::uint64_t len = j + 1 == s.N ? T - j * s.block_len : s.block_len;
    const std::vector<NodeId> active = out.forest.leaves();
    const std::size_t m = active.size();
    if (2 * m > len) throw std::runtime_error("block capacity exceeded");
    out.block_leaves.push_back(m);
    for (NodeId id : active) {
      if (id >= ever.size()) ever.resize(id + 1, false);
      if (!ever[id]) {
        ever[id] = true;
        ++out.arms_ever;
      }
    }

    std::vector<ArmId> awake(active.begin(), active.end());
    const auto chosen = static_cast<NodeId>(expert.select(awake, rng));
    out.exploited.push_back(chosen);
    const PricePair exploit = out.forest.pair(chosen);

    // Partial Fisher-Yates: 2m distinct rounds, the first m probe the square
    // indicator (f_j), the next m the gain from trade (g_j).
    slots.resize(len);
    std::iota(slots.begin(), slots.end(), std::uint64_t{0});
    for (std::size_t r = 0; r < 2 * m; ++r) std::swap(slots[r], slots[r + rng.below(len - r)]);
    constexpr std::int64_t kExploit = -1;
    std::vector<std::int64_t> role(len, kExploit);  // >= 0: f-probe of leaf r; >= m: g-probe
    for (std::size_t r = 0; r < 2 * m; ++r) role[slots[r]] = static_cast<std::int64_t>(r);

    std::vector<double> gft_hat(m, 0.0);
    for (std::uint64_t t = 0; t < len; ++t) {
      const std::int64_t r = role[t];
      if (r == kExploit) {
        access.post(exploit);
        continue;
      }
      ++out.explore_rounds;
      const auto idx = static_cast<std::size_t>(r) % m;
      const NodeId id = active[idx];
      const PricePair x = out.forest.pair(id);
      if (static_cast<std::size_t>(r) < m) {
        counts[id] += ind_est_single(access, x, rng);
        const double lower = counts[id] - width;
        const int d = out.forest.node(id).depth;
        if (lower > std::ldexp(ka, d)) {
          out.forest.split(id);
          counts.resize(out.forest.size(), 0.0);
        }
      } else {
        gft_hat[idx] = gft_est_single(access, x, rng);
      }
    }

    std::vector<double> losses(m);
    for (std::size_t i = 0; i < m; ++i) losses[i] = std::clamp((3.0 - gft_hat[i]) / 6.0, 0.0, 1.0);
    expert.update(awake, losses);
  }
  return out;
}

struct AdversarialRun {
  Transcript transcript;
  AdversarialOutcome outcome;
  ScheduleAdversarial schedule;
};

inline AdversarialRun run_adversarial(const Environment& env, std::uint64_t T, double beta,
                                      double delta, std::uint64_t seed) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  const auto schedule = schedule_adversarial(T, beta);
  Market market(env, T);
  MarketView view(market);
  CounterRng rng(seed, 2);
  auto outcome = play_adversarial(view, schedule, delta, T, rng);
  auto transcript = finish(market, outcome.forest.leaf_count(), outcome.explore_rounds);
  return {std::move(transcript), std::move(outcome), schedule};
}

}  // namespace bitrade
