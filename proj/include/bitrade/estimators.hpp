#pragma once

// Estimators that spend market rounds. Each post consumes exactly one round of
// the RoundAccess; no estimator posts a pair whose gap p - q exceeds the gap of
// its input pair, so the per-trade subsidy is bounded by the input.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "bitrade/core.hpp"
#include "bitrade/market.hpp"
#include "bitrade/random.hpp"

namespace bitrade {

namespace detail {
inline void require_ordered(const PricePair& x, const char* who) {
  if (x.p < x.q) throw std::invalid_argument(std::string(who) + ": inverted pair");
}
}  // namespace detail

struct ProbEstimate {
  double xi = 0.0;     ///< lower confidence value, raw - width
  double raw = 0.0;    ///< p1 - p2 - p3 + p4
  double width = 0.0;  ///< 4 sqrt(ln(4/nu) / (2L))
};

/// Lower-confidence estimate of P(q <= s <= p, q <= b <= p).
///
/// Posts (p,q), (q,q), (p,p), (q,p) for L rounds each; inclusion-exclusion of
/// the four trade frequencies isolates the square [q,p]^2.
template <RoundAccess Access>
ProbEstimate prob_est(Access& access, const PricePair& x, std::uint64_t L, double nu) {
  detail::require_ordered(x, "prob_est");
  if (L == 0) throw std::invalid_argument("prob_est: L must be >= 1");
  if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("prob_est: nu must lie in (0,1)");

  auto frequency = [&](PricePair posted) {
    std::uint64_t hits = 0;
    for (std::uint64_t r = 0; r < L; ++r) hits += access.post(posted) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(L);
  };
  const double p1 = frequency({x.p, x.q});
  const double p2 = frequency({x.q, x.q});
  const double p3 = frequency({x.p, x.p});
  const double p4 = frequency({x.q, x.p});

  ProbEstimate out;
  out.raw = p1 - p2 - p3 + p4;
  out.width = 4.0 * std::sqrt(std::log(4.0 / nu) / (2.0 * static_cast<double>(L)));
  out.xi = out.raw - out.width;
  return out;
}

/// One branch of the unbiased gain-from-trade estimator: post `posted`, and
/// the estimate is `weight` times the trade indicator.
struct Probe {
  PricePair posted;
  double weight = 0.0;
};

/// branch 0: (p*u, q) weight 3p; branch 1: (p, q + (1-q)u) weight 3(1-q);
/// branch 2: (p, q) weight 3(q-p). `u` is a uniform draw in [0,1).
inline Probe gft_probe(const PricePair& x, unsigned branch, double u) {
  switch (branch) {
    case 0:
      return {{x.p * u, x.q}, 3.0 * x.p};
    case 1:
      return {{x.p, x.q + (1.0 - x.q) * u}, 3.0 * (1.0 - x.q)};
    case 2:
      return {x, 3.0 * (x.q - x.p)};
    default:
      throw std::invalid_argument("gft_probe: branch must be 0, 1 or 2");
  }
}

/// Branches of the square-indicator estimator, sign pattern (+,-,-,+) scaled
/// by 4 so that the conditional mean equals 1{q <= s <= p, q <= b <= p}.
inline Probe ind_probe(const PricePair& x, unsigned branch) {
  switch (branch) {
    case 0:
      return {{x.p, x.q}, 4.0};
    case 1:
      return {{x.q, x.q}, -4.0};
    case 2:
      return {{x.p, x.p}, -4.0};
    case 3:
      return {{x.q, x.p}, 4.0};
    default:
      throw std::invalid_argument("ind_probe: branch must be in 0..3");
  }
}

/// Single-round unbiased estimate of GFT_t(p,q); value in [-3,3].
template <RoundAccess Access>
double gft_est_single(Access& access, const PricePair& x, CounterRng& rng) {
  detail::require_ordered(x, "gft_est");
  const auto branch = static_cast<unsigned>(rng.below(3));
  const double u = branch == 2 ? 0.0 : rng.uniform();
  const Probe probe = gft_probe(x, branch, u);
  return access.post(probe.posted) ? probe.weight : 0.0;
}

/// Mean of T0 single-round estimates; unbiased for GFT(p,q) under iid values.
template <RoundAccess Access>
double gft_est_rep(Access& access, const PricePair& x, std::uint64_t T0, CounterRng& rng) {
  detail::require_ordered(x, "gft_est_rep");
  if (T0 == 0) throw std::invalid_argument("gft_est_rep: T0 must be >= 1");
  double total = 0.0;
  for (std::uint64_t r = 0; r < T0; ++r) total += gft_est_single(access, x, rng);
  return total / static_cast<double>(T0);
}

/// Single-round unbiased estimate of 1{q <= s_t <= p, q <= b_t <= p}; value in {-4,0,4}.
template <RoundAccess Access>
double ind_est_single(Access& access, const PricePair& x, CounterRng& rng) {
  detail::require_ordered(x, "ind_est");
  const Probe probe = ind_probe(x, static_cast<unsigned>(rng.below(4)));
  return access.post(probe.posted) ? probe.weight : 0.0;
}

}  // namespace bitrade
