#pragma once

// Trade arithmetic for a single round of posted-price bilateral trade, and the
// hindsight benchmark used to score a whole run.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

namespace bitrade {

/// Private values of the seller (s) and the buyer (b), both in [0,1].
struct Valuation {
  double s = 0.0;
  double b = 0.0;

  friend bool operator==(const Valuation&, const Valuation&) = default;
};

/// Prices posted to the seller (p) and to the buyer (q). A pair with p > q
/// subsidizes the trade by p - q.
struct PricePair {
  double p = 0.0;
  double q = 0.0;

  double gap() const { return p - q; }

  friend bool operator==(const PricePair&, const PricePair&) = default;
};

struct OneBit {
  bool traded = false;
};

struct TwoBit {
  bool seller_accepts = false;
  bool buyer_accepts = false;

  bool traded() const { return seller_accepts && buyer_accepts; }
};

using Feedback = std::variant<OneBit, TwoBit>;

inline bool traded(const Feedback& f) {
  return std::visit(
      [](const auto& v) {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, OneBit>)
          return v.traded;
        else
          return v.traded();
      },
      f);
}

/// One row of a run transcript.
struct RoundRecord {
  std::uint64_t t = 0;
  PricePair posted;
  bool traded = false;
  double gft = 0.0;
  double rev = 0.0;
};

inline bool trade_indicator(const Valuation& v, const PricePair& x) {
  return v.s <= x.p && x.q <= v.b;
}

inline double gft(const Valuation& v, const PricePair& x) {
  return trade_indicator(v, x) ? v.b - v.s : 0.0;
}

inline double revenue(const Valuation& v, const PricePair& x) {
  return trade_indicator(v, x) ? x.q - x.p : 0.0;
}

inline RoundRecord make_record(std::uint64_t t, const Valuation& v, const PricePair& x) {
  const bool tr = trade_indicator(v, x);
  return RoundRecord{t, x, tr, tr ? v.b - v.s : 0.0, tr ? x.q - x.p : 0.0};
}

/// Market subsidy accumulated over the records: minus the summed revenue.
inline double cumulative_violation(std::span<const RoundRecord> records) {
  double total = 0.0;
  for (const auto& r : records) total -= r.rev;
  return total;
}

inline double cumulative_gft(std::span<const RoundRecord> records) {
  double total = 0.0;
  for (const auto& r : records) total += r.gft;
  return total;
}

struct HindsightOptimum {
  double p_star = 0.0;
  double total = 0.0;
};

/// Sum of (b - s) over rounds with s <= p <= b, in index order.
inline double fixed_price_total(std::span<const Valuation> vals, double p) {
  double total = 0.0;
  for (const auto& v : vals)
    if (v.s <= p && p <= v.b) total += v.b - v.s;
  return total;
}

/// Best strongly budget-balanced fixed price in hindsight.
///
/// The objective is piecewise constant with breakpoints at the observed
/// values, so only those are candidates. A sweep over sorted candidates finds
/// the near-optimal ones; their totals are then recomputed by index-order
/// summation so the reported total is independent of the sweep's rounding.
/// Ties go to the smallest price.
inline HindsightOptimum best_fixed_price_hindsight(std::span<const Valuation> vals) {
  if (vals.empty()) throw std::invalid_argument("empty history");

  std::vector<double> candidates;
  candidates.reserve(2 * vals.size());
  struct Event {
    double at;
    double weight;
  };
  std::vector<Event> opens, closes;
  for (const auto& v : vals) {
    candidates.push_back(v.s);
    candidates.push_back(v.b);
    if (v.s <= v.b) {
      opens.push_back({v.s, v.b - v.s});
      closes.push_back({v.b, v.b - v.s});
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  auto by_at = [](const Event& a, const Event& b) { return a.at < b.at; };
  std::sort(opens.begin(), opens.end(), by_at);
  std::sort(closes.begin(), closes.end(), by_at);

  // fresh[k] marks the first candidate of each distinct trading set; later
  // candidates with the same set have identical totals and lose the tie.
  std::vector<long double> sweep(candidates.size());
  std::vector<bool> fresh(candidates.size(), false);
  long double running = 0.0L;
  std::size_t oi = 0, ci = 0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double c = candidates[k];
    const std::size_t before = oi + ci;
    while (oi < opens.size() && opens[oi].at <= c) running += opens[oi++].weight;
    while (ci < closes.size() && closes[ci].at < c) running -= closes[ci++].weight;
    sweep[k] = running;
    fresh[k] = k == 0 || oi + ci != before;
  }
  const long double best = *std::max_element(sweep.begin(), sweep.end());
  const long double slack = 1e-9L * (1.0L + std::abs(best));

  HindsightOptimum out{candidates.front(), -1.0};
  bool found = false;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (!fresh[k] || sweep[k] < best - slack) continue;
    const double total = fixed_price_total(vals, candidates[k]);
    if (!found || total > out.total) {
      out = {candidates[k], total};
      found = true;
    }
  }
  return out;
}

inline double regret(std::span<const Valuation> vals, std::span<const RoundRecord> records) {
  if (vals.size() != records.size())
    throw std::invalid_argument("regret: valuation and record sequences differ in length");
  return best_fixed_price_hindsight(vals).total - cumulative_gft(records);
}

}  // namespace bitrade
