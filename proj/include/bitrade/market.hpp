#pragma once

#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bitrade/core.hpp"
#include "bitrade/environment.hpp"

namespace bitrade {

/// What a learner may do with the market: post a pair (consuming one round)
/// and read back the one-bit outcome.
template <class A>
concept RoundAccess = requires(A a, const A ca, PricePair x) {
  { a.post(x) } -> std::same_as<bool>;
  { ca.rounds_consumed() } -> std::convertible_to<std::uint64_t>;
  { ca.rounds_remaining() } -> std::convertible_to<std::uint64_t>;
};

class HorizonExhausted : public std::runtime_error {
 public:
  HorizonExhausted() : std::runtime_error("horizon too small for schedule") {}
};

/// The round-by-round interaction with an environment over a fixed horizon.
/// Records every round; the realized valuations are stored for metrics only
/// and are not reachable through the RoundAccess surface.
class Market {
 public:
  Market(const Environment& env, std::uint64_t horizon) : env_(&env), horizon_(horizon) {
    if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
    if (env.capacity() != 0 && env.capacity() < horizon)
      throw std::invalid_argument("fixed sequence shorter than the horizon");
    records_.reserve(horizon);
    vals_.reserve(horizon);
  }

  bool post(PricePair x) {
    if (records_.size() >= horizon_) throw HorizonExhausted();
    const std::uint64_t t = records_.size() + 1;
    const Valuation v = env_->next_round(t);
    const bool tr = traded(env_->observe(v, x));
    records_.push_back(make_record(t, v, x));
    vals_.push_back(v);
    return tr;
  }

  std::uint64_t rounds_consumed() const { return records_.size(); }
  std::uint64_t rounds_remaining() const { return horizon_ - records_.size(); }
  std::uint64_t horizon() const { return horizon_; }

  const std::vector<RoundRecord>& records() const { return records_; }
  const std::vector<Valuation>& valuations() const { return vals_; }

 private:
  const Environment* env_;
  std::uint64_t horizon_;
  std::vector<RoundRecord> records_;
  std::vector<Valuation> vals_;
};

/// Feedback-only view of a Market handed to learners.
class MarketView {
 public:
  explicit MarketView(Market& m) : market_(&m) {}

  bool post(PricePair x) { return market_->post(x); }
  std::uint64_t rounds_consumed() const { return market_->rounds_consumed(); }
  std::uint64_t rounds_remaining() const { return market_->rounds_remaining(); }

 private:
  Market* market_;
};

static_assert(RoundAccess<Market>);
static_assert(RoundAccess<MarketView>);

}  // namespace bitrade
