#pragma once

// Valuation sources. Stochastic variants derive the round-t draw from
// (seed, t) alone, so next_round is a pure function and environments are
// shareable between threads once built.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bitrade/core.hpp"
#include "bitrade/random.hpp"

namespace bitrade {

struct SupportPoint {
  Valuation at;
  double mass = 0.0;
};

/// Finite-support distribution over [0,1]^2.
class DiscreteDistribution {
 public:
  static constexpr double kMassTolerance = 1e-12;

  DiscreteDistribution() = default;

  explicit DiscreteDistribution(std::vector<SupportPoint> support) : support_(std::move(support)) {
    if (support_.empty()) throw std::invalid_argument("discrete distribution: empty support");
    for (const auto& pt : support_) {
      if (!(pt.mass >= 0.0))
        throw std::invalid_argument("discrete distribution: negative mass");
      if (!in_unit(pt.at.s) || !in_unit(pt.at.b))
        throw std::invalid_argument("discrete distribution: support point outside [0,1]^2");
    }
    if (std::abs(total_mass() - 1.0) > kMassTolerance)
      throw std::invalid_argument("discrete distribution: masses do not sum to 1");
    cumulative_.reserve(support_.size());
    double run = 0.0;
    for (const auto& pt : support_) cumulative_.push_back(run += pt.mass);
  }

  static DiscreteDistribution point_mass(Valuation v) { return DiscreteDistribution({{v, 1.0}}); }

  const std::vector<SupportPoint>& support() const { return support_; }

  /// Neumaier-compensated sum of masses.
  double total_mass() const {
    double sum = 0.0, comp = 0.0;
    for (const auto& pt : support_) {
      const double t = sum + pt.mass;
      comp += std::abs(sum) >= std::abs(pt.mass) ? (sum - t) + pt.mass : (pt.mass - t) + sum;
      sum = t;
    }
    return sum + comp;
  }

  /// Inverse-CDF lookup for u in [0,1).
  const Valuation& sample(double u) const {
    const double target = u * cumulative_.back();
    std::size_t lo = 0, hi = cumulative_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (target < cumulative_[mid])
        hi = mid;
      else
        lo = mid + 1;
    }
    return support_[lo].at;
  }

 private:
  static bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

  std::vector<SupportPoint> support_;
  std::vector<double> cumulative_;
};

inline double exact_gft_expectation(const DiscreteDistribution& dist, const PricePair& x) {
  double total = 0.0;
  for (const auto& pt : dist.support()) total += pt.mass * gft(pt.at, x);
  return total;
}

inline double exact_rev_expectation(const DiscreteDistribution& dist, const PricePair& x) {
  double total = 0.0;
  for (const auto& pt : dist.support()) total += pt.mass * revenue(pt.at, x);
  return total;
}

/// P(trade) under the distribution.
inline double exact_trade_probability(const DiscreteDistribution& dist, const PricePair& x) {
  double total = 0.0;
  for (const auto& pt : dist.support())
    if (trade_indicator(pt.at, x)) total += pt.mass;
  return total;
}

/// Probability that both values fall in the square [q,p]^2, with the edges
/// the four-indicator inclusion-exclusion actually measures:
/// 1{s<=p,q<=b} - 1{s<=q,q<=b} - 1{s<=p,p<=b} + 1{s<=q,p<=b} = 1{q<s<=p, q<=b<p}.
inline double exact_square_probability(const DiscreteDistribution& dist, const PricePair& x) {
  double total = 0.0;
  for (const auto& pt : dist.support()) {
    const auto& v = pt.at;
    if (x.q < v.s && v.s <= x.p && x.q <= v.b && v.b < x.p) total += pt.mass;
  }
  return total;
}

enum class FeedbackMode { OneBit, TwoBit };

struct IndependentUniform {};

struct PointMass {
  Valuation at;
};

struct FixedSequence {
  std::vector<Valuation> rounds;
  bool cyclic = false;
};

class Environment {
 public:
  using Source = std::variant<IndependentUniform, PointMass, DiscreteDistribution, FixedSequence>;

  explicit Environment(Source source, std::uint64_t seed = 0,
                       FeedbackMode mode = FeedbackMode::OneBit)
      : source_(std::move(source)), seed_(seed), mode_(mode) {
    if (const auto* seq = std::get_if<FixedSequence>(&source_); seq && seq->rounds.empty())
      throw std::invalid_argument("fixed sequence: no rounds");
  }

  const Source& source() const { return source_; }
  std::uint64_t seed() const { return seed_; }
  FeedbackMode feedback_mode() const { return mode_; }

  /// Number of rounds this environment can serve, or 0 if unbounded.
  std::uint64_t capacity() const {
    if (const auto* seq = std::get_if<FixedSequence>(&source_); seq && !seq->cyclic)
      return seq->rounds.size();
    return 0;
  }

  /// Valuations of round t (1-based).
  Valuation next_round(std::uint64_t t) const {
    if (t == 0) throw std::invalid_argument("rounds are numbered from 1");
    return std::visit(
        [&](const auto& src) -> Valuation {
          using S = std::decay_t<decltype(src)>;
          if constexpr (std::is_same_v<S, IndependentUniform>) {
            return {to_unit(hash_words(seed_, t, 0)), to_unit(hash_words(seed_, t, 1))};
          } else if constexpr (std::is_same_v<S, PointMass>) {
            return src.at;
          } else if constexpr (std::is_same_v<S, DiscreteDistribution>) {
            return src.sample(to_unit(hash_words(seed_, t, 2)));
          } else {
            const auto n = src.rounds.size();
            if (!src.cyclic && t > n) throw std::out_of_range("fixed sequence exhausted");
            return src.rounds[(t - 1) % n];
          }
        },
        source_);
  }

  Feedback observe(const Valuation& v, const PricePair& x) const {
    if (mode_ == FeedbackMode::OneBit) return OneBit{trade_indicator(v, x)};
    return TwoBit{v.s <= x.p, x.q <= v.b};
  }

 private:
  Source source_;
  std::uint64_t seed_;
  FeedbackMode mode_;
};

/// Parses "s,b" lines; blank lines and lines starting with '#' are skipped.
inline std::vector<Valuation> parse_sequence(std::istream& in) {
  std::vector<Valuation> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    Valuation v;
    char comma = 0;
    if (!(row >> v.s >> comma >> v.b) || comma != ',' || v.s < 0.0 || v.s > 1.0 || v.b < 0.0 ||
        v.b > 1.0)
      throw std::runtime_error("sequence file line " + std::to_string(lineno) +
                               ": expected \"s,b\" with values in [0,1]");
    std::string rest;
    if (row >> rest)
      throw std::runtime_error("sequence file line " + std::to_string(lineno) +
                               ": trailing characters");
    out.push_back(v);
  }
  return out;
}

inline std::vector<Valuation> load_sequence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sequence file: " + path);
  return parse_sequence(in);
}

}  // namespace bitrade
