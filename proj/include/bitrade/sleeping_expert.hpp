#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bitrade/random.hpp"

namespace bitrade {

using ArmId = std::uint64_t;

/// Fixed-share exponential weights for sleeping experts, tracking a changing
/// comparator.
///
/// Each round: the stored weights are tilted by the last extended loss and
/// renormalized over the whole universe, mixed with the uniform distribution
/// at rate gamma, and projected onto the awake arms for play. Sleeping arms
/// receive the extended loss 1.
///
/// The universe is a declared capacity. Arms that have never been awake share
/// one loss history (loss 1 every round), hence one weight; they are kept as a
/// single aggregate (count, weight) and materialized on first waking, so the
/// cost per round depends only on the arms actually seen.
class DynamicSleepingExpert {
 public:
  DynamicSleepingExpert(std::uint64_t horizon, std::uint64_t universe_size)
      : horizon_(horizon), universe_(universe_size) {
    if (horizon < 1) throw std::invalid_argument("sleeping expert: horizon must be >= 1");
    if (universe_size < 1) throw std::invalid_argument("sleeping expert: universe must be non-empty");
    const double n = static_cast<double>(universe_size);
    eta_ = std::sqrt(std::log(n * static_cast<double>(horizon)) / static_cast<double>(horizon));
    gamma_ = 1.0 / static_cast<double>(horizon);
    dormant_count_ = universe_size;
    dormant_weight_ = 1.0 / n;
  }

  double eta() const { return eta_; }
  double gamma() const { return gamma_; }
  std::uint64_t horizon() const { return horizon_; }
  std::uint64_t universe_size() const { return universe_; }
  std::uint64_t rounds() const { return rounds_; }
  std::uint64_t materialized() const { return weights_.size(); }
  std::uint64_t dormant_count() const { return dormant_count_; }
  double dormant_weight() const { return dormant_weight_; }

  /// Current mixed weight of an arm (the dormant weight if never seen).
  double weight(ArmId a) const {
    const auto it = weights_.find(a);
    return it == weights_.end() ? dormant_weight_ : it->second;
  }

  /// Seen weights plus the dormant aggregate; 1 up to rounding.
  double total_weight() const {
    double sum = static_cast<double>(dormant_count_) * dormant_weight_;
    for (const auto& [a, w] : weights_) sum += w;
    return sum;
  }

  /// Play distribution over `awake`, aligned with it.
  std::vector<double> distribution(std::span<const ArmId> awake) const {
    check_awake(awake);
    std::vector<double> probs(awake.size());
    double z = 0.0;
    for (std::size_t i = 0; i < awake.size(); ++i) z += probs[i] = weight(awake[i]);
    for (auto& x : probs) x /= z;
    return probs;
  }

  ArmId select(std::span<const ArmId> awake, CounterRng& rng) const {
    const auto probs = distribution(awake);
    const double u = rng.uniform();
    double run = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      run += probs[i];
      if (u < run) return awake[i];
    }
    for (std::size_t i = probs.size(); i-- > 0;)
      if (probs[i] > 0.0) return awake[i];
    return awake.back();
  }

  /// Records losses (aligned with `awake`, each in [0,1]) and advances the
  /// weights to the next round.
  void update(std::span<const ArmId> awake, std::span<const double> losses) {
    check_awake(awake);
    if (losses.size() != awake.size())
      throw std::invalid_argument("sleeping expert: one loss per awake arm required");
    for (double l : losses)
      if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("sleeping expert: loss outside [0,1]");

    for (ArmId a : awake) {
      if (weights_.contains(a)) continue;
      if (dormant_count_ == 0) throw std::length_error("sleeping expert: universe capacity exceeded");
      weights_.emplace(a, dormant_weight_);
      --dormant_count_;
    }

    std::unordered_map<ArmId, double> loss;
    loss.reserve(awake.size());
    for (std::size_t i = 0; i < awake.size(); ++i) loss[awake[i]] = losses[i];

    const double sleep_tilt = std::exp(-eta_);
    double z = static_cast<double>(dormant_count_) * dormant_weight_ * sleep_tilt;
    for (auto& [a, w] : weights_) {
      const auto it = loss.find(a);
      w *= it == loss.end() ? sleep_tilt : std::exp(-eta_ * it->second);
      z += w;
    }
    const double floor = gamma_ / static_cast<double>(universe_);
    for (auto& [a, w] : weights_) w = floor + (1.0 - gamma_) * (w / z);
    dormant_weight_ = floor + (1.0 - gamma_) * (dormant_weight_ * sleep_tilt / z);
    ++rounds_;
  }

 private:
  static void check_awake(std::span<const ArmId> awake) {
    if (awake.empty()) throw std::invalid_argument("sleeping expert: empty awake set");
    std::unordered_set<ArmId> seen(awake.begin(), awake.end());
    if (seen.size() != awake.size()) throw std::invalid_argument("sleeping expert: duplicate awake arm");
  }

  std::uint64_t horizon_;
  std::uint64_t universe_;
  double eta_ = 0.0;
  double gamma_ = 0.0;
  std::map<ArmId, double> weights_;
  std::uint64_t dormant_count_ = 0;
  double dormant_weight_ = 0.0;
  std::uint64_t rounds_ = 0;
};

}  // namespace bitrade
