#pragma once

// The finite-support family mu_0 ... mu_{N-1} used for the regret/violation
// lower bound. mu_0 is the unperturbed base; mu_k (k >= 1) moves eps of mass
// between neighbouring support points so that the diagonal exploitation point
// M_{k,k} gains 6*ell*eps of expected gain from trade.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitrade/core.hpp"
#include "bitrade/environment.hpp"

namespace bitrade {

struct HardInstanceParams {
  std::int64_t N = 2;
  double ell = 1.0 / 8.0;
  double Delta = 1.0 / 16.0;
  double g = 1.0 / 24.0;
  double eps = 0.0;
  double gamma1 = 0.0;
  double gamma5 = 0.5;
  double gamma6 = 0.0;

  /// Direct construction; eps < 0 selects the largest admissible eps = gamma1/3.
  static HardInstanceParams make(std::int64_t N, double g, double eps = -1.0,
                                 double ell = 1.0 / 8.0) {
    if (N < 2) throw std::invalid_argument("invalid instance parameters: N must be >= 2");
    HardInstanceParams h;
    h.N = N;
    h.ell = ell;
    h.Delta = ell / static_cast<double>(N);
    h.g = g;
    h.gamma1 = g / (4.0 * static_cast<double>(N + 1));
    h.gamma5 = 0.5;
    h.gamma6 = (1.0 - 4.0 * static_cast<double>(N + 1) * h.gamma1 - h.gamma5) / 4.0;
    h.eps = eps < 0.0 ? h.gamma1 / 3.0 : eps;
    return h;
  }

  /// Horizon-driven schedule: N = T^{1-beta}/200, g = T^{1-4beta/3}/24.
  /// N reaches 2 only for astronomically large T, hence make() for desk use.
  static HardInstanceParams from_horizon(double T, double beta) {
    const auto n = static_cast<std::int64_t>(std::floor(std::pow(T, 1.0 - beta) / 200.0));
    return make(n, std::pow(T, 1.0 - 4.0 * beta / 3.0) / 24.0);
  }

  double base_price() const { return (1.0 - ell) / 2.0; }

  /// Empty string when valid, otherwise the first violated condition.
  std::string check() const {
    if (N < 2) return "N must be >= 2";
    if (!(ell > 0.0 && 3.0 * ell < base_price())) return "ell must satisfy 0 < 3*ell < (1-ell)/2";
    if (!(g > 0.0)) return "g must be positive";
    if (!(eps > 0.0)) return "eps must be positive";
    if (eps > gamma1 / 3.0) return "eps exceeds gamma1/3";
    if (gamma6 < 0.0) return "gamma6 is negative";
    return {};
  }
};

struct LabeledMass {
  std::string label;
  SupportPoint point;
};

/// Support W1..W6 with the masses of mu_k, before any validity check.
///
/// W1/W2 are perturbed at indices (k, k+1) as displayed for the family. W3/W4
/// carry mu_0 masses mirrored in the index (mu_0(w3^i) = mu_0(w1^{N-i})), and
/// their perturbation uses the mirrored neighbour pair (k-1, k): that is the
/// placement for which the buyer-side exploitation index j = k collects the
/// +3*ell*eps bonus, symmetric to the seller side.
inline std::vector<LabeledMass> hard_instance_masses(const HardInstanceParams& h, std::int64_t k) {
  if (k < 0 || k >= h.N) throw std::invalid_argument("instance index k outside [0, N-1]");
  const double n = static_cast<double>(h.N);
  const double a = h.base_price();
  std::vector<LabeledMass> out;
  out.reserve(4 * static_cast<std::size_t>(h.N + 1) + 5);

  auto tag = [](int set, std::int64_t i) {
    return "w" + std::to_string(set) + "^" + std::to_string(i);
  };
  auto shift = [&](std::int64_t i, std::int64_t plus_at, std::int64_t minus_at) {
    if (k == 0) return 0.0;
    if (i == plus_at) return h.eps;
    if (i == minus_at) return -h.eps;
    return 0.0;
  };

  for (std::int64_t i = 0; i <= h.N; ++i) {
    const double x = a + static_cast<double>(i) * h.Delta;
    const double up = 2.0 * static_cast<double>(i) / (3.0 * n);
    out.push_back({tag(1, i), {{x, 1.0}, h.gamma1 * (1.0 + up) + shift(i, k, k + 1)}});
  }
  for (std::int64_t i = 0; i <= h.N; ++i) {
    const double x = a + static_cast<double>(i) * h.Delta;
    const double up = 2.0 * static_cast<double>(i) / (3.0 * n);
    out.push_back({tag(2, i), {{x, 1.0 - 3.0 * h.ell}, h.gamma1 * (1.0 - up) + shift(i, k + 1, k)}});
  }
  for (std::int64_t i = 0; i <= h.N; ++i) {
    const double x = a + static_cast<double>(i) * h.Delta;
    const double down = 2.0 * static_cast<double>(h.N - i) / (3.0 * n);
    out.push_back({tag(3, i), {{0.0, x}, h.gamma1 * (1.0 + down) + shift(i, k, k - 1)}});
  }
  for (std::int64_t i = 0; i <= h.N; ++i) {
    const double x = a + static_cast<double>(i) * h.Delta;
    const double down = 2.0 * static_cast<double>(h.N - i) / (3.0 * n);
    out.push_back(
        {tag(4, i), {{3.0 * h.ell, x}, h.gamma1 * (1.0 - down) + shift(i, k - 1, k)}});
  }
  out.push_back({"w5", {{a, (1.0 + h.ell) / 2.0}, h.gamma5}});
  const Valuation corners[] = {{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}};
  for (int c = 0; c < 4; ++c) out.push_back({"w6^" + std::to_string(c), {corners[c], h.gamma6}});
  return out;
}

/// mu_k as a validated distribution. Throws "invalid instance parameters"
/// naming the violated condition or the offending support point.
inline DiscreteDistribution build_hard_instance(const HardInstanceParams& h, std::int64_t k) {
  if (auto why = h.check(); !why.empty())
    throw std::invalid_argument("invalid instance parameters: " + why);
  auto labeled = hard_instance_masses(h, k);
  std::vector<SupportPoint> support;
  support.reserve(labeled.size());
  for (const auto& lm : labeled) {
    if (lm.point.mass < 0.0)
      throw std::invalid_argument("invalid instance parameters: negative mass at " + lm.label);
    support.push_back(lm.point);
  }
  try {
    return DiscreteDistribution(std::move(support));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("invalid instance parameters: ") + e.what());
  }
}

/// M_{i,j} = ((1-ell)/2 + i*Delta, (1-ell)/2 + j*Delta), 0 <= i,j <= N.
inline PricePair exploitation_point(const HardInstanceParams& h, std::int64_t i, std::int64_t j) {
  if (i < 0 || j < 0 || i > h.N || j > h.N)
    throw std::out_of_range("exploitation point index outside [0, N]");
  const double a = h.base_price();
  return {a + static_cast<double>(i) * h.Delta, a + static_cast<double>(j) * h.Delta};
}

/// Closed form of E_0[GFT(M_{i,j})] = c + gamma1 (1 - 2 ell)(i - j).
inline double base_gft_closed_form(const HardInstanceParams& h, std::int64_t i, std::int64_t j) {
  const double c = h.gamma6 + h.ell * h.gamma5 +
                   h.gamma1 * static_cast<double>(h.N + 2) * (1.0 - 2.0 * h.ell);
  return c + h.gamma1 * (1.0 - 2.0 * h.ell) * static_cast<double>(i - j);
}

/// E_k[GFT(M_{i,j})] - E_0[GFT(M_{i,j})] for k >= 1.
inline double perturbation_gain(const HardInstanceParams& h, std::int64_t k, std::int64_t i,
                                std::int64_t j) {
  if (k == 0) return 0.0;
  return 3.0 * h.ell * h.eps * (static_cast<double>(i == k) + static_cast<double>(j == k));
}

}  // namespace bitrade
