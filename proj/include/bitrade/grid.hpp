#pragma once

// Adaptive sub-diagonal price grid.
//
// Every node is the pair (p, q) = ((n+1)/(K 2^d), n/(K 2^d)) for an integer
// numerator n and depth d, so the forest is stored exactly as (d, n) and only
// converted to doubles when a price is posted. A split replaces (d, n) by its
// halves (d+1, 2n) and (d+1, 2n+1); the leaves always tile [0,1].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bitrade/core.hpp"
#include "bitrade/estimators.hpp"
#include "bitrade/market.hpp"

namespace bitrade {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct GridNode {
  int depth = 0;
  std::uint64_t numerator = 0;  ///< q = numerator / (K 2^depth)
  NodeId parent = kNoNode;
  NodeId left = kNoNode;   ///< (p - half, q)
  NodeId right = kNoNode;  ///< (p, q + half)

  bool is_leaf() const { return left == kNoNode; }
};

class GridForest {
 public:
  /// Largest depth for which K 2^d stays exactly representable.
  static constexpr int kMaxDenominatorBits = 53;

  explicit GridForest(std::uint64_t K) : K_(K) {
    if (K < 1) throw std::invalid_argument("grid: K must be >= 1");
    if (K >= (std::uint64_t{1} << kMaxDenominatorBits)) throw std::invalid_argument("grid: K too large");
    nodes_.reserve(K);
    for (std::uint64_t j = 0; j < K; ++j) nodes_.push_back(GridNode{0, j});
  }

  std::uint64_t K() const { return K_; }
  std::size_t size() const { return nodes_.size(); }
  const GridNode& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<GridNode>& nodes() const { return nodes_; }

  double denominator(int depth) const { return std::ldexp(static_cast<double>(K_), depth); }

  /// Interval [lower, upper] covered by the node.
  double lower(NodeId id) const {
    const auto& n = nodes_.at(id);
    return static_cast<double>(n.numerator) / denominator(n.depth);
  }
  double upper(NodeId id) const {
    const auto& n = nodes_.at(id);
    return static_cast<double>(n.numerator + 1) / denominator(n.depth);
  }

  /// Exact gap 2^-d / K, rounded once.
  double gap(NodeId id) const { return 1.0 / denominator(nodes_.at(id).depth); }

  /// The pair posted for this node: (upper, lower), with q raised by at most
  /// a few ulps when rounding would otherwise make p - q exceed the exact gap.
  PricePair pair(NodeId id) const {
    const double p = upper(id);
    double q = lower(id);
    const double den = denominator(nodes_.at(id).depth);
    double g = 1.0 / den;
    if (std::fma(g, den, -1.0) > 0.0) g = std::nextafter(g, 0.0);
    if (p - q > g) q = std::max(q, p - g);
    while (p - q > g) q = std::nextafter(q, 1.0);
    return {p, q};
  }

  /// Splits a leaf into (p - half, q) and (p, q + half).
  std::pair<NodeId, NodeId> split(NodeId id) {
    if (id >= nodes_.size()) throw std::out_of_range("grid: unknown node");
    if (!nodes_[id].is_leaf()) throw std::logic_error("grid: node already split");
    const GridNode parent = nodes_[id];
    if (parent.depth + 1 + bit_width(K_) > kMaxDenominatorBits)
      throw std::overflow_error("grid: maximum depth reached");
    const auto left = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(GridNode{parent.depth + 1, 2 * parent.numerator, id});
    nodes_.push_back(GridNode{parent.depth + 1, 2 * parent.numerator + 1, id});
    nodes_[id].left = left;
    nodes_[id].right = left + 1;
    ++splits_;
    return {left, left + 1};
  }

  /// The leaf whose interval holds a: lower <= a < upper, except that a = 1
  /// belongs to the last leaf.
  NodeId locate(double a) const {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("grid: locate outside [0,1]");
    const double k = static_cast<double>(K_);
    auto j = static_cast<std::uint64_t>(std::min(std::floor(a * k), k - 1.0));
    while (j > 0 && static_cast<double>(j) / k > a) --j;
    while (j + 1 < K_ && static_cast<double>(j + 1) / k <= a) ++j;
    auto id = static_cast<NodeId>(j);
    while (!nodes_[id].is_leaf()) {
      const auto& n = nodes_[id];
      const double mid = static_cast<double>(2 * n.numerator + 1) / denominator(n.depth + 1);
      id = a < mid ? n.left : n.right;
    }
    return id;
  }

  /// Leaves ordered by ascending q.
  std::vector<NodeId> leaves() const {
    std::vector<NodeId> out;
    for (NodeId r = 0; r < K_; ++r) collect(r, out);
    return out;
  }

  std::size_t leaf_count() const { return K_ + splits_; }
  std::size_t split_count() const { return splits_; }

  int max_leaf_depth() const {
    int d = 0;
    for (const auto& n : nodes_)
      if (n.is_leaf()) d = std::max(d, n.depth);
    return d;
  }

  /// Nodes on the root-to-leaf path through `leaf`, root first.
  std::vector<NodeId> path_to(NodeId leaf) const {
    std::vector<NodeId> out;
    for (NodeId id = leaf; id != kNoNode; id = nodes_.at(id).parent) out.push_back(id);
    std::reverse(out.begin(), out.end());
    return out;
  }

  /// "# K=<K>" header, then one leaf per line: "<depth> <numerator>".
  void write(std::ostream& out) const {
    out << "# K=" << K_ << '\n';
    for (NodeId id : leaves()) out << nodes_[id].depth << ' ' << nodes_[id].numerator << '\n';
  }

  /// Rebuilds a forest from its serialized leaf set.
  static GridForest read(std::istream& in) {
    std::string line;
    std::uint64_t K = 0;
    std::vector<std::pair<int, std::uint64_t>> leaves;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        if (line.rfind("# K=", 0) == 0) K = std::stoull(line.substr(4));
        continue;
      }
      std::istringstream row(line);
      int d = 0;
      std::uint64_t n = 0;
      if (!(row >> d >> n) || d < 0) throw std::runtime_error("grid: malformed leaf line: " + line);
      leaves.emplace_back(d, n);
    }
    if (K == 0) throw std::runtime_error("grid: missing K header");
    GridForest forest(K);
    for (const auto& [d, n] : leaves) {
      if (d >= 63 || (n >> d) >= K) throw std::runtime_error("grid: leaf outside the forest");
      auto id = static_cast<NodeId>(n >> d);
      for (int level = d - 1; level >= 0; --level) {
        if (forest.nodes_[id].is_leaf()) forest.split(id);
        id = ((n >> level) & 1U) ? forest.nodes_[id].right : forest.nodes_[id].left;
      }
    }
    if (forest.leaf_count() != leaves.size())
      throw std::runtime_error("grid: leaf set does not tile [0,1]");
    for (const auto& [d, n] : leaves) {
      auto id = static_cast<NodeId>(n >> d);
      for (int level = d - 1; level >= 0; --level)
        id = ((n >> level) & 1U) ? forest.nodes_[id].right : forest.nodes_[id].left;
      if (id == kNoNode || !forest.nodes_[id].is_leaf())
        throw std::runtime_error("grid: leaf set does not tile [0,1]");
    }
    return forest;
  }

 private:
  static int bit_width(std::uint64_t x) {
    int w = 0;
    while (x) {
      ++w;
      x >>= 1;
    }
    return w;
  }

  void collect(NodeId id, std::vector<NodeId>& out) const {
    const auto& n = nodes_[id];
    if (n.is_leaf()) {
      out.push_back(id);
      return;
    }
    collect(n.left, out);
    collect(n.right, out);
  }

  std::uint64_t K_;
  std::vector<GridNode> nodes_;
  std::size_t splits_ = 0;
};

/// ceil(x) that ignores upward rounding noise of relative size 1e-12.
inline std::uint64_t ceil_tolerant(double x) {
  return static_cast<std::uint64_t>(std::ceil(x - 1e-12 * std::max(1.0, std::abs(x))));
}

/// Number of levels examined by the stochastic construction:
/// ceil(log2(1/(alpha K))) + 1, and 1 when alpha K >= 1.
inline int grid_levels(std::uint64_t K, double alpha) {
  const double lg = std::log2(1.0 / (alpha * static_cast<double>(K)));
  return static_cast<int>(lg > 0.0 ? ceil_tolerant(lg) : 0) + 1;
}

/// Rounds per Prob.Est phase at level i (1-based): ceil((alpha K 2^{i-1})^-2).
inline std::uint64_t grid_phase_length(std::uint64_t K, double alpha, int level) {
  const double scale = alpha * static_cast<double>(K) * std::ldexp(1.0, level - 1);
  return ceil_tolerant(1.0 / (scale * scale));
}

struct GridBuild {
  GridForest forest;
  int levels = 0;              ///< M
  std::uint64_t rounds = 0;    ///< rounds spent in probability estimation
  std::size_t examined = 0;    ///< number of Prob.Est calls
};

/// Stochastic grid construction. Level i = depth + 1 runs over the nodes
/// created at the previous level; a node splits when its lower-confidence
/// square probability reaches alpha K 2^i. Children of a split at the last
/// level stay in the forest unexamined, so coverage is never lost.
template <RoundAccess Access>
GridBuild build_grid_stochastic(Access& access, std::uint64_t K, double alpha, double delta) {
  if (!(alpha > 0.0)) throw std::invalid_argument("grid: alpha must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("grid: delta must lie in (0,1)");

  GridBuild out{GridForest(K), grid_levels(K, alpha), 0, 0};
  const double nu = alpha * delta / 2.0;
  const double ak = alpha * static_cast<double>(K);

  std::vector<NodeId> level_nodes(K);
  for (NodeId j = 0; j < K; ++j) level_nodes[j] = j;

  for (int i = 1; i <= out.levels && !level_nodes.empty(); ++i) {
    const std::uint64_t L = grid_phase_length(K, alpha, i);
    const double threshold = ak * std::ldexp(1.0, i);
    std::vector<NodeId> next;
    for (NodeId id : level_nodes) {
      const ProbEstimate est = prob_est(access, out.forest.pair(id), L, nu);
      out.rounds += 4 * L;
      ++out.examined;
      if (est.xi >= threshold) {
        const auto [l, r] = out.forest.split(id);
        next.push_back(l);
        next.push_back(r);
      }
    }
    level_nodes = std::move(next);
  }
  return out;
}

}  // namespace bitrade
