#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <json.hpp>

#include "../rng.hpp"
#include "../table.hpp"

namespace tabrank {

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // rows with x[feature] <= threshold go left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // leaf output
};

// Binary decision tree over encoded rows, stored as a flat node array with the
// root at index 0.
class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
      const auto& n = nodes_[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[i].value;
  }

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const { return depth_from(0); }

  nlohmann::json to_json() const {
    nlohmann::json f = nlohmann::json::array(), t = nlohmann::json::array(), l = nlohmann::json::array(),
                   r = nlohmann::json::array(), v = nlohmann::json::array();
    for (const auto& n : nodes_) {
      f.push_back(n.feature);
      t.push_back(n.threshold);
      l.push_back(n.left);
      r.push_back(n.right);
      v.push_back(n.value);
    }
    return {{"feature", f}, {"threshold", t}, {"left", l}, {"right", r}, {"value", v}};
  }

  static Tree from_json(const nlohmann::json& j) {
    const auto f = j.at("feature").get<std::vector<std::int32_t>>();
    const auto t = j.at("threshold").get<std::vector<double>>();
    const auto l = j.at("left").get<std::vector<std::int32_t>>();
    const auto r = j.at("right").get<std::vector<std::int32_t>>();
    const auto v = j.at("value").get<std::vector<double>>();
    std::vector<TreeNode> nodes(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) nodes[i] = {f[i], t[i], l[i], r[i], v[i]};
    return Tree(std::move(nodes));
  }

 private:
  std::size_t depth_from(std::size_t i) const {
    if (nodes_[i].feature < 0) return 0;
    return 1 + std::max(depth_from(static_cast<std::size_t>(nodes_[i].left)),
                        depth_from(static_cast<std::size_t>(nodes_[i].right)));
  }

  std::vector<TreeNode> nodes_;
};

struct TreeLimits {
  std::size_t max_depth = 12;
  std::size_t min_leaf = 1;
  // Features examined per split; 0 or >= width means all, in column order.
  std::size_t max_features = 0;
};

// Weighted Gini impurity for binary classification. Row stats: weight of
// class 0 and class 1.
struct GiniCriterion {
  static constexpr std::size_t kStats = 2;
  std::span<const std::uint8_t> y;
  std::span<const double> w;

  void add(std::size_t row, double* s) const { s[y[row] ? 1 : 0] += w[row]; }
  // Weighted impurity (total weight * Gini).
  static double cost(const double* s) {
    const double n = s[0] + s[1];
    if (n <= 0.0) return 0.0;
    return n - (s[0] * s[0] + s[1] * s[1]) / n;
  }
  static bool pure(const double* s) { return s[0] <= 0.0 || s[1] <= 0.0; }
};

// Squared error on a real target. Row stats: count, sum, sum of squares.
struct SquaredErrorCriterion {
  static constexpr std::size_t kStats = 3;
  std::span<const double> target;

  void add(std::size_t row, double* s) const {
    const double v = target[row];
    s[0] += 1.0;
    s[1] += v;
    s[2] += v * v;
  }
  static double cost(const double* s) {
    if (s[0] <= 0.0) return 0.0;
    return std::max(0.0, s[2] - s[1] * s[1] / s[0]);
  }
  static bool pure(const double* s) { return cost(s) <= 1e-12 * std::max(1.0, s[2]); }
};

// CART builder. Splits minimize the summed child cost; numeric thresholds sit
// halfway between adjacent distinct values. A node becomes a leaf when it is
// pure, at max depth, too small to give two children of min_leaf rows, or has
// no feature with two distinct values. `leaf_value` maps a node's rows to its
// output.
template <typename Criterion, typename LeafFn>
Tree build_tree(const EncodedMatrix& x, std::vector<std::size_t> rows, const Criterion& crit, LeafFn&& leaf_value,
                const TreeLimits& limits, Rng* rng = nullptr) {
  constexpr std::size_t K = Criterion::kStats;
  std::vector<TreeNode> nodes;
  const std::size_t width = x.cols;
  const bool sample = limits.max_features > 0 && limits.max_features < width;

  struct Pending {
    std::size_t node;
    std::size_t begin, end;
    std::size_t depth;
  };
  std::vector<Pending> stack;
  nodes.push_back({});
  stack.push_back({0, 0, rows.size(), 0});

  std::vector<std::pair<double, std::size_t>> sorted;
  std::vector<std::size_t> features(width);
  std::iota(features.begin(), features.end(), std::size_t{0});

  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    const std::span<const std::size_t> node_rows(rows.data() + p.begin, p.end - p.begin);
    const std::size_t m = node_rows.size();
    double total[K] = {};
    for (auto r : node_rows) crit.add(r, total);

    auto make_leaf = [&] {
      nodes[p.node].feature = -1;
      nodes[p.node].value = leaf_value(node_rows);
    };
    if (p.depth >= limits.max_depth || m < 2 * limits.min_leaf || Criterion::pure(total)) {
      make_leaf();
      continue;
    }

    if (sample) {
      for (std::size_t i = 0; i < width; ++i) features[i] = i;
      rng->shuffle(features);
    }
    std::size_t examined = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    std::int64_t best_feature = -1;
    double best_threshold = 0.0;

    for (std::size_t fi = 0; fi < width; ++fi) {
      if (sample && examined >= limits.max_features) break;
      const std::size_t f = features[fi];
      sorted.clear();
      for (auto r : node_rows) sorted.emplace_back(x.at(r, f), r);
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front().first == sorted.back().first) continue;  // constant here
      ++examined;
      double left[K] = {};
      for (std::size_t i = 0; i + 1 < m; ++i) {
        crit.add(sorted[i].second, left);
        if (sorted[i].first == sorted[i + 1].first) continue;
        if (i + 1 < limits.min_leaf || m - i - 1 < limits.min_leaf) continue;
        double right[K];
        for (std::size_t k = 0; k < K; ++k) right[k] = total[k] - left[k];
        const double c = Criterion::cost(left) + Criterion::cost(right);
        if (c < best_cost) {
          best_cost = c;
          best_feature = static_cast<std::int64_t>(f);
          const double a = sorted[i].first, b = sorted[i + 1].first;
          double mid = a + (b - a) / 2.0;
          if (!(mid < b)) mid = a;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) {
      make_leaf();
      continue;
    }
    // Partition rows in place, preserving relative order on each side.
    auto mid_it = std::stable_partition(rows.begin() + static_cast<std::ptrdiff_t>(p.begin),
                                        rows.begin() + static_cast<std::ptrdiff_t>(p.end), [&](std::size_t r) {
                                          return x.at(r, static_cast<std::size_t>(best_feature)) <= best_threshold;
                                        });
    const std::size_t split = static_cast<std::size_t>(mid_it - rows.begin());
    const auto li = static_cast<std::int32_t>(nodes.size());
    nodes.push_back({});
    const auto ri = static_cast<std::int32_t>(nodes.size());
    nodes.push_back({});
    nodes[p.node].feature = static_cast<std::int32_t>(best_feature);
    nodes[p.node].threshold = best_threshold;
    nodes[p.node].left = li;
    nodes[p.node].right = ri;
    // Right first so the left subtree is expanded first.
    stack.push_back({static_cast<std::size_t>(ri), split, p.end, p.depth + 1});
    stack.push_back({static_cast<std::size_t>(li), p.begin, split, p.depth + 1});
  }
  return Tree(std::move(nodes));
}

// Classification tree whose leaves hold the weighted positive fraction.
inline Tree fit_classification_tree(const EncodedMatrix& x, std::span<const std::uint8_t> y,
                                    std::span<const double> weights, const TreeLimits& limits, Rng* rng = nullptr) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < x.rows; ++i)
    if (weights[i] > 0.0) rows.push_back(i);
  GiniCriterion crit{y, weights};
  auto leaf = [&](std::span<const std::size_t> rs) {
    double pos = 0.0, tot = 0.0;
    for (auto r : rs) {
      tot += weights[r];
      if (y[r]) pos += weights[r];
    }
    return tot > 0.0 ? pos / tot : 0.5;
  };
  return build_tree(x, std::move(rows), crit, leaf, limits, rng);
}

}  // namespace tabrank
