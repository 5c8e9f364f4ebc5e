#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "../rng.hpp"
#include "../table.hpp"
#include "linear.hpp"
#include "params.hpp"
#include "tree.hpp"

namespace tabrank {

inline nlohmann::json trees_to_json(const std::vector<Tree>& trees) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& t : trees) a.push_back(t.to_json());
  return a;
}
inline std::vector<Tree> trees_from_json(const nlohmann::json& j) {
  std::vector<Tree> out;
  for (const auto& t : j) out.push_back(Tree::from_json(t));
  return out;
}

// Bagged CART trees; probability is the mean leaf positive fraction.
struct ForestModel {
  std::vector<Tree> trees;

  double probability(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
  }
};

inline std::size_t forest_max_features(const ForestParams& p, std::size_t width) {
  if (p.max_features > 0) return std::min<std::size_t>(static_cast<std::size_t>(p.max_features), width);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(width)))));
}

// Tree t draws its bootstrap sample and split features from a generator
// seeded by (seed, t), so trees are independent of fitting order.
inline ForestModel fit_random_forest(const EncodedMatrix& x, std::span<const std::uint8_t> y, const ForestParams& p,
                                     std::uint64_t seed) {
  ForestModel m;
  TreeLimits limits{static_cast<std::size_t>(p.max_depth), static_cast<std::size_t>(p.min_leaf),
                    forest_max_features(p, x.cols)};
  std::vector<double> w(x.rows);
  for (int t = 0; t < p.trees; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    if (p.bootstrap) {
      std::fill(w.begin(), w.end(), 0.0);
      for (std::size_t i = 0; i < x.rows; ++i) w[rng.index(x.rows)] += 1.0;
    } else {
      std::fill(w.begin(), w.end(), 1.0);
    }
    m.trees.push_back(fit_classification_tree(x, y, w, limits, &rng));
  }
  return m;
}

// Gradient boosting on binary log-loss: F = F0 + lr * sum of regression
// trees, each fitted to the residuals y - p with Newton leaf values
// sum(r) / sum(p (1 - p)).
struct BoostedModel {
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;

  double margin(std::span<const double> x) const {
    double f = base_score;
    for (const auto& t : trees) f += learning_rate * t.predict(x);
    return f;
  }
  double probability(std::span<const double> x) const { return sigmoid(margin(x)); }
};

inline BoostedModel fit_gradient_boosting(const EncodedMatrix& x, std::span<const std::uint8_t> y,
                                          const BoostingParams& p) {
  const std::size_t n = x.rows;
  double pos = 0.0;
  for (auto v : y) pos += v;
  BoostedModel m;
  m.learning_rate = p.learning_rate;
  m.base_score = std::log(pos / (static_cast<double>(n) - pos));
  std::vector<double> f(n, m.base_score), prob(n), resid(n);
  const TreeLimits limits{static_cast<std::size_t>(p.max_depth), static_cast<std::size_t>(p.min_leaf), 0};
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (int round = 0; round < p.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = sigmoid(f[i]);
      resid[i] = (y[i] ? 1.0 : 0.0) - prob[i];
    }
    SquaredErrorCriterion crit{resid};
    auto leaf = [&](std::span<const std::size_t> rows) {
      double num = 0.0, den = 0.0;
      for (auto r : rows) {
        num += resid[r];
        den += prob[r] * (1.0 - prob[r]);
      }
      if (den < 1e-12) den = 1e-12;
      return std::clamp(num / den, -20.0, 20.0);
    };
    Tree t = build_tree(x, all, crit, leaf, limits);
    for (std::size_t i = 0; i < n; ++i) f[i] += p.learning_rate * t.predict(x.row(i));
    m.trees.push_back(std::move(t));
  }
  return m;
}

// Discrete AdaBoost (SAMME, two classes) over weighted Gini stumps. Each
// stump votes +1 / -1 with weight alpha = log((1 - err) / err); the
// probability is sigmoid(2 * sum(alpha h) / sum(alpha)).
struct AdaBoostModel {
  std::vector<Tree> stumps;
  std::vector<double> alphas;

  static double vote(const Tree& t, std::span<const double> x) { return t.predict(x) >= 0.5 ? 1.0 : -1.0; }

  double probability(std::span<const double> x) const {
    double s = 0.0, total = 0.0;
    for (std::size_t k = 0; k < stumps.size(); ++k) {
      s += alphas[k] * vote(stumps[k], x);
      total += alphas[k];
    }
    return sigmoid(2.0 * s / total);
  }
};

inline AdaBoostModel fit_adaboost(const EncodedMatrix& x, std::span<const std::uint8_t> y, const AdaBoostParams& p) {
  const std::size_t n = x.rows;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  const TreeLimits stump{1, 1, 0};
  constexpr double kMinError = 1e-10;
  AdaBoostModel m;
  for (int round = 0; round < p.rounds; ++round) {
    Tree t = fit_classification_tree(x, y, w, stump);
    std::vector<std::uint8_t> wrong(n);
    double err = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wrong[i] = (AdaBoostModel::vote(t, x.row(i)) > 0) != (y[i] != 0);
      if (wrong[i]) err += w[i];
      total += w[i];
    }
    err /= total;
    if (err >= 0.5) {
      // No better than chance: keep the first stump so the model is usable.
      if (m.stumps.empty()) {
        m.stumps.push_back(std::move(t));
        m.alphas.push_back(1.0);
      }
      break;
    }
    const double e = std::max(err, kMinError);
    const double alpha = std::log((1.0 - e) / e);
    m.stumps.push_back(std::move(t));
    m.alphas.push_back(alpha);
    if (err <= kMinError) break;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (wrong[i]) w[i] *= std::exp(alpha);
      sum += w[i];
    }
    for (auto& v : w) v /= sum;
  }
  return m;
}

}  // namespace tabrank
