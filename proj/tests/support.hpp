#pragma once

// Shared fixtures: random table generators, reference implementations written
// straight from the textbook definitions, and small comparison helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tabrank/table.hpp"

namespace testing_support {

using tabrank::Column;
using tabrank::DataTable;

// |a - b| <= rel * max(|a|, |b|), with values below `zero` treated as 0.
inline bool close_rel(double a, double b, double rel, double zero = 1e-15) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale < zero) return true;
  return std::abs(a - b) <= rel * scale;
}

struct TableShape {
  std::size_t rows = 60;
  std::size_t numeric = 2;
  std::size_t categorical = 2;
  std::size_t max_categories = 3;
  double positive_rate = 0.3;
  double missing_rate = 0.0;
  bool integer_values = false;  // draw numeric cells from a small integer range (forces ties)
};

// Random mixed-type table with target "y" (labels "no" / "yes", positive "yes").
// Both classes are always present when rows >= 2.
inline DataTable random_table(std::uint64_t seed, const TableShape& s) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Column> cols;
  std::vector<std::string> y(s.rows);
  for (std::size_t i = 0; i < s.rows; ++i) y[i] = unit(gen) < s.positive_rate ? "yes" : "no";
  if (s.rows >= 2) {
    y[0] = "yes";
    y[1] = "no";
  }
  for (std::size_t f = 0; f < s.numeric; ++f) {
    std::vector<double> v(s.rows);
    std::vector<std::uint8_t> miss(s.rows, 0);
    for (std::size_t i = 0; i < s.rows; ++i) {
      const double shift = y[i] == "yes" ? 0.7 * static_cast<double>(f % 3) : 0.0;
      v[i] = s.integer_values ? std::floor(unit(gen) * 5.0 + shift) : normal(gen) + shift;
      if (i >= 2 && unit(gen) < s.missing_rate) miss[i] = 1;
    }
    cols.push_back(Column::numeric("n" + std::to_string(f), std::move(v), std::move(miss)));
  }
  for (std::size_t f = 0; f < s.categorical; ++f) {
    const std::size_t k = 2 + static_cast<std::size_t>(unit(gen) * static_cast<double>(s.max_categories - 1));
    std::vector<std::string> v(s.rows);
    std::vector<std::uint8_t> miss(s.rows, 0);
    for (std::size_t i = 0; i < s.rows; ++i) {
      std::size_t c = static_cast<std::size_t>(unit(gen) * static_cast<double>(k));
      if (y[i] == "yes" && unit(gen) < 0.3) c = 0;
      v[i] = std::string(1, static_cast<char>('a' + std::min(c, k - 1)));
      if (i >= 2 && unit(gen) < s.missing_rate) miss[i] = 1;
    }
    cols.push_back(Column::categorical("c" + std::to_string(f), v, std::move(miss)));
  }
  cols.push_back(Column::categorical("y", y, {}, std::vector<std::string>{"no", "yes"}));
  return DataTable(std::move(cols), "y", "yes");
}

namespace oracle {

// Counts of (feature value, class) pairs, expanded into one record per
// observation and tallied again from scratch.
struct Sample {
  std::vector<std::pair<int, int>> records;
};

inline Sample expand(const std::vector<std::vector<std::uint64_t>>& m) {
  Sample s;
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < m[r].size(); ++c)
      for (std::uint64_t k = 0; k < m[r][c]; ++k) s.records.emplace_back(static_cast<int>(r), static_cast<int>(c));
  return s;
}

inline double log2_safe(double p) { return p > 0 ? std::log(p) / std::log(2.0) : 0.0; }

// I(X; Y) = sum p(x, y) log p(x, y) / (p(x) p(y)). Counts are tallied as
// integers so each ratio is rounded once.
inline double mutual_information(const Sample& s) {
  std::map<int, double> cx, cy;
  std::map<std::pair<int, int>, double> cxy;
  for (auto [x, y] : s.records) {
    cx[x] += 1;
    cy[y] += 1;
    cxy[{x, y}] += 1;
  }
  const double n = static_cast<double>(s.records.size());
  double mi = 0.0;
  for (auto [xy, c] : cxy) mi += (c / n) * log2_safe(c * n / (cx[xy.first] * cy[xy.second]));
  return mi;
}

inline double feature_entropy(const Sample& s) {
  std::map<int, double> px;
  const double n = static_cast<double>(s.records.size());
  for (auto [x, y] : s.records) px[x] += 1.0;
  double h = 0.0;
  for (auto [x, c] : px) h -= (c / n) * log2_safe(c / n);
  return h;
}

inline double info_gain(const Sample& s) { return mutual_information(s); }

inline double gain_ratio(const Sample& s) {
  const double hx = feature_entropy(s);
  return hx == 0.0 ? 0.0 : mutual_information(s) / hx;
}

// Gini(Y) - sum_x p(x) Gini(Y | x), Gini = probability two draws disagree.
// The final subtraction cancels badly in floating point, so the probabilities
// are kept as exact fractions and rounded once at the end.
struct Fraction {
  __int128 num = 0, den = 1;
  Fraction(__int128 n = 0, __int128 d = 1) : num(n), den(d) { reduce(); }
  void reduce() {
    __int128 a = num < 0 ? -num : num, b = den;
    while (b) a %= b, std::swap(a, b);
    if (a > 1) num /= a, den /= a;
  }
  Fraction operator+(const Fraction& o) const { return {num * o.den + o.num * den, den * o.den}; }
  Fraction operator-(const Fraction& o) const { return {num * o.den - o.num * den, den * o.den}; }
  Fraction operator*(const Fraction& o) const { return {num * o.num, den * o.den}; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline double gini_gain(const Sample& s) {
  const auto n = static_cast<__int128>(s.records.size());
  auto disagreement = [](const std::vector<int>& ys) {
    __int128 same = 0;
    for (int a : ys)
      for (int b : ys) same += a == b;
    const auto m = static_cast<__int128>(ys.size());
    return Fraction(1) - Fraction(same, m * m);
  };
  std::vector<int> all;
  std::map<int, std::vector<int>> by_x;
  for (auto [x, y] : s.records) {
    all.push_back(y);
    by_x[x].push_back(y);
  }
  Fraction cond;
  for (const auto& [x, ys] : by_x) cond = cond + Fraction(static_cast<__int128>(ys.size()), n) * disagreement(ys);
  return (disagreement(all) - cond).value();
}

// Pearson statistic over observed values and classes only.
inline std::optional<double> chi_square(const Sample& s) {
  std::map<int, double> rx, cy;
  std::map<std::pair<int, int>, double> o;
  for (auto [x, y] : s.records) {
    rx[x] += 1;
    cy[y] += 1;
    o[{x, y}] += 1;
  }
  if (rx.size() < 2 || cy.size() < 2) return std::nullopt;
  const double n = static_cast<double>(s.records.size());
  double chi = 0.0;
  for (auto [x, a] : rx)
    for (auto [y, b] : cy) {
      const double e = a * b / n;
      const double d = o[{x, y}] - e;
      chi += d * d / e;
    }
  return chi;
}

// ReliefF straight from its definition: for each row, sort every other row
// by distance (stable on index), take the first k of each class.
inline std::vector<double> relieff(const DataTable& t, std::size_t k) {
  const auto feats = t.feature_indices();
  const auto y = t.labels();
  const std::size_t n = t.row_count(), nf = feats.size();
  std::vector<double> lo(nf, 0), hi(nf, 0);
  for (std::size_t f = 0; f < nf; ++f) {
    const Column& c = t.column(feats[f]);
    if (!c.is_numeric()) continue;
    lo[f] = hi[f] = c.number(0);
    for (std::size_t i = 0; i < n; ++i) {
      lo[f] = std::min(lo[f], c.number(i));
      hi[f] = std::max(hi[f], c.number(i));
    }
  }
  auto diff = [&](std::size_t f, std::size_t a, std::size_t b) {
    const Column& c = t.column(feats[f]);
    if (c.is_numeric()) {
      if (!(hi[f] > lo[f])) return 0.0;
      // Scale each value to [0, 1] first so exact distance ties survive rounding.
      const double r = hi[f] - lo[f];
      return std::abs((c.number(a) - lo[f]) / r - (c.number(b) - lo[f]) / r);
    }
    return c.category(a) == c.category(b) ? 0.0 : 1.0;
  };
  std::vector<double> w(nf, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> others;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double d = 0;
      for (std::size_t f = 0; f < nf; ++f) d += diff(f, i, j);
      others.emplace_back(d, j);
    }
    std::stable_sort(others.begin(), others.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::size_t> hits, misses;
    for (auto [d, j] : others) {
      if (y[j] == y[i] && hits.size() < k) hits.push_back(j);
      if (y[j] != y[i] && misses.size() < k) misses.push_back(j);
    }
    for (std::size_t f = 0; f < nf; ++f) {
      for (auto j : hits) w[f] -= diff(f, i, j) / (static_cast<double>(n) * static_cast<double>(hits.size()));
      for (auto j : misses) w[f] += diff(f, i, j) / (static_cast<double>(n) * static_cast<double>(misses.size()));
    }
  }
  return w;
}

// Fraction of (positive, negative) pairs ordered correctly, ties counting half.
inline double pairwise_auc(const std::vector<std::uint8_t>& y, const std::vector<double>& s) {
  double good = 0, pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (!y[i] || y[j]) continue;
      pairs += 1;
      if (s[i] > s[j]) good += 1;
      else if (s[i] == s[j]) good += 0.5;
    }
  return good / pairs;
}

}  // namespace oracle
}  // namespace testing_support
