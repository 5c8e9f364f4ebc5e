#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "table.hpp"

namespace tabrank {

// Assignment of every row to one of k folds.
struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;

  std::vector<std::size_t> test_rows(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == fold) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> train_rows(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] != fold) out.push_back(i);
    return out;
  }

  friend bool operator==(const FoldPlan&, const FoldPlan&) = default;
};

// Stratified k-fold split: the members of each class are shuffled with a
// seeded generator and dealt round-robin, continuing the deal from where the
// previous class stopped so overall fold sizes also differ by at most one.
inline FoldPlan stratified_kfold(std::span<const std::uint8_t> labels, std::size_t k, std::uint64_t seed,
                                 std::vector<std::string>* warnings = nullptr) {
  if (k < 2) throw BoundsError("fold count must be at least 2, got " + std::to_string(k));
  if (k > labels.size())
    throw BoundsError("fold count " + std::to_string(k) + " exceeds row count " + std::to_string(labels.size()));
  FoldPlan plan{k, std::vector<std::size_t>(labels.size(), 0)};
  std::size_t offset = 0;
  for (std::uint8_t cls : {std::uint8_t{0}, std::uint8_t{1}}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if ((labels[i] != 0) == (cls != 0)) members.push_back(i);
    if (members.empty()) continue;
    if (members.size() < k && warnings)
      warnings->push_back("class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                          " rows, fewer than " + std::to_string(k) + " folds; some folds lack it");
    Rng rng(derive_seed(seed, {cls}));
    rng.shuffle(members);
    for (std::size_t j = 0; j < members.size(); ++j) plan.assignments[members[j]] = (offset + j) % k;
    offset = (offset + members.size()) % k;
  }
  return plan;
}

struct SmoteConfig {
  std::size_t k_neighbors = 5;
  // Minority count is raised to at least ceil(target_ratio * majority count).
  double target_ratio = 1.0;
};

namespace detail {

// Indices (into `points`) of the k nearest other points, ties broken by index.
inline std::vector<std::vector<std::size_t>> nearest_within(const EncodedMatrix& m, std::span<const std::size_t> points,
                                                            std::size_t k) {
  std::vector<std::vector<std::size_t>> out(points.size());
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t a = 0; a < points.size(); ++a) {
    dist.clear();
    auto ra = m.row(points[a]);
    for (std::size_t b = 0; b < points.size(); ++b) {
      if (a == b) continue;
      auto rb = m.row(points[b]);
      double d = 0.0;
      for (std::size_t j = 0; j < m.cols; ++j) d += (ra[j] - rb[j]) * (ra[j] - rb[j]);
      dist.emplace_back(d, b);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t j = 0; j < k; ++j) out[a].push_back(dist[j].second);
  }
  return out;
}

}  // namespace detail

// Synthetic minority oversampling for mixed-type tables. Numeric fields of a
// synthetic row interpolate between a minority seed row and one of its k
// nearest minority neighbors; categorical fields take the most common value
// among those k neighbors (ties go to the seed's own value, then to the
// smallest category). Original rows are returned unchanged, followed by the
// synthetic rows (row id -1).
inline DataTable smote(const DataTable& table, const SmoteConfig& cfg, std::uint64_t seed,
                       std::vector<std::string>* warnings = nullptr) {
  if (table.has_missing_features()) throw PreconditionError("smote: table has missing cells; impute first");
  if (cfg.k_neighbors < 1) throw ConfigError("smote: k_neighbors must be positive");
  if (!(cfg.target_ratio > 0.0 && cfg.target_ratio <= 1.0)) throw ConfigError("smote: target_ratio must be in (0, 1]");
  const auto y = table.labels();
  std::size_t n_pos = 0;
  for (auto v : y) n_pos += v;
  const std::size_t n_neg = y.size() - n_pos;
  const std::uint8_t minority_label = n_pos <= n_neg ? 1 : 0;
  const std::size_t n_min = std::min(n_pos, n_neg), n_maj = std::max(n_pos, n_neg);
  const auto wanted = static_cast<std::size_t>(std::ceil(cfg.target_ratio * static_cast<double>(n_maj) - 1e-9));
  if (n_min >= wanted) return table;
  if (n_min < 2) throw ResampleError("smote: minority class has " + std::to_string(n_min) + " rows, needs at least 2");
  std::size_t k = cfg.k_neighbors;
  if (k > n_min - 1) {
    k = n_min - 1;
    if (warnings) warnings->push_back("smote: k_neighbors clamped to " + std::to_string(k));
  }
  const std::size_t synth = wanted - n_min;

  std::vector<std::size_t> minority;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] == minority_label) minority.push_back(i);
  const EncodedMatrix enc = encode_for_model(table, true);
  const auto neighbors = detail::nearest_within(enc, minority, k);

  // Categorical values depend only on the seed row, so compute them once per
  // minority row.
  const auto feats = table.feature_indices();
  std::vector<std::vector<std::int32_t>> cat_choice(minority.size());
  for (std::size_t a = 0; a < minority.size(); ++a) {
    for (auto ci : feats) {
      const Column& c = table.column(ci);
      if (!c.is_categorical()) continue;
      std::vector<std::size_t> votes(c.categories().size(), 0);
      for (auto b : neighbors[a]) ++votes[static_cast<std::size_t>(c.code(minority[b]))];
      const std::size_t top = *std::max_element(votes.begin(), votes.end());
      const auto own = c.code(minority[a]);
      std::int32_t pick = -1;
      if (votes[static_cast<std::size_t>(own)] == top) {
        pick = own;
      } else {
        for (std::size_t v = 0; v < votes.size(); ++v) {
          if (votes[v] != top) continue;
          if (pick < 0 || c.categories()[v] < c.categories()[static_cast<std::size_t>(pick)])
            pick = static_cast<std::int32_t>(v);
        }
      }
      cat_choice[a].push_back(pick);
    }
  }

  struct Draw {
    std::size_t seed_pos, neighbor_pos;
    double u;
  };
  Rng rng(seed);
  std::vector<Draw> draws(synth);
  for (auto& d : draws) {
    d.seed_pos = rng.index(minority.size());
    d.neighbor_pos = neighbors[d.seed_pos][rng.index(k)];
    d.u = rng.uniform();
  }

  std::vector<Column> cols;
  const std::string minority_name = minority_label ? table.positive_label() : table.negative_label();
  for (std::size_t ci = 0; ci < table.column_count(); ++ci) {
    const Column& c = table.column(ci);
    if (ci == *table.index_of(table.target_name())) {
      std::vector<std::int32_t> codes(c.codes().begin(), c.codes().end());
      codes.resize(c.size() + synth, *c.code_of(minority_name));
      cols.push_back(Column::from_codes(c.name(), c.categories(), std::move(codes)));
    } else if (c.is_numeric()) {
      std::vector<double> v(c.numbers().begin(), c.numbers().end());
      v.reserve(c.size() + synth);
      for (const auto& d : draws) {
        const double a = c.number(minority[d.seed_pos]), b = c.number(minority[d.neighbor_pos]);
        const double x = a + d.u * (b - a);
        v.push_back(std::clamp(x, std::min(a, b), std::max(a, b)));
      }
      cols.push_back(Column::numeric(c.name(), std::move(v)));
    } else {
      const auto slot = static_cast<std::size_t>(
          std::count_if(feats.begin(), feats.end(), [&](std::size_t f) { return f < ci && table.column(f).is_categorical(); }));
      std::vector<std::int32_t> codes(c.codes().begin(), c.codes().end());
      for (const auto& d : draws) codes.push_back(cat_choice[d.seed_pos][slot]);
      cols.push_back(Column::from_codes(c.name(), c.categories(), std::move(codes)));
    }
  }
  std::vector<std::int64_t> ids(table.row_ids().begin(), table.row_ids().end());
  ids.resize(ids.size() + synth, -1);
  return DataTable(std::move(cols), table.target_name(), table.positive_label(), std::move(ids));
}

}  // namespace tabrank
