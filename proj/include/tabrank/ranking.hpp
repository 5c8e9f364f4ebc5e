#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "table.hpp"

namespace tabrank {

// v x c matrix of co-occurrence counts between the values of a feature (rows)
// and the classes (columns).
class ContingencyTable {
 public:
  ContingencyTable(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), counts_(rows * cols, 0) {}
  ContingencyTable(std::size_t rows, std::size_t cols, std::vector<std::uint64_t> counts)
      : rows_(rows), cols_(cols), counts_(std::move(counts)) {
    if (counts_.size() != rows * cols) throw ValidationError("contingency counts do not match its shape");
  }
  explicit ContingencyTable(const std::vector<std::vector<std::uint64_t>>& m)
      : rows_(m.size()), cols_(m.empty() ? 0 : m.front().size()) {
    for (const auto& r : m) {
      if (r.size() != cols_) throw ValidationError("ragged contingency table");
      counts_.insert(counts_.end(), r.begin(), r.end());
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::uint64_t at(std::size_t r, std::size_t c) const { return counts_[r * cols_ + c]; }
  std::uint64_t& at(std::size_t r, std::size_t c) { return counts_[r * cols_ + c]; }

  std::vector<std::uint64_t> row_totals() const {
    std::vector<std::uint64_t> t(rows_, 0);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t[r] += at(r, c);
    return t;
  }
  std::vector<std::uint64_t> col_totals() const {
    std::vector<std::uint64_t> t(cols_, 0);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t[c] += at(r, c);
    return t;
  }
  std::uint64_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }
  std::span<const std::uint64_t> row(std::size_t r) const { return {counts_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::uint64_t> counts_;
};

// Cross-tabulates two categorical columns over rows where both are present.
inline ContingencyTable crosstab(const Column& rows, const Column& cols) {
  if (!rows.is_categorical() || !cols.is_categorical())
    throw KindError("crosstab needs categorical columns ('" + rows.name() + "', '" + cols.name() + "')");
  ContingencyTable ct(rows.categories().size(), cols.categories().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows.is_missing(i) || cols.is_missing(i)) continue;
    ++ct.at(static_cast<std::size_t>(rows.code(i)), static_cast<std::size_t>(cols.code(i)));
  }
  return ct;
}

// Feature-by-class table against a 0/1 label vector (column 0 = negative).
inline ContingencyTable crosstab(const Column& feature, std::span<const std::uint8_t> labels) {
  if (!feature.is_categorical()) throw KindError("column '" + feature.name() + "' is numeric; discretize it first");
  ContingencyTable ct(feature.categories().size(), 2);
  for (std::size_t i = 0; i < feature.size(); ++i) {
    if (feature.is_missing(i)) continue;
    ++ct.at(static_cast<std::size_t>(feature.code(i)), labels[i] ? 1 : 0);
  }
  return ct;
}

// Shannon entropy in bits.
template <typename T>
double entropy(std::span<const T> counts) {
  double total = 0.0;
  for (auto c : counts) {
    if (c < T{}) throw DomainError("entropy: negative count");
    total += static_cast<double>(c);
  }
  if (total <= 0.0) throw DomainError("entropy: counts sum to zero");
  double h = 0.0;
  for (auto c : counts) {
    if (c == T{}) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

inline double entropy(std::initializer_list<double> counts) { return entropy(std::span<const double>(counts.begin(), counts.size())); }

namespace detail {

inline void require_nonempty(const ContingencyTable& ct) {
  if (ct.rows() == 0 || ct.cols() == 0 || ct.total() == 0) throw DomainError("empty contingency table");
}

// n * n_xy - n_x * n_y, exact before the final rounding.
inline double deviation(std::uint64_t n, std::uint64_t nxy, std::uint64_t nx, std::uint64_t ny) {
  const auto a = static_cast<unsigned __int128>(n) * nxy, b = static_cast<unsigned __int128>(nx) * ny;
  return a >= b ? static_cast<double>(a - b) : -static_cast<double>(b - a);
}

// (1 + e) ln(1 + e) - e for e >= -1; the series takes over near 0 where the
// closed form cancels.
inline double phi(double e) {
  if (e <= -1.0) return 1.0;
  if (std::abs(e) >= 0.125) return (1.0 + e) * std::log1p(e) - e;
  // sum_{k>=2} (-1)^k e^k / (k (k - 1))
  double term = e * e, sum = 0.0;
  for (int k = 2; k < 40; ++k) {
    sum += term / (k * (k - 1.0));
    term *= -e;
  }
  return sum;
}

}  // namespace detail

// I(X;Y) written as sum over cells of px * py * phi(e), with
// e = n * n_xy / (n_x * n_y) - 1 and phi(e) = (1 + e) ln(1 + e) - e >= 0.
// Every term is nonnegative and e comes from an exact integer difference, so
// nearly independent tables keep full relative precision. H(Y) - H(Y|X)
// cancels to an absolute error near 1e-16 instead.
inline double information_gain(const ContingencyTable& ct) {
  detail::require_nonempty(ct);
  const auto rt = ct.row_totals();
  const auto cls = ct.col_totals();
  const std::uint64_t n = ct.total();
  double mi = 0.0;
  for (std::size_t r = 0; r < ct.rows(); ++r) {
    if (rt[r] == 0) continue;
    for (std::size_t c = 0; c < ct.cols(); ++c) {
      if (cls[c] == 0) continue;
      const double expected = static_cast<double>(rt[r]) * static_cast<double>(cls[c]);
      const double e = detail::deviation(n, ct.at(r, c), rt[r], cls[c]) / expected;
      mi += expected * detail::phi(e);
    }
  }
  const double nd = static_cast<double>(n);
  return mi / (nd * nd) / std::log(2.0);
}

// Information gain divided by the entropy of the feature's own distribution;
// 0 when that entropy is 0.
inline double gain_ratio(const ContingencyTable& ct) {
  const double ig = information_gain(ct);
  const auto rows = ct.row_totals();
  const double split = entropy(std::span<const std::uint64_t>(rows));
  if (split == 0.0) return 0.0;
  return ig / split;
}

// Gini(Y) - sum_x p(x) Gini(Y | x) equals sum_x p(x) sum_y (p(y|x) - p(y))^2,
// evaluated from exact integer deviations.
inline double gini_gain(const ContingencyTable& ct) {
  detail::require_nonempty(ct);
  const auto rt = ct.row_totals();
  const auto cls = ct.col_totals();
  const std::uint64_t n = ct.total();
  double g = 0.0;
  for (std::size_t r = 0; r < ct.rows(); ++r) {
    if (rt[r] == 0) continue;
    double row = 0.0;
    for (std::size_t c = 0; c < ct.cols(); ++c) {
      const double d = detail::deviation(n, ct.at(r, c), rt[r], cls[c]);
      row += d * d;
    }
    g += row / static_cast<double>(rt[r]);
  }
  const double nd = static_cast<double>(n);
  return g / (nd * nd * nd);
}

// Pearson chi-square statistic of independence. Empty rows and columns are
// dropped first; fewer than two remaining rows or columns gives nullopt.
inline std::optional<double> chi_square(const ContingencyTable& ct) {
  detail::require_nonempty(ct);
  const auto rt = ct.row_totals();
  const auto class_totals = ct.col_totals();
  std::vector<std::size_t> rs, cs;
  for (std::size_t r = 0; r < ct.rows(); ++r)
    if (rt[r] > 0) rs.push_back(r);
  for (std::size_t c = 0; c < ct.cols(); ++c)
    if (class_totals[c] > 0) cs.push_back(c);
  if (rs.size() < 2 || cs.size() < 2) return std::nullopt;
  const double n = static_cast<double>(ct.total());
  double chi = 0.0;
  for (auto r : rs) {
    for (auto c : cs) {
      // (O - E)^2 / E with E = n_r n_c / n, from the exact n O - n_r n_c.
      const double d = detail::deviation(ct.total(), ct.at(r, c), rt[r], class_totals[c]);
      chi += d * d / (n * static_cast<double>(rt[r]) * static_cast<double>(class_totals[c]));
    }
  }
  return chi;
}

// Symmetric uncertainty 2 * I(X;Y) / (H(X) + H(Y)); 0 when both entropies are 0.
inline double symmetric_uncertainty(const ContingencyTable& ct) {
  detail::require_nonempty(ct);
  const auto rt = ct.row_totals();
  const auto col = ct.col_totals();
  const double hx = entropy(std::span<const std::uint64_t>(rt));
  const double hy = entropy(std::span<const std::uint64_t>(col));
  if (hx + hy == 0.0) return 0.0;
  const double ig = information_gain(ct);
  return std::clamp(2.0 * ig / (hx + hy), 0.0, 1.0);
}

// Equal-frequency binning of a numeric column. Cut points sit at the b*n/bins
// order statistics; repeated cut points merge, so heavily tied data yields
// fewer bins. Missing cells stay missing.
inline Column discretize(const Column& column, std::size_t bins) {
  if (!column.is_numeric()) throw KindError("discretize: column '" + column.name() + "' is not numeric");
  if (bins < 2) throw ConfigError("discretize: need at least 2 bins");
  std::vector<double> sorted;
  for (std::size_t i = 0; i < column.size(); ++i)
    if (!column.is_missing(i)) sorted.push_back(column.number(i));
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> cuts;
  for (std::size_t b = 1; b < bins && n > 0; ++b) {
    const std::size_t idx = b * n / bins;
    if (idx == 0 || idx >= n) continue;
    const double t = sorted[idx];
    if (t <= sorted.front()) continue;
    if (!cuts.empty() && t <= cuts.back()) continue;
    cuts.push_back(t);
  }
  std::vector<std::string> labels;
  if (cuts.empty()) {
    if (n > 0) labels.push_back("all");
  } else {
    labels.push_back("< " + format_number(cuts.front()));
    for (std::size_t j = 1; j < cuts.size(); ++j)
      labels.push_back("[" + format_number(cuts[j - 1]) + ", " + format_number(cuts[j]) + ")");
    labels.push_back(">= " + format_number(cuts.back()));
  }
  std::vector<std::int32_t> codes(column.size(), Column::kMissingCode);
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (column.is_missing(i)) continue;
    codes[i] = static_cast<std::int32_t>(std::upper_bound(cuts.begin(), cuts.end(), column.number(i)) - cuts.begin());
  }
  return Column::from_codes(column.name(), std::move(labels), std::move(codes));
}

// One-way ANOVA F statistic of a numeric column across the two classes.
// Returns +infinity when within-class variance is zero but the means differ.
inline double anova_f(const Column& column, std::span<const std::uint8_t> labels) {
  if (!column.is_numeric()) throw KindError("anova_f: column '" + column.name() + "' is not numeric");
  std::array<double, 2> sum{0.0, 0.0};
  std::array<std::size_t, 2> cnt{0, 0};
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (column.is_missing(i)) continue;
    sum[labels[i] ? 1 : 0] += column.number(i);
    ++cnt[labels[i] ? 1 : 0];
  }
  if (cnt[0] == 0 || cnt[1] == 0) throw DomainError("anova_f: a class has no members (degenerate group)");
  const std::size_t n = cnt[0] + cnt[1];
  const std::size_t groups = 2;
  if (n <= groups) throw DomainError("anova_f: need more observations than classes");
  const std::array<double, 2> mean{sum[0] / static_cast<double>(cnt[0]), sum[1] / static_cast<double>(cnt[1])};
  const double grand = (sum[0] + sum[1]) / static_cast<double>(n);
  double ssb = 0.0, ssw = 0.0;
  for (std::size_t g = 0; g < 2; ++g) ssb += static_cast<double>(cnt[g]) * (mean[g] - grand) * (mean[g] - grand);
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (column.is_missing(i)) continue;
    const double d = column.number(i) - mean[labels[i] ? 1 : 0];
    ssw += d * d;
  }
  if (ssb == 0.0) return 0.0;
  if (ssw == 0.0) return std::numeric_limits<double>::infinity();
  return (ssb / static_cast<double>(groups - 1)) / (ssw / static_cast<double>(n - groups));
}

struct ScorerConfig {
  std::size_t bins = 4;
  std::size_t relieff_neighbors = 10;
  // 0 means every row is used as a reference instance.
  std::size_t relieff_samples = 0;
  double fcbf_threshold = 0.0;
  std::uint64_t seed = 42;

  void validate() const {
    if (bins < 2) throw ConfigError("bins must be at least 2");
    if (relieff_neighbors < 1) throw ConfigError("relieff neighbors must be at least 1");
    if (!(fcbf_threshold >= 0.0)) throw ConfigError("fcbf threshold must be non-negative");
  }
};

// Reference rows ReliefF visits: all rows in order, or a seeded sample
// without replacement when fewer are requested.
inline std::vector<std::size_t> relieff_reference_rows(std::size_t n, const ScorerConfig& cfg) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (cfg.relieff_samples == 0 || cfg.relieff_samples >= n) return rows;
  Rng rng(derive_seed(cfg.seed, {0x52454C46}));
  rng.shuffle(rows);
  rows.resize(cfg.relieff_samples);
  return rows;
}

// Per-feature diff of two rows: |a - b| / range for numeric features (0 when
// the range is 0) and a 0/1 mismatch for categorical features.
class FeatureDiff {
 public:
  explicit FeatureDiff(const DataTable& table) : rows_(table.row_count()) {
    const auto feats = table.feature_indices();
    nf_ = feats.size();
    values_.assign(rows_ * nf_, 0.0);
    for (std::size_t f = 0; f < nf_; ++f) {
      const Column& c = table.column(feats[f]);
      if (c.has_missing()) throw PreconditionError("relieff: column '" + c.name() + "' has missing cells");
      const bool numeric = c.is_numeric();
      double lo = 0.0, range = 0.0;
      if (numeric && rows_ > 0) {
        const auto [mn, mx] = std::minmax_element(c.numbers().begin(), c.numbers().end());
        lo = *mn;
        range = *mx - *mn;
      }
      for (std::size_t i = 0; i < rows_; ++i) {
        double v;
        if (numeric)
          v = range > 0.0 ? (c.number(i) - lo) / range : 0.0;
        else
          v = static_cast<double>(c.code(i));
        values_[i * nf_ + f] = v;
      }
      numeric_.push_back(numeric);
    }
  }

  std::size_t features() const noexcept { return nf_; }

  double diff(std::size_t f, std::size_t a, std::size_t b) const {
    const double x = values_[a * nf_ + f], y = values_[b * nf_ + f];
    if (numeric_[f]) return std::abs(x - y);
    return x == y ? 0.0 : 1.0;
  }

  double distance(std::size_t a, std::size_t b) const {
    double d = 0.0;
    for (std::size_t f = 0; f < nf_; ++f) d += diff(f, a, b);
    return d;
  }

 private:
  std::size_t rows_ = 0, nf_ = 0;
  std::vector<double> values_;
  std::vector<bool> numeric_;
};

// ReliefF feature weights (one per feature, table feature order). For each
// reference row the k nearest hits and k nearest misses (Manhattan distance
// on per-feature diffs, ties to the lower row index) pull the weight of each
// feature down by its hit diffs and up by its miss diffs.
inline std::vector<double> relieff(const DataTable& table, const ScorerConfig& cfg,
                                   std::vector<std::string>* warnings = nullptr) {
  cfg.validate();
  const auto y = table.labels();
  const std::size_t n = y.size();
  std::array<std::size_t, 2> cnt{0, 0};
  for (auto v : y) ++cnt[v];
  if (cnt[0] < 1 || cnt[1] < 1) throw DomainError("relieff: both classes need at least one row");
  const FeatureDiff fd(table);
  const std::size_t nf = fd.features();
  const auto refs = relieff_reference_rows(n, cfg);
  const double m = static_cast<double>(refs.size());
  std::vector<double> w(nf, 0.0);
  bool clamped = false;

  std::vector<std::pair<double, std::size_t>> hits, misses;
  for (auto i : refs) {
    hits.clear();
    misses.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      (y[j] == y[i] ? hits : misses).emplace_back(fd.distance(i, j), j);
    }
    const std::size_t kh = std::min(cfg.relieff_neighbors, hits.size());
    const std::size_t km = std::min(cfg.relieff_neighbors, misses.size());
    clamped |= kh < cfg.relieff_neighbors || km < cfg.relieff_neighbors;
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(kh), hits.end());
    std::partial_sort(misses.begin(), misses.begin() + static_cast<std::ptrdiff_t>(km), misses.end());
    // With two classes the miss-class prior weight P(C) / (1 - P(class(i))) is 1.
    for (std::size_t f = 0; f < nf; ++f) {
      double h = 0.0, s = 0.0;
      for (std::size_t t = 0; t < kh; ++t) h += fd.diff(f, i, hits[t].second);
      for (std::size_t t = 0; t < km; ++t) s += fd.diff(f, i, misses[t].second);
      if (kh) w[f] -= h / (m * static_cast<double>(kh));
      if (km) w[f] += s / (m * static_cast<double>(km));
    }
  }
  if (clamped && warnings) warnings->push_back("relieff: neighbor count clamped to the available rows");
  return w;
}

struct FcbfResult {
  // Symmetric uncertainty with the class for selected features, 0 otherwise.
  std::vector<double> scores;
  // Selected feature positions (into the table's feature order), best first.
  std::vector<std::size_t> selected;
};

// Fast correlation-based filter over categorical (already discretized)
// features: rank by SU with the class, then drop every feature that some
// better-ranked kept feature predicts at least as well as the class does.
inline FcbfResult fcbf(const DataTable& table, const ScorerConfig& cfg) {
  cfg.validate();
  const auto y = table.labels();
  const auto feats = table.feature_indices();
  std::vector<double> su(feats.size());
  for (std::size_t f = 0; f < feats.size(); ++f) {
    const Column& c = table.column(feats[f]);
    if (!c.is_categorical()) throw KindError("fcbf: column '" + c.name() + "' must be discretized first");
    if (c.has_missing()) throw PreconditionError("fcbf: column '" + c.name() + "' has missing cells");
    su[f] = symmetric_uncertainty(crosstab(c, y));
  }
  std::vector<std::size_t> order;
  for (std::size_t f = 0; f < feats.size(); ++f)
    if (su[f] > cfg.fcbf_threshold) order.push_back(f);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return su[a] > su[b]; });
  std::vector<bool> removed(order.size(), false);
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (removed[p]) continue;
    const Column& cp = table.column(feats[order[p]]);
    for (std::size_t q = p + 1; q < order.size(); ++q) {
      if (removed[q]) continue;
      const Column& cq = table.column(feats[order[q]]);
      if (symmetric_uncertainty(crosstab(cp, cq)) >= su[order[q]]) removed[q] = true;
    }
  }
  FcbfResult out;
  out.scores.assign(feats.size(), 0.0);
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (removed[p]) continue;
    out.selected.push_back(order[p]);
    out.scores[order[p]] = su[order[p]];
  }
  return out;
}

enum class Scorer { InfoGain, GainRatio, Gini, Anova, Chi2, ReliefF, Fcbf };

inline constexpr std::array<Scorer, 7> kAllScorers{Scorer::InfoGain, Scorer::GainRatio, Scorer::Gini, Scorer::Anova,
                                                   Scorer::Chi2,     Scorer::ReliefF,   Scorer::Fcbf};

inline const char* scorer_name(Scorer s) {
  switch (s) {
    case Scorer::InfoGain: return "info_gain";
    case Scorer::GainRatio: return "gain_ratio";
    case Scorer::Gini: return "gini";
    case Scorer::Anova: return "anova";
    case Scorer::Chi2: return "chi2";
    case Scorer::ReliefF: return "relieff";
    case Scorer::Fcbf: return "fcbf";
  }
  return "?";
}

inline Scorer parse_scorer(const std::string& s) {
  for (auto sc : kAllScorers)
    if (s == scorer_name(sc)) return sc;
  throw ConfigError("unknown scorer '" + s + "' (expected one of info_gain, gain_ratio, gini, anova, chi2, relieff, fcbf)");
}

struct FeatureScores {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  // Categorical arity, or the number of bins for numeric features.
  std::size_t value_count = 0;
  // Indexed by Scorer; nullopt renders as NA.
  std::array<std::optional<double>, 7> scores{};
  // 1-based position in the consensus order.
  std::size_t consensus_rank = 0;
  double mean_rank = 0.0;

  const std::optional<double>& score(Scorer s) const { return scores[static_cast<std::size_t>(s)]; }
};

struct RankingTable {
  std::vector<Scorer> scorers;
  // In the table's feature order.
  std::vector<FeatureScores> features;
  std::vector<std::string> consensus_order;
  std::vector<std::string> fcbf_selected;

  // Descending score order under one scorer; NA and ties fall back to column order.
  std::vector<std::string> order_by(Scorer s) const {
    std::vector<std::size_t> idx(features.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = features[a].score(s);
      const auto& y = features[b].score(s);
      if (x && y) return *x > *y;
      return x.has_value() && !y.has_value();
    });
    std::vector<std::string> out;
    for (auto i : idx) out.push_back(features[i].name);
    return out;
  }
};

// Average (1-based, descending-score) ranks of the applicable entries.
inline std::vector<std::optional<double>> average_ranks(const std::vector<std::optional<double>>& v) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i]) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return *v[a] > *v[b]; });
  std::vector<std::optional<double>> out(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && *v[idx[j]] == *v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) out[idx[t]] = avg;
    i = j;
  }
  return out;
}

// Scores every feature with each enabled scorer and orders features by mean
// rank across the scorers that apply to them (ties to column order). Numeric
// features are discretized for the entropy-based scorers and chi-square;
// ANOVA applies only to numeric features.
inline RankingTable build_ranking(const DataTable& table, const ScorerConfig& cfg, std::span<const Scorer> scorers,
                                  std::vector<std::string>* warnings = nullptr) {
  cfg.validate();
  if (scorers.empty()) throw ConfigError("build_ranking: no scorers enabled");
  auto enabled = [&](Scorer s) { return std::find(scorers.begin(), scorers.end(), s) != scorers.end(); };
  const auto y = table.labels();
  const auto feats = table.feature_indices();

  RankingTable rt;
  rt.scorers.assign(scorers.begin(), scorers.end());
  std::vector<Column> discrete;
  for (auto idx : feats) {
    const Column& c = table.column(idx);
    FeatureScores fs;
    fs.name = c.name();
    fs.kind = c.kind();
    Column d = c.is_numeric() ? discretize(c, cfg.bins) : c;
    fs.value_count = value_counts(d).size();
    const ContingencyTable ct = crosstab(d, y);
    if (ct.total() > 0) {
      if (enabled(Scorer::InfoGain)) fs.scores[0] = information_gain(ct);
      if (enabled(Scorer::GainRatio)) fs.scores[1] = gain_ratio(ct);
      if (enabled(Scorer::Gini)) fs.scores[2] = gini_gain(ct);
      if (enabled(Scorer::Chi2)) fs.scores[4] = chi_square(ct);
    }
    if (enabled(Scorer::Anova) && c.is_numeric()) fs.scores[3] = anova_f(c, y);
    rt.features.push_back(std::move(fs));
    discrete.push_back(std::move(d));
  }
  if (enabled(Scorer::ReliefF)) {
    const auto w = relieff(table, cfg, warnings);
    for (std::size_t f = 0; f < w.size(); ++f) rt.features[f].scores[5] = w[f];
  }
  if (enabled(Scorer::Fcbf)) {
    std::vector<Column> cols = discrete;
    cols.push_back(table.target());
    const auto res = fcbf(table.with_columns(std::move(cols)), cfg);
    for (std::size_t f = 0; f < res.scores.size(); ++f) rt.features[f].scores[6] = res.scores[f];
    for (auto f : res.selected) rt.fcbf_selected.push_back(rt.features[f].name);
  }

  std::vector<double> rank_sum(feats.size(), 0.0);
  std::vector<std::size_t> rank_n(feats.size(), 0);
  for (auto s : scorers) {
    std::vector<std::optional<double>> col;
    for (const auto& fs : rt.features) col.push_back(fs.score(s));
    const auto ranks = average_ranks(col);
    for (std::size_t f = 0; f < ranks.size(); ++f)
      if (ranks[f]) rank_sum[f] += *ranks[f], ++rank_n[f];
  }
  std::vector<std::size_t> order(feats.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t f = 0; f < feats.size(); ++f)
    rt.features[f].mean_rank =
        rank_n[f] ? rank_sum[f] / static_cast<double>(rank_n[f]) : std::numeric_limits<double>::infinity();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rt.features[a].mean_rank < rt.features[b].mean_rank; });
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    rt.features[order[pos]].consensus_rank = pos + 1;
    rt.consensus_order.push_back(rt.features[order[pos]].name);
  }
  return rt;
}

inline std::string render_score(const std::optional<double>& v) {
  if (!v) return "NA";
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return format_number(*v);
}

inline const std::vector<std::string>& ranking_csv_header() {
  static const std::vector<std::string> h{"feature", "value_count", "info_gain", "gain_ratio", "gini", "anova",
                                          "chi2",    "relieff",     "fcbf",      "consensus_rank"};
  return h;
}

// Rows in consensus order.
inline void write_ranking_csv(std::ostream& out, const RankingTable& rt) {
  csv::write_row(out, ranking_csv_header());
  std::vector<const FeatureScores*> rows;
  for (const auto& name : rt.consensus_order)
    for (const auto& f : rt.features)
      if (f.name == name) rows.push_back(&f);
  for (const auto* f : rows) {
    std::vector<std::string> fields{f->name, std::to_string(f->value_count)};
    for (auto s : kAllScorers) fields.push_back(render_score(f->score(s)));
    fields.push_back(std::to_string(f->consensus_rank));
    csv::write_row(out, fields);
  }
}

inline nlohmann::json ranking_to_json(const RankingTable& rt) {
  nlohmann::json j;
  j["scorers"] = nlohmann::json::array();
  for (auto s : rt.scorers) j["scorers"].push_back(scorer_name(s));
  j["consensus_order"] = rt.consensus_order;
  j["fcbf_selected"] = rt.fcbf_selected;
  j["features"] = nlohmann::json::array();
  for (const auto& name : rt.consensus_order) {
    for (const auto& f : rt.features) {
      if (f.name != name) continue;
      nlohmann::json row{{"feature", f.name}, {"kind", to_string(f.kind)}, {"value_count", f.value_count}};
      for (auto s : kAllScorers) {
        const auto& v = f.score(s);
        if (v && std::isfinite(*v))
          row[scorer_name(s)] = *v;
        else
          row[scorer_name(s)] = render_score(v);
      }
      row["consensus_rank"] = f.consensus_rank;
      j["features"].push_back(std::move(row));
    }
  }
  return j;
}

inline void write_ranking_markdown(std::ostream& out, const RankingTable& rt) {
  out << "| # | kind | feature | values |";
  for (auto s : kAllScorers) out << ' ' << scorer_name(s) << " |";
  out << "\n|---|---|---|---|";
  for (std::size_t i = 0; i < kAllScorers.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& name : rt.consensus_order) {
    for (const auto& f : rt.features) {
      if (f.name != name) continue;
      out << "| " << f.consensus_rank << " | " << (f.kind == ColumnKind::Numeric ? 'N' : 'C') << " | " << f.name
          << " | " << f.value_count << " |";
      for (auto s : kAllScorers) {
        const auto& v = f.score(s);
        char buf[64];
        if (v && std::isfinite(*v))
          std::snprintf(buf, sizeof buf, "%.3f", *v);
        else
          std::snprintf(buf, sizeof buf, "%s", render_score(v).c_str());
        out << ' ' << buf << " |";
      }
      out << '\n';
    }
  }
}

}  // namespace tabrank
