#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "../errors.hpp"
#include "../table.hpp"
#include "params.hpp"

namespace tabrank {

// Attribute test on one raw column.
struct Cn2Selector {
  enum class Op { Equals, AtMost, Above };
  std::string feature;
  Op op = Op::Equals;
  std::string category;    // Equals
  double threshold = 0.0;  // AtMost: x <= t, Above: x > t

  friend bool operator==(const Cn2Selector&, const Cn2Selector&) = default;
};

struct Cn2Rule {
  std::vector<Cn2Selector> conditions;
  std::uint8_t predicted = 0;  // class the rule was induced for
  double quality = 0.0;        // Laplace accuracy during induction
  double positive_probability = 0.5;
};

namespace detail {

class Bitset {
 public:
  Bitset() = default;
  Bitset(std::size_t n, bool value) : n_(n), words_((n + 63) / 64, value ? ~0ULL : 0ULL) { trim(); }

  void set(std::size_t i) { words_[i / 64] |= 1ULL << (i % 64); }
  void reset(std::size_t i) { words_[i / 64] &= ~(1ULL << (i % 64)); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1ULL; }
  std::size_t size() const noexcept { return n_; }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  // |this & other|
  std::size_t count_and(const Bitset& other) const {
    std::size_t c = 0;
    for (std::size_t k = 0; k < words_.size(); ++k) c += static_cast<std::size_t>(std::popcount(words_[k] & other.words_[k]));
    return c;
  }
  Bitset& operator&=(const Bitset& o) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= o.words_[k];
    return *this;
  }
  Bitset& subtract(const Bitset& o) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= ~o.words_[k];
    return *this;
  }
  bool none() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }
  friend Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }

 private:
  void trim() {
    if (n_ % 64 != 0 && !words_.empty()) words_.back() &= (1ULL << (n_ % 64)) - 1;
  }
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

inline bool selector_matches(const Cn2Selector& s, const Column& col, std::size_t row) {
  switch (s.op) {
    case Cn2Selector::Op::Equals: return col.category(row) == s.category;
    case Cn2Selector::Op::AtMost: return col.number(row) <= s.threshold;
    case Cn2Selector::Op::Above: return col.number(row) > s.threshold;
  }
  return false;
}

// Up to `cuts` distinct quantile thresholds strictly below the column maximum.
inline std::vector<double> quantile_cuts(const Column& col, std::size_t cuts) {
  std::vector<double> v(col.numbers().begin(), col.numbers().end());
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (std::size_t q = 1; q <= cuts; ++q) {
    const double t = v[q * v.size() / (cuts + 1)];
    if (t < v.back() && (out.empty() || t > out.back())) out.push_back(t);
  }
  return out;
}

}  // namespace detail

// Unordered CN2 rule set. Rules are induced separately for each class by
// beam search on Laplace accuracy (p + 1) / (p + n + 2), removing covered
// rows of that class after each rule. Prediction uses the highest-quality
// matching rule's class distribution on the training data, falling back to
// the training prior when no rule matches.
struct Cn2Model {
  std::vector<Cn2Rule> rules;  // sorted by quality, descending
  double prior = 0.5;          // training positive fraction

  std::vector<double> predict(const DataTable& table) const {
    std::vector<const Column*> cols;
    for (const auto& r : rules)
      for (const auto& s : r.conditions) {
        auto idx = table.index_of(s.feature);
        if (!idx) throw SchemaError("input is missing column '" + s.feature + "'");
        const Column& c = table.column(*idx);
        const bool want_numeric = s.op != Cn2Selector::Op::Equals;
        if (c.is_numeric() != want_numeric)
          throw SchemaError("column '" + s.feature + "' has the wrong kind for this model");
        if (c.has_missing()) throw PreconditionError("column '" + s.feature + "' has missing cells; impute first");
        cols.push_back(&c);
      }
    std::vector<double> out(table.row_count(), prior);
    for (std::size_t i = 0; i < table.row_count(); ++i) {
      std::size_t ci = 0;
      for (const auto& r : rules) {
        bool match = true;
        for (const auto& s : r.conditions) match = detail::selector_matches(s, *cols[ci++], i) && match;
        if (match) {
          out[i] = r.positive_probability;
          break;
        }
      }
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rules) {
      nlohmann::json conds = nlohmann::json::array();
      for (const auto& s : r.conditions) {
        const char* op = s.op == Cn2Selector::Op::Equals ? "==" : s.op == Cn2Selector::Op::AtMost ? "<=" : ">";
        nlohmann::json cj{{"feature", s.feature}, {"op", op}};
        if (s.op == Cn2Selector::Op::Equals)
          cj["category"] = s.category;
        else
          cj["threshold"] = s.threshold;
        conds.push_back(std::move(cj));
      }
      rs.push_back({{"conditions", conds},
                    {"predicted", r.predicted},
                    {"quality", r.quality},
                    {"positive_probability", r.positive_probability}});
    }
    return {{"prior", prior}, {"rules", rs}};
  }

  static Cn2Model from_json(const nlohmann::json& j) {
    Cn2Model m;
    m.prior = j.at("prior").get<double>();
    for (const auto& rj : j.at("rules")) {
      Cn2Rule r;
      for (const auto& cj : rj.at("conditions")) {
        Cn2Selector s;
        s.feature = cj.at("feature").get<std::string>();
        const auto op = cj.at("op").get<std::string>();
        if (op == "==") {
          s.op = Cn2Selector::Op::Equals;
          s.category = cj.at("category").get<std::string>();
        } else if (op == "<=" || op == ">") {
          s.op = op == "<=" ? Cn2Selector::Op::AtMost : Cn2Selector::Op::Above;
          s.threshold = cj.at("threshold").get<double>();
        } else {
          throw ValidationError("unknown rule operator '" + op + "'");
        }
        r.conditions.push_back(std::move(s));
      }
      r.predicted = rj.at("predicted").get<std::uint8_t>();
      r.quality = rj.at("quality").get<double>();
      r.positive_probability = rj.at("positive_probability").get<double>();
      m.rules.push_back(std::move(r));
    }
    return m;
  }
};

inline Cn2Model fit_cn2(const DataTable& table, const Cn2Params& p) {
  using detail::Bitset;
  const auto y = table.labels();
  const std::size_t n = y.size();

  struct Candidate {
    Cn2Selector sel;
    std::size_t feature;  // index into `feats`
    Bitset cover;
  };
  const auto feats = table.feature_indices();
  std::vector<Candidate> selectors;
  for (std::size_t fi = 0; fi < feats.size(); ++fi) {
    const Column& col = table.column(feats[fi]);
    if (col.is_categorical()) {
      for (std::size_t k = 0; k < col.categories().size(); ++k) {
        Bitset b(n, false);
        for (std::size_t i = 0; i < n; ++i)
          if (col.code(i) == static_cast<std::int32_t>(k)) b.set(i);
        if (b.none()) continue;
        selectors.push_back({{col.name(), Cn2Selector::Op::Equals, col.categories()[k], 0.0}, fi, std::move(b)});
      }
    } else {
      for (double t : detail::quantile_cuts(col, static_cast<std::size_t>(p.numeric_cuts))) {
        Bitset le(n, false), gt(n, false);
        for (std::size_t i = 0; i < n; ++i) (col.number(i) <= t ? le : gt).set(i);
        selectors.push_back({{col.name(), Cn2Selector::Op::AtMost, {}, t}, fi, std::move(le)});
        selectors.push_back({{col.name(), Cn2Selector::Op::Above, {}, t}, fi, std::move(gt)});
      }
    }
  }

  Bitset cls[2] = {Bitset(n, false), Bitset(n, false)};
  for (std::size_t i = 0; i < n; ++i) cls[y[i]].set(i);
  const double counts[2] = {static_cast<double>(cls[0].count()), static_cast<double>(cls[1].count())};

  struct Partial {
    std::vector<std::size_t> sels;
    Bitset cover;
    double quality;
  };
  Cn2Model model;
  model.prior = counts[1] / static_cast<double>(n);
  const auto beam_width = static_cast<std::size_t>(p.beam_width);
  const auto min_cov = static_cast<std::size_t>(p.min_coverage);

  for (std::uint8_t target = 0; target < 2; ++target) {
    const double default_quality = (counts[target] + 1.0) / (static_cast<double>(n) + 2.0);
    Bitset active = cls[target];
    const Bitset& negatives = cls[1 - target];
    std::size_t induced = 0;
    while (!active.none() && induced < static_cast<std::size_t>(p.max_rules)) {
      std::vector<Partial> beam{{{}, Bitset(n, true), 0.0}};
      std::optional<Partial> best;
      for (int len = 0; len < p.max_rule_length && !beam.empty(); ++len) {
        std::vector<Partial> next;
        for (const auto& rule : beam) {
          for (std::size_t s = 0; s < selectors.size(); ++s) {
            // One test per feature, and canonical (increasing) selector order
            // so each conjunction is generated once.
            bool reuse = false;
            for (auto used : rule.sels) reuse = reuse || selectors[used].feature == selectors[s].feature;
            if (reuse || (!rule.sels.empty() && s < rule.sels.back())) continue;
            Bitset cover = rule.cover & selectors[s].cover;
            const std::size_t pos = cover.count_and(active);
            const std::size_t neg = cover.count_and(negatives);
            if (pos == 0 || pos + neg < min_cov) continue;
            const double q = (static_cast<double>(pos) + 1.0) / (static_cast<double>(pos + neg) + 2.0);
            auto sels = rule.sels;
            sels.push_back(s);
            next.push_back({std::move(sels), std::move(cover), q});
          }
        }
        std::stable_sort(next.begin(), next.end(),
                         [](const Partial& a, const Partial& b) { return a.quality > b.quality; });
        if (next.size() > beam_width) next.resize(beam_width);
        if (!next.empty() && next.front().quality > default_quality &&
            (!best || next.front().quality > best->quality))
          best = next.front();
        beam = std::move(next);
      }
      if (!best) break;
      Cn2Rule r;
      for (auto s : best->sels) r.conditions.push_back(selectors[s].sel);
      r.predicted = target;
      r.quality = best->quality;
      const double cov = static_cast<double>(best->cover.count());
      const double cov_pos = static_cast<double>(best->cover.count_and(cls[1]));
      r.positive_probability = (cov_pos + 1.0) / (cov + 2.0);
      model.rules.push_back(std::move(r));
      active.subtract(best->cover);
      ++induced;
    }
  }
  std::stable_sort(model.rules.begin(), model.rules.end(),
                   [](const Cn2Rule& a, const Cn2Rule& b) { return a.quality > b.quality; });
  return model;
}

}  // namespace tabrank
