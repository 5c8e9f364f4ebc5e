#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "../errors.hpp"
#include "../table.hpp"
#include "params.hpp"

namespace tabrank {

// Mixed-type naive Bayes on raw table columns: a Gaussian per class for
// numeric features, Laplace-smoothed frequencies for categorical ones.
struct NaiveBayesModel {
  struct Feature {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    double mean[2] = {0.0, 0.0};
    double var[2] = {1.0, 1.0};
    std::vector<std::string> categories;
    std::vector<double> count[2];  // per-category counts by class
  };

  double alpha = 1.0;
  double class_count[2] = {0.0, 0.0};
  std::vector<Feature> features;

  // Positive-class posterior for every row of `table`, matching features by
  // name and categories by value.
  std::vector<double> predict(const DataTable& table) const {
    const std::size_t n = table.row_count();
    const double total = class_count[0] + class_count[1];
    std::vector<double> logp[2];
    for (int c = 0; c < 2; ++c) logp[c].assign(n, std::log(class_count[c] / total));
    for (const auto& f : features) {
      auto idx = table.index_of(f.name);
      if (!idx) throw SchemaError("input is missing column '" + f.name + "'");
      const Column& col = table.column(*idx);
      if (col.kind() != f.kind)
        throw SchemaError("column '" + f.name + "' is " + to_string(col.kind()) + ", expected " + to_string(f.kind));
      if (col.has_missing()) throw PreconditionError("column '" + f.name + "' has missing cells; impute first");
      if (f.kind == ColumnKind::Numeric) {
        for (int c = 0; c < 2; ++c) {
          const double norm = -0.5 * std::log(2.0 * std::numbers::pi * f.var[c]);
          for (std::size_t i = 0; i < n; ++i) {
            const double d = col.number(i) - f.mean[c];
            logp[c][i] += norm - d * d / (2.0 * f.var[c]);
          }
        }
      } else {
        const double v = static_cast<double>(f.categories.size());
        std::vector<double> table_code_log[2];
        for (int c = 0; c < 2; ++c) {
          for (const auto& cat : col.categories()) {
            double cnt = 0.0;
            for (std::size_t k = 0; k < f.categories.size(); ++k)
              if (f.categories[k] == cat) cnt = f.count[c][k];
            table_code_log[c].push_back(std::log((cnt + alpha) / (class_count[c] + alpha * v)));
          }
          for (std::size_t i = 0; i < n; ++i) logp[c][i] += table_code_log[c][static_cast<std::size_t>(col.code(i))];
        }
      }
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      // P(1) = 1 / (1 + exp(logp0 - logp1))
      const double z = logp[1][i] - logp[0][i];
      out[i] = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json fs = nlohmann::json::array();
    for (const auto& f : features) {
      nlohmann::json j{{"name", f.name}, {"kind", to_string(f.kind)}};
      if (f.kind == ColumnKind::Numeric) {
        j["mean"] = {f.mean[0], f.mean[1]};
        j["var"] = {f.var[0], f.var[1]};
      } else {
        j["categories"] = f.categories;
        j["count"] = {f.count[0], f.count[1]};
      }
      fs.push_back(std::move(j));
    }
    return {{"alpha", alpha}, {"class_count", {class_count[0], class_count[1]}}, {"features", fs}};
  }

  static NaiveBayesModel from_json(const nlohmann::json& j) {
    NaiveBayesModel m;
    m.alpha = j.at("alpha").get<double>();
    m.class_count[0] = j.at("class_count").at(0).get<double>();
    m.class_count[1] = j.at("class_count").at(1).get<double>();
    for (const auto& fj : j.at("features")) {
      Feature f;
      f.name = fj.at("name").get<std::string>();
      const auto kind = fj.at("kind").get<std::string>();
      if (kind == "numeric") {
        f.kind = ColumnKind::Numeric;
        for (int c = 0; c < 2; ++c) {
          f.mean[c] = fj.at("mean").at(c).get<double>();
          f.var[c] = fj.at("var").at(c).get<double>();
        }
      } else {
        f.kind = ColumnKind::Categorical;
        f.categories = fj.at("categories").get<std::vector<std::string>>();
        for (int c = 0; c < 2; ++c) f.count[c] = fj.at("count").at(c).get<std::vector<double>>();
      }
      m.features.push_back(std::move(f));
    }
    return m;
  }
};

// Requires both classes present and no missing feature cells.
inline NaiveBayesModel fit_naive_bayes(const DataTable& table, const NaiveBayesParams& p) {
  const auto y = table.labels();
  NaiveBayesModel m;
  m.alpha = p.alpha;
  for (auto v : y) m.class_count[v] += 1.0;
  for (auto idx : table.feature_indices()) {
    const Column& col = table.column(idx);
    NaiveBayesModel::Feature f;
    f.name = col.name();
    f.kind = col.kind();
    if (col.is_numeric()) {
      double sum[2] = {0, 0};
      for (std::size_t i = 0; i < y.size(); ++i) sum[y[i]] += col.number(i);
      for (int c = 0; c < 2; ++c) f.mean[c] = sum[c] / m.class_count[c];
      double ss[2] = {0, 0};
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = col.number(i) - f.mean[y[i]];
        ss[y[i]] += d * d;
      }
      for (int c = 0; c < 2; ++c) f.var[c] = std::max(ss[c] / m.class_count[c], p.var_floor);
    } else {
      f.categories = col.categories();
      for (int c = 0; c < 2; ++c) f.count[c].assign(f.categories.size(), 0.0);
      for (std::size_t i = 0; i < y.size(); ++i) f.count[y[i]][static_cast<std::size_t>(col.code(i))] += 1.0;
    }
    m.features.push_back(std::move(f));
  }
  return m;
}

}  // namespace tabrank
