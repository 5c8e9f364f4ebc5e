#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "../errors.hpp"
#include "../table.hpp"
#include "cn2.hpp"
#include "ensemble.hpp"
#include "knn.hpp"
#include "linear.hpp"
#include "mlp.hpp"
#include "naive_bayes.hpp"
#include "params.hpp"
#include "tree.hpp"

namespace tabrank {

struct ClassifierSpec {
  Family family = Family::Constant;
  Hyperparameters params = ConstantParams{};
  std::uint64_t seed = 42;

  static ClassifierSpec defaults(Family f, std::uint64_t seed = 42) { return {f, default_params(f), seed}; }

  void validate() const {
    if (family_of(params) != family)
      throw ConfigError(std::string("hyperparameters do not belong to ") + family_id(family));
    tabrank::validate(params);
  }
  std::string name() const { return family_display_name(family); }
};

struct ConstantState {
  double probability = 0.5;
};

struct SvmState {
  LinearModel linear;
  PlattScaling platt;
};

inline nlohmann::json recipe_to_json(const EncodingRecipe& r) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& c : r.columns()) {
    nlohmann::json j{{"name", c.name}, {"kind", to_string(c.kind)}};
    if (c.kind == ColumnKind::Numeric) {
      j["center"] = c.center;
      j["scale"] = c.scale;
    } else {
      j["categories"] = c.categories;
    }
    a.push_back(std::move(j));
  }
  return a;
}

inline EncodingRecipe recipe_from_json(const nlohmann::json& a) {
  std::vector<ColumnEncoding> cols;
  for (const auto& j : a) {
    ColumnEncoding c;
    c.name = j.at("name").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "numeric") {
      c.kind = ColumnKind::Numeric;
      c.center = j.at("center").get<double>();
      c.scale = j.at("scale").get<double>();
    } else if (kind == "categorical") {
      c.kind = ColumnKind::Categorical;
      c.categories = j.at("categories").get<std::vector<std::string>>();
    } else {
      throw ValidationError("unknown column kind '" + kind + "' in model file");
    }
    cols.push_back(std::move(c));
  }
  return EncodingRecipe(std::move(cols));
}

inline bool family_uses_standardized_encoding(Family f) {
  switch (f) {
    case Family::KNN:
    case Family::LinearSVM:
    case Family::SGDLinear:
    case Family::NeuralNet:
    case Family::LogisticRegression: return true;
    default: return false;
  }
}

inline bool family_uses_encoding(Family f) {
  return f != Family::Constant && f != Family::NaiveBayes && f != Family::CN2;
}

inline constexpr const char* kModelFormat = "tabrank-model";
inline constexpr int kModelVersion = 1;

class TrainedModel;
TrainedModel train(const ClassifierSpec& spec, const DataTable& table, std::vector<std::string>* warnings = nullptr);

// A fitted classifier together with the encoding learned from its training
// table. Immutable once built; prediction is a pure function of the model
// and the input rows.
class TrainedModel {
 public:
  using State = std::variant<ConstantState, NaiveBayesModel, KnnModel, Tree, LinearModel, SvmState, ForestModel,
                             BoostedModel, AdaBoostModel, Cn2Model, Mlp>;

  const ClassifierSpec& spec() const noexcept { return spec_; }
  const std::string& target_name() const noexcept { return target_; }
  const std::string& positive_label() const noexcept { return positive_; }
  const std::string& negative_label() const noexcept { return negative_; }
  const EncodingRecipe& recipe() const noexcept { return recipe_; }
  const State& state() const noexcept { return state_; }
  // True when training saw a single class and fell back to a constant.
  bool degenerate() const noexcept { return degenerate_; }

  // Positive-class probability per row of `rows`, whose feature columns are
  // matched to the training features by name.
  std::vector<double> predict_proba(const DataTable& rows) const {
    check_schema(rows);
    const std::size_t n = rows.row_count();
    if (const auto* c = std::get_if<ConstantState>(&state_)) return std::vector<double>(n, c->probability);
    if (const auto* nb = std::get_if<NaiveBayesModel>(&state_)) return nb->predict(rows);
    if (const auto* cn2 = std::get_if<Cn2Model>(&state_)) return cn2->predict(rows);

    const EncodedMatrix x = recipe_.apply(rows);
    std::vector<double> out(n);
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, KnnModel>) {
            std::vector<std::pair<double, std::size_t>> scratch;
            for (std::size_t i = 0; i < n; ++i) out[i] = s.probability(x.row(i), scratch);
          } else if constexpr (std::is_same_v<S, Tree>) {
            for (std::size_t i = 0; i < n; ++i) out[i] = s.predict(x.row(i));
          } else if constexpr (std::is_same_v<S, LinearModel>) {
            for (std::size_t i = 0; i < n; ++i) out[i] = sigmoid(s.score(x.row(i)));
          } else if constexpr (std::is_same_v<S, SvmState>) {
            for (std::size_t i = 0; i < n; ++i) out[i] = s.platt.probability(s.linear.score(x.row(i)));
          } else if constexpr (std::is_same_v<S, ForestModel> || std::is_same_v<S, BoostedModel> ||
                               std::is_same_v<S, AdaBoostModel>) {
            for (std::size_t i = 0; i < n; ++i) out[i] = s.probability(x.row(i));
          } else if constexpr (std::is_same_v<S, Mlp>) {
            Mlp::Workspace ws;
            for (std::size_t i = 0; i < n; ++i) out[i] = sigmoid(s.logit(s.parameters(), x.row(i), &ws));
          }
        },
        state_);
    return out;
  }

  // 1 = positive, from predict_proba at the 0.5 threshold (ties positive).
  std::vector<std::uint8_t> predict_labels(const DataTable& rows) const {
    const auto p = predict_proba(rows);
    std::vector<std::uint8_t> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] >= 0.5 ? 1 : 0;
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json feats = nlohmann::json::array();
    for (std::size_t i = 0; i < feature_names_.size(); ++i)
      feats.push_back({{"name", feature_names_[i]}, {"kind", to_string(feature_kinds_[i])}});
    nlohmann::json j{{"format", kModelFormat},
                     {"version", kModelVersion},
                     {"family", family_id(spec_.family)},
                     {"seed", spec_.seed},
                     {"params", params_to_json(spec_.params)},
                     {"target", {{"name", target_}, {"negative", negative_}, {"positive", positive_}}},
                     {"features", feats},
                     {"degenerate", degenerate_}};
    if (family_uses_encoding(spec_.family) && !degenerate_) j["encoding"] = recipe_to_json(recipe_);
    j["state"] = state_to_json();
    return j;
  }

  static TrainedModel from_json(const nlohmann::json& j) {
    try {
      if (j.value("format", "") != kModelFormat) throw ValidationError("not a model file (format tag missing)");
      const int version = j.at("version").get<int>();
      if (version != kModelVersion)
        throw ValidationError("model file version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kModelVersion) + ")");
      TrainedModel m;
      m.spec_.family = parse_family(j.at("family").get<std::string>());
      m.spec_.seed = j.at("seed").get<std::uint64_t>();
      m.spec_.params = params_from_json(m.spec_.family, j.at("params"));
      m.target_ = j.at("target").at("name").get<std::string>();
      m.negative_ = j.at("target").at("negative").get<std::string>();
      m.positive_ = j.at("target").at("positive").get<std::string>();
      for (const auto& f : j.at("features")) {
        m.feature_names_.push_back(f.at("name").get<std::string>());
        const auto kind = f.at("kind").get<std::string>();
        if (kind != "numeric" && kind != "categorical")
          throw ValidationError("unknown column kind '" + kind + "' in model file");
        m.feature_kinds_.push_back(kind == "numeric" ? ColumnKind::Numeric : ColumnKind::Categorical);
      }
      m.degenerate_ = j.at("degenerate").get<bool>();
      if (j.contains("encoding")) m.recipe_ = recipe_from_json(j.at("encoding"));
      m.state_from_json(j.at("state"));
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("malformed model file: ") + e.what());
    }
  }

 private:
  friend TrainedModel train(const ClassifierSpec&, const DataTable&, std::vector<std::string>*);

  void check_schema(const DataTable& rows) const {
    for (std::size_t i = 0; i < feature_names_.size(); ++i) {
      auto idx = rows.index_of(feature_names_[i]);
      if (!idx) throw SchemaError("input is missing column '" + feature_names_[i] + "'");
      if (rows.column(*idx).kind() != feature_kinds_[i])
        throw SchemaError("column '" + feature_names_[i] + "' is " + to_string(rows.column(*idx).kind()) +
                          ", expected " + to_string(feature_kinds_[i]));
      if (rows.column(*idx).has_missing())
        throw PreconditionError("column '" + feature_names_[i] + "' has missing cells; impute first");
    }
  }

  nlohmann::json state_to_json() const {
    return std::visit(
        [](const auto& s) -> nlohmann::json {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, ConstantState>) {
            return {{"probability", s.probability}};
          } else if constexpr (std::is_same_v<S, LinearModel>) {
            return linear_to_json(s);
          } else if constexpr (std::is_same_v<S, SvmState>) {
            return {{"linear", linear_to_json(s.linear)}, {"platt_a", s.platt.a}, {"platt_b", s.platt.b}};
          } else if constexpr (std::is_same_v<S, ForestModel>) {
            return {{"trees", trees_to_json(s.trees)}};
          } else if constexpr (std::is_same_v<S, BoostedModel>) {
            return {{"base_score", s.base_score}, {"learning_rate", s.learning_rate}, {"trees", trees_to_json(s.trees)}};
          } else if constexpr (std::is_same_v<S, AdaBoostModel>) {
            return {{"alphas", s.alphas}, {"stumps", trees_to_json(s.stumps)}};
          } else {
            return s.to_json();
          }
        },
        state_);
  }

  void state_from_json(const nlohmann::json& j) {
    if (degenerate_ || spec_.family == Family::Constant) {
      state_ = ConstantState{j.at("probability").get<double>()};
      return;
    }
    switch (spec_.family) {
      case Family::NaiveBayes: state_ = NaiveBayesModel::from_json(j); break;
      case Family::KNN: state_ = KnnModel::from_json(j); break;
      case Family::DecisionTree: state_ = Tree::from_json(j); break;
      case Family::LogisticRegression:
      case Family::SGDLinear: state_ = linear_from_json(j); break;
      case Family::LinearSVM:
        state_ = SvmState{linear_from_json(j.at("linear")), {j.at("platt_a").get<double>(), j.at("platt_b").get<double>()}};
        break;
      case Family::RandomForest: state_ = ForestModel{trees_from_json(j.at("trees"))}; break;
      case Family::GradientBoosting:
        state_ = BoostedModel{j.at("base_score").get<double>(), j.at("learning_rate").get<double>(),
                              trees_from_json(j.at("trees"))};
        break;
      case Family::AdaBoost:
        state_ = AdaBoostModel{trees_from_json(j.at("stumps")), j.at("alphas").get<std::vector<double>>()};
        break;
      case Family::CN2: state_ = Cn2Model::from_json(j); break;
      case Family::NeuralNet: state_ = Mlp::from_json(j); break;
      case Family::Constant: break;
    }
  }

  ClassifierSpec spec_;
  std::string target_, negative_, positive_;
  std::vector<std::string> feature_names_;
  std::vector<ColumnKind> feature_kinds_;
  EncodingRecipe recipe_;
  State state_;
  bool degenerate_ = false;
};

// Fits `spec` on every row of `table`. A table holding a single class yields
// a constant predictor for that class, with a warning.
inline TrainedModel train(const ClassifierSpec& spec, const DataTable& table, std::vector<std::string>* warnings) {
  spec.validate();
  if (!table.has_target()) throw PreconditionError("train: table has no target column");
  if (table.row_count() == 0) throw PreconditionError("train: table has no rows");
  if (table.has_missing_features()) throw PreconditionError("train: table has missing cells; impute first");

  TrainedModel m;
  m.spec_ = spec;
  m.target_ = table.target_name();
  m.positive_ = table.positive_label();
  m.negative_ = table.negative_label();
  for (auto idx : table.feature_indices()) {
    m.feature_names_.push_back(table.column(idx).name());
    m.feature_kinds_.push_back(table.column(idx).kind());
  }

  const auto y = table.labels();
  std::size_t pos = 0;
  for (auto v : y) pos += v;
  const double prevalence = static_cast<double>(pos) / static_cast<double>(y.size());
  if (spec.family == Family::Constant) {
    m.state_ = ConstantState{prevalence};
    return m;
  }
  if (pos == 0 || pos == y.size()) {
    if (warnings)
      warnings->push_back(std::string(family_display_name(spec.family)) +
                          ": training rows hold a single class; using a constant predictor");
    m.degenerate_ = true;
    m.state_ = ConstantState{prevalence};
    return m;
  }
  if (spec.family == Family::NaiveBayes) {
    m.state_ = fit_naive_bayes(table, std::get<NaiveBayesParams>(spec.params));
    return m;
  }
  if (spec.family == Family::CN2) {
    m.state_ = fit_cn2(table, std::get<Cn2Params>(spec.params));
    return m;
  }

  m.recipe_ = EncodingRecipe::fit(table, family_uses_standardized_encoding(spec.family));
  const EncodedMatrix x = m.recipe_.apply(table);
  switch (spec.family) {
    case Family::KNN: m.state_ = fit_knn(x, y, std::get<KnnParams>(spec.params)); break;
    case Family::DecisionTree: {
      const auto& p = std::get<TreeParams>(spec.params);
      const std::vector<double> w(x.rows, 1.0);
      m.state_ = fit_classification_tree(
          x, y, w, {static_cast<std::size_t>(p.max_depth), static_cast<std::size_t>(p.min_leaf), 0});
      break;
    }
    case Family::LogisticRegression: {
      FitStatus st;
      m.state_ = fit_logistic_regression(x, y, std::get<LogRegParams>(spec.params), &st);
      if (!st.converged && warnings)
        warnings->push_back("Logistic Regression: stopped at the epoch limit before the loss change fell below tol");
      break;
    }
    case Family::SGDLinear: m.state_ = fit_sgd_logistic(x, y, std::get<SgdParams>(spec.params), spec.seed); break;
    case Family::LinearSVM: {
      SvmState s;
      s.linear = fit_pegasos_svm(x, y, std::get<SvmParams>(spec.params), spec.seed);
      std::vector<double> scores(x.rows);
      for (std::size_t i = 0; i < x.rows; ++i) scores[i] = s.linear.score(x.row(i));
      s.platt = PlattScaling::fit(scores, y);
      m.state_ = std::move(s);
      break;
    }
    case Family::RandomForest:
      m.state_ = fit_random_forest(x, y, std::get<ForestParams>(spec.params), spec.seed);
      break;
    case Family::GradientBoosting:
      m.state_ = fit_gradient_boosting(x, y, std::get<BoostingParams>(spec.params));
      break;
    case Family::AdaBoost: m.state_ = fit_adaboost(x, y, std::get<AdaBoostParams>(spec.params)); break;
    case Family::NeuralNet: m.state_ = fit_mlp(x, y, std::get<MlpParams>(spec.params), spec.seed); break;
    default: throw UnsupportedError("unhandled model family");
  }
  return m;
}

inline std::vector<double> predict_proba(const TrainedModel& m, const DataTable& rows) { return m.predict_proba(rows); }
inline std::vector<std::uint8_t> predict_labels(const TrainedModel& m, const DataTable& rows) {
  return m.predict_labels(rows);
}

}  // namespace tabrank
