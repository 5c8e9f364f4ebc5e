#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "../errors.hpp"

namespace tabrank {

enum class Family {
  KNN,
  DecisionTree,
  LinearSVM,
  SGDLinear,
  RandomForest,
  NeuralNet,
  NaiveBayes,
  LogisticRegression,
  GradientBoosting,
  Constant,
  CN2,
  AdaBoost,
};

// Default roster, in the column order of the published accuracy table.
inline constexpr std::array<Family, 12> kDefaultRoster{
    Family::KNN,        Family::DecisionTree,       Family::LinearSVM,        Family::SGDLinear,
    Family::RandomForest, Family::NeuralNet,        Family::NaiveBayes,       Family::LogisticRegression,
    Family::GradientBoosting, Family::Constant,     Family::CN2,              Family::AdaBoost};

inline const char* family_id(Family f) {
  switch (f) {
    case Family::KNN: return "knn";
    case Family::DecisionTree: return "tree";
    case Family::LinearSVM: return "svm";
    case Family::SGDLinear: return "sgd";
    case Family::RandomForest: return "random_forest";
    case Family::NeuralNet: return "neural_net";
    case Family::NaiveBayes: return "naive_bayes";
    case Family::LogisticRegression: return "logreg";
    case Family::GradientBoosting: return "gradient_boosting";
    case Family::Constant: return "constant";
    case Family::CN2: return "cn2";
    case Family::AdaBoost: return "adaboost";
  }
  return "?";
}

inline const char* family_display_name(Family f) {
  switch (f) {
    case Family::KNN: return "kNN";
    case Family::DecisionTree: return "Tree";
    case Family::LinearSVM: return "SVM";
    case Family::SGDLinear: return "SGD";
    case Family::RandomForest: return "Random Forest";
    case Family::NeuralNet: return "Neural Network";
    case Family::NaiveBayes: return "Naive Bayes";
    case Family::LogisticRegression: return "Logistic Regression";
    case Family::GradientBoosting: return "Gradient Boosting";
    case Family::Constant: return "Constant";
    case Family::CN2: return "CN2 rule inducer";
    case Family::AdaBoost: return "AdaBoost";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  for (auto f : kDefaultRoster)
    if (s == family_id(f) || s == family_display_name(f)) return f;
  throw ConfigError("unknown model '" + s + "'");
}

struct ConstantParams {
  friend bool operator==(const ConstantParams&, const ConstantParams&) = default;
};

struct NaiveBayesParams {
  double alpha = 1.0;
  double var_floor = 1e-9;
  friend bool operator==(const NaiveBayesParams&, const NaiveBayesParams&) = default;
};

struct KnnParams {
  int k = 5;
  friend bool operator==(const KnnParams&, const KnnParams&) = default;
};

struct TreeParams {
  int max_depth = 12;
  int min_leaf = 2;
  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

struct LogRegParams {
  double l2 = 1e-4;
  int max_epochs = 500;
  double tol = 1e-6;
  friend bool operator==(const LogRegParams&, const LogRegParams&) = default;
};

struct SgdParams {
  double learning_rate = 0.01;
  int epochs = 50;
  double l2 = 1e-4;
  friend bool operator==(const SgdParams&, const SgdParams&) = default;
};

struct SvmParams {
  double l2 = 1e-4;
  int epochs = 100;
  friend bool operator==(const SvmParams&, const SvmParams&) = default;
};

struct ForestParams {
  int trees = 200;
  int max_depth = 15;
  int min_leaf = 1;
  bool bootstrap = true;
  // Features tried per split; 0 means floor(sqrt(encoded width)).
  int max_features = 0;
  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

struct BoostingParams {
  int rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_leaf = 1;
  friend bool operator==(const BoostingParams&, const BoostingParams&) = default;
};

struct AdaBoostParams {
  int rounds = 100;
  friend bool operator==(const AdaBoostParams&, const AdaBoostParams&) = default;
};

struct Cn2Params {
  int beam_width = 5;
  int min_coverage = 5;
  int max_rule_length = 5;
  // Candidate thresholds per numeric feature.
  int numeric_cuts = 8;
  int max_rules = 100;
  friend bool operator==(const Cn2Params&, const Cn2Params&) = default;
};

struct MlpParams {
  std::vector<int> hidden{64, 32, 16};
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 64;
  int epochs = 200;
  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(NaiveBayesParams, alpha, var_floor)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(KnnParams, k)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TreeParams, max_depth, min_leaf)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LogRegParams, l2, max_epochs, tol)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SgdParams, learning_rate, epochs, l2)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SvmParams, l2, epochs)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ForestParams, trees, max_depth, min_leaf, bootstrap, max_features)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BoostingParams, rounds, learning_rate, max_depth, min_leaf)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AdaBoostParams, rounds)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Cn2Params, beam_width, min_coverage, max_rule_length, numeric_cuts,
                                                max_rules)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(MlpParams, hidden, learning_rate, beta1, beta2, epsilon, batch_size,
                                                epochs)
inline void to_json(nlohmann::json& j, const ConstantParams&) { j = nlohmann::json::object(); }
inline void from_json(const nlohmann::json&, ConstantParams&) {}

// Alternatives are listed in Family enum order.
using Hyperparameters = std::variant<KnnParams, TreeParams, SvmParams, SgdParams, ForestParams, MlpParams,
                                     NaiveBayesParams, LogRegParams, BoostingParams, ConstantParams, Cn2Params,
                                     AdaBoostParams>;

inline Hyperparameters default_params(Family f) {
  switch (f) {
    case Family::KNN: return KnnParams{};
    case Family::DecisionTree: return TreeParams{};
    case Family::LinearSVM: return SvmParams{};
    case Family::SGDLinear: return SgdParams{};
    case Family::RandomForest: return ForestParams{};
    case Family::NeuralNet: return MlpParams{};
    case Family::NaiveBayes: return NaiveBayesParams{};
    case Family::LogisticRegression: return LogRegParams{};
    case Family::GradientBoosting: return BoostingParams{};
    case Family::Constant: return ConstantParams{};
    case Family::CN2: return Cn2Params{};
    case Family::AdaBoost: return AdaBoostParams{};
  }
  throw ConfigError("unknown family");
}

inline Family family_of(const Hyperparameters& p) { return static_cast<Family>(p.index()); }

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid hyperparameter: " + what);
}
}  // namespace detail

inline void validate(const ConstantParams&) {}
inline void validate(const NaiveBayesParams& p) {
  detail::require(p.alpha > 0, "naive_bayes.alpha > 0");
  detail::require(p.var_floor > 0, "naive_bayes.var_floor > 0");
}
inline void validate(const KnnParams& p) { detail::require(p.k >= 1, "knn.k >= 1"); }
inline void validate(const TreeParams& p) {
  detail::require(p.max_depth >= 1, "tree.max_depth >= 1");
  detail::require(p.min_leaf >= 1, "tree.min_leaf >= 1");
}
inline void validate(const LogRegParams& p) {
  detail::require(p.l2 >= 0, "logreg.l2 >= 0");
  detail::require(p.max_epochs >= 1, "logreg.max_epochs >= 1");
  detail::require(p.tol >= 0, "logreg.tol >= 0");
}
inline void validate(const SgdParams& p) {
  detail::require(p.learning_rate > 0, "sgd.learning_rate > 0");
  detail::require(p.epochs >= 1, "sgd.epochs >= 1");
  detail::require(p.l2 >= 0, "sgd.l2 >= 0");
}
inline void validate(const SvmParams& p) {
  detail::require(p.l2 > 0, "svm.l2 > 0");
  detail::require(p.epochs >= 1, "svm.epochs >= 1");
}
inline void validate(const ForestParams& p) {
  detail::require(p.trees >= 1, "random_forest.trees >= 1");
  detail::require(p.max_depth >= 1, "random_forest.max_depth >= 1");
  detail::require(p.min_leaf >= 1, "random_forest.min_leaf >= 1");
  detail::require(p.max_features >= 0, "random_forest.max_features >= 0");
}
inline void validate(const BoostingParams& p) {
  detail::require(p.rounds >= 1, "gradient_boosting.rounds >= 1");
  detail::require(p.learning_rate > 0, "gradient_boosting.learning_rate > 0");
  detail::require(p.max_depth >= 1, "gradient_boosting.max_depth >= 1");
  detail::require(p.min_leaf >= 1, "gradient_boosting.min_leaf >= 1");
}
inline void validate(const AdaBoostParams& p) { detail::require(p.rounds >= 1, "adaboost.rounds >= 1"); }
inline void validate(const Cn2Params& p) {
  detail::require(p.beam_width >= 1, "cn2.beam_width >= 1");
  detail::require(p.min_coverage >= 1, "cn2.min_coverage >= 1");
  detail::require(p.max_rule_length >= 1, "cn2.max_rule_length >= 1");
  detail::require(p.numeric_cuts >= 1, "cn2.numeric_cuts >= 1");
  detail::require(p.max_rules >= 1, "cn2.max_rules >= 1");
}
inline void validate(const MlpParams& p) {
  detail::require(!p.hidden.empty(), "neural_net.hidden nonempty");
  for (int h : p.hidden) detail::require(h >= 1, "neural_net.hidden sizes >= 1");
  detail::require(p.learning_rate > 0, "neural_net.learning_rate > 0");
  detail::require(p.beta1 >= 0 && p.beta1 < 1, "neural_net.beta1 in [0, 1)");
  detail::require(p.beta2 >= 0 && p.beta2 < 1, "neural_net.beta2 in [0, 1)");
  detail::require(p.epsilon > 0, "neural_net.epsilon > 0");
  detail::require(p.batch_size >= 1, "neural_net.batch_size >= 1");
  detail::require(p.epochs >= 1, "neural_net.epochs >= 1");
}

inline void validate(const Hyperparameters& p) {
  std::visit([](const auto& v) { validate(v); }, p);
}

inline nlohmann::json params_to_json(const Hyperparameters& p) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, p);
}

// Parses hyperparameters for `family`; omitted keys keep their defaults and
// unknown keys are rejected.
inline Hyperparameters params_from_json(Family family, const nlohmann::json& j) {
  Hyperparameters p = default_params(family);
  const nlohmann::json defaults = params_to_json(p);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!defaults.contains(it.key()))
      throw ConfigError(std::string("unknown hyperparameter '") + it.key() + "' for " + family_id(family));
  try {
    std::visit([&](auto& v) { v = j.get<std::decay_t<decltype(v)>>(); }, p);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad hyperparameter value for ") + family_id(family) + ": " + e.what());
  }
  validate(p);
  return p;
}

}  // namespace tabrank
