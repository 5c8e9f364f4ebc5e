#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "errors.hpp"
#include "ingest.hpp"
#include "metrics.hpp"
#include "models/classifier.hpp"
#include "resampling.hpp"
#include "rng.hpp"
#include "table.hpp"

namespace tabrank {

enum class ImputeMode { FoldSafe, Global };

struct PipelineOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 42;
  bool smote = true;
  // Oversample the whole table before splitting instead of each training fold.
  bool smote_global = false;
  SmoteConfig smote_config;
  ImputeMode impute = ImputeMode::FoldSafe;
  // Worker threads; 0 uses the hardware concurrency.
  std::size_t threads = 1;

  void validate() const {
    if (folds < 2) throw BoundsError("fold count must be at least 2, got " + std::to_string(folds));
    if (smote_config.k_neighbors < 1) throw ConfigError("SMOTE neighbor count must be at least 1");
    if (!(smote_config.target_ratio > 0.0 && smote_config.target_ratio <= 1.0))
      throw ConfigError("SMOTE target ratio must lie in (0, 1]");
  }
};

// What one (subset size, model, fold) task touched; reported to an optional
// observer so tests can check fold hygiene.
struct FoldTrace {
  std::size_t r = 0;
  std::size_t spec_index = 0;
  std::size_t fold = 0;
  std::vector<std::int64_t> imputer_rows;   // rows the imputer was fitted on (empty in global mode)
  std::vector<std::int64_t> train_rows;     // rows given to train(), synthetic rows as -1
  std::vector<std::int64_t> test_rows;      // rows scored
  std::vector<std::string> train_features;  // feature columns given to train()
};
using FoldObserver = std::function<void(const FoldTrace&)>;

struct FoldMetrics {
  std::size_t test_rows = 0;
  ConfusionMatrix confusion;
  Scores scores;
  double auc = std::numeric_limits<double>::quiet_NaN();  // NaN for a single-class test fold
};

struct CvResult {
  std::vector<FoldMetrics> folds;
  // Row-weighted means over folds; accuracy uses pooled counts.
  Scores mean;
  double auc = std::numeric_limits<double>::quiet_NaN();
  ConfusionMatrix pooled;
  std::optional<std::string> error;  // set when a fold failed; the means are then meaningless
  std::vector<std::string> warnings;

  bool ok() const noexcept { return !error.has_value(); }
};

inline void aggregate(CvResult& res) {
  if (!res.ok() || res.folds.empty()) return;
  double n = 0.0, prec = 0.0, rec = 0.0, f1 = 0.0, auc_w = 0.0, auc_n = 0.0;
  res.pooled = {};
  for (const auto& f : res.folds) {
    const double w = static_cast<double>(f.test_rows);
    n += w;
    prec += w * f.scores.precision;
    rec += w * f.scores.recall;
    f1 += w * f.scores.f1;
    if (!std::isnan(f.auc)) {
      auc_w += w * f.auc;
      auc_n += w;
    }
    res.pooled.tp += f.confusion.tp;
    res.pooled.fp += f.confusion.fp;
    res.pooled.fn += f.confusion.fn;
    res.pooled.tn += f.confusion.tn;
  }
  res.mean.accuracy = static_cast<double>(res.pooled.tp + res.pooled.tn) / static_cast<double>(res.pooled.total());
  res.mean.precision = prec / n;
  res.mean.recall = rec / n;
  res.mean.f1 = f1 / n;
  res.auc = auc_n > 0 ? auc_w / auc_n : std::numeric_limits<double>::quiet_NaN();
}

inline std::string subset_label(std::size_t r) {
  if (r == 1) return "Rank (1)";
  if (r == 2) return "Rank (1, 2)";
  return "Rank (1-" + std::to_string(r) + ")";
}

struct AccuracyMatrix {
  std::vector<std::string> feature_order;
  std::vector<std::string> models;          // display names, one per column
  std::vector<std::size_t> subset_sizes;    // one per row
  std::vector<std::vector<CvResult>> cells; // [row][model]
  std::vector<std::string> warnings;

  std::size_t rows() const noexcept { return cells.size(); }
  std::size_t cols() const noexcept { return models.size(); }
  std::optional<double> accuracy(std::size_t row, std::size_t model) const {
    const auto& c = cells[row][model];
    if (!c.ok()) return std::nullopt;
    return c.mean.accuracy;
  }
};

namespace detail {

// Runs fn(i) for i in [0, count) on `threads` workers. The first exception
// (by task index) is rethrown after all workers finish.
inline void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(count, 1));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Seed streams: every random draw in a run is keyed by (seed, stream, ...).
inline constexpr std::uint64_t kFoldStream = 1;
inline constexpr std::uint64_t kSmoteStream = 2;
inline constexpr std::uint64_t kModelStream = 3;
inline constexpr std::uint64_t kGlobalSmoteStream = 4;

inline FoldMetrics score_fold(std::span<const std::uint8_t> labels, std::span<const double> probs) {
  FoldMetrics fm;
  fm.test_rows = labels.size();
  std::vector<std::uint8_t> pred(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) pred[i] = probs[i] >= 0.5 ? 1 : 0;
  fm.confusion = confusion(labels, pred);
  fm.scores = scores(fm.confusion);
  try {
    fm.auc = auc(labels, probs);
  } catch (const DomainError&) {
    fm.auc = std::numeric_limits<double>::quiet_NaN();
  }
  return fm;
}

inline std::string describe(std::size_t r, const std::string& model, std::size_t fold, const std::string& msg) {
  return subset_label(r) + " / " + model + " / fold " + std::to_string(fold + 1) + ": " + msg;
}

// Core evaluation loop shared by cross_validate and sweep: every spec at every
// subset size in `sizes`, over one fold plan.
inline std::vector<std::vector<CvResult>> evaluate_cells(const DataTable& input, std::span<const std::string> order,
                                                         std::span<const std::size_t> sizes,
                                                         std::span<const ClassifierSpec> specs,
                                                         const PipelineOptions& opts, std::vector<std::string>* warnings,
                                                         const FoldObserver& observer) {
  opts.validate();
  if (!input.has_target()) throw PreconditionError("evaluation needs a target column");
  if (specs.empty()) throw ConfigError("no models to evaluate");
  for (const auto& s : specs) s.validate();

  std::vector<std::string> run_warnings;
  DataTable base = input;
  const bool global_impute = opts.impute == ImputeMode::Global || (opts.smote && opts.smote_global);
  if (opts.smote && opts.smote_global && opts.impute != ImputeMode::Global)
    run_warnings.push_back("SMOTE on the whole table requires imputing the whole table first");
  if (global_impute) base = apply_imputer(fit_imputer(base), base);
  if (opts.smote && opts.smote_global) {
    run_warnings.push_back("SMOTE applied before splitting: synthetic rows appear in test folds");
    base = smote(base, opts.smote_config, derive_seed(opts.seed, {kGlobalSmoteStream}), &run_warnings);
  }

  const auto labels = base.labels();
  const FoldPlan plan = stratified_kfold(labels, opts.folds, derive_seed(opts.seed, {kFoldStream}), &run_warnings);
  const std::size_t k = plan.k;
  std::vector<std::vector<std::size_t>> train_rows(k), test_rows(k);
  for (std::size_t f = 0; f < k; ++f) {
    train_rows[f] = plan.train_rows(f);
    test_rows[f] = plan.test_rows(f);
  }

  struct Slot {
    std::optional<FoldMetrics> metrics;
    std::string error;
    std::vector<std::string> warnings;
  };
  // slots[(si * specs + m) * k + f]
  std::vector<Slot> slots(sizes.size() * specs.size() * k);
  std::mutex observer_mutex;

  detail::parallel_for(sizes.size() * k, opts.threads, [&](std::size_t task) {
    const std::size_t si = task / k, f = task % k;
    const std::size_t r = sizes[si];
    auto slot = [&](std::size_t m) -> Slot& { return slots[(si * specs.size() + m) * k + f]; };

    DataTable train_table, smoted, test_table;
    std::vector<std::string> prep_warnings;
    std::vector<std::int64_t> imputer_rows;
    try {
      const DataTable sub = select_top_features(base, order, r);
      train_table = sub.take_rows(train_rows[f]);
      test_table = sub.take_rows(test_rows[f]);
      if (!global_impute) {
        const Imputer imp = fit_imputer(train_table);
        auto ids = train_table.row_ids();
        imputer_rows.assign(ids.begin(), ids.end());
        train_table = apply_imputer(imp, train_table);
        test_table = apply_imputer(imp, test_table);
      }
      smoted = train_table;
      if (opts.smote && !opts.smote_global) {
        try {
          smoted = smote(train_table, opts.smote_config, derive_seed(opts.seed, {kSmoteStream, r, f}), &prep_warnings);
        } catch (const ResampleError& e) {
          prep_warnings.push_back(std::string("SMOTE skipped: ") + e.what());
        }
      }
    } catch (const std::exception& e) {
      for (std::size_t m = 0; m < specs.size(); ++m) slot(m).error = e.what();
      return;
    }
    const auto test_labels = test_table.labels();

    for (std::size_t m = 0; m < specs.size(); ++m) {
      Slot& out = slot(m);
      if (m == 0) out.warnings = prep_warnings;
      try {
        ClassifierSpec spec = specs[m];
        spec.seed = derive_seed(opts.seed, {kModelStream, r, m, f});
        // The constant model is fitted on the original class balance: an
        // oversampled fold would only move its prior towards a tie.
        const DataTable& fit_on = spec.family == Family::Constant ? train_table : smoted;
        const TrainedModel model = train(spec, fit_on, &out.warnings);
        const auto probs = model.predict_proba(test_table);
        out.metrics = score_fold(test_labels, probs);
        if (observer) {
          FoldTrace t;
          t.r = r;
          t.spec_index = m;
          t.fold = f;
          t.imputer_rows = imputer_rows;
          t.train_rows.assign(fit_on.row_ids().begin(), fit_on.row_ids().end());
          t.test_rows.assign(test_table.row_ids().begin(), test_table.row_ids().end());
          t.train_features = fit_on.feature_names();
          std::lock_guard lock(observer_mutex);
          observer(t);
        }
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    }
  });

  std::vector<std::vector<CvResult>> cells(sizes.size(), std::vector<CvResult>(specs.size()));
  if (warnings) warnings->insert(warnings->end(), run_warnings.begin(), run_warnings.end());
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    for (std::size_t m = 0; m < specs.size(); ++m) {
      CvResult& cell = cells[si][m];
      cell.warnings = run_warnings;
      for (std::size_t f = 0; f < k; ++f) {
        const Slot& s = slots[(si * specs.size() + m) * k + f];
        for (const auto& w : s.warnings) {
          cell.warnings.push_back(describe(sizes[si], specs[m].name(), f, w));
          if (warnings) warnings->push_back(cell.warnings.back());
        }
        if (!s.metrics) {
          if (!cell.error) cell.error = describe(sizes[si], specs[m].name(), f, s.error);
          continue;
        }
        cell.folds.push_back(*s.metrics);
      }
      if (cell.error && warnings) warnings->push_back("failed: " + *cell.error);
      aggregate(cell);
    }
  }
  return cells;
}

}  // namespace detail

// k-fold cross-validation of one model on every feature of `table`. Equals
// the full-feature row of a sweep in which `spec` sits at `spec_index`.
inline CvResult cross_validate(const DataTable& table, const ClassifierSpec& spec, const PipelineOptions& opts,
                               std::size_t spec_index = 0, const FoldObserver& observer = {}) {
  const auto order = table.feature_names();
  const std::size_t sizes[] = {order.size()};
  // Constant placeholders ahead of `spec` only fix the seed derivation.
  std::vector<ClassifierSpec> specs(spec_index + 1, ClassifierSpec::defaults(Family::Constant));
  specs[spec_index] = spec;
  FoldObserver filtered;
  if (observer)
    filtered = [&](const FoldTrace& t) {
      if (t.spec_index == spec_index) observer(t);
    };
  return detail::evaluate_cells(table, order, sizes, specs, opts, nullptr, filtered)[0][spec_index];
}

// Incremental feature-subset sweep: every spec cross-validated on the top-1,
// top-2, ..., top-F features of `order`, all cells sharing one fold plan.
inline AccuracyMatrix sweep(const DataTable& table, std::span<const std::string> order,
                            std::span<const ClassifierSpec> specs, const PipelineOptions& opts,
                            const FoldObserver& observer = {}) {
  AccuracyMatrix mx;
  mx.feature_order.assign(order.begin(), order.end());
  for (const auto& s : specs) mx.models.push_back(s.name());
  for (std::size_t r = 1; r <= order.size(); ++r) mx.subset_sizes.push_back(r);
  // Validate the order before any work.
  (void)select_top_features(table, order, order.empty() ? 0 : 1);
  mx.cells = detail::evaluate_cells(table, order, mx.subset_sizes, specs, opts, &mx.warnings, observer);
  return mx;
}

struct GridResult {
  Hyperparameters best;
  double best_accuracy = 0.0;
  std::vector<std::pair<Hyperparameters, CvResult>> evaluated;
};

// Cross-validates every lattice point and returns the most accurate; ties go
// to the earliest point. Failed points are skipped.
inline GridResult grid_search(const DataTable& table, Family family, std::span<const Hyperparameters> grid,
                              const PipelineOptions& opts) {
  if (grid.empty()) throw ConfigError("grid search needs at least one parameter point");
  GridResult res;
  bool found = false;
  for (const auto& point : grid) {
    ClassifierSpec spec{family, point, opts.seed};
    CvResult cv = cross_validate(table, spec, opts);
    if (cv.ok() && (!found || cv.mean.accuracy > res.best_accuracy)) {
      res.best = point;
      res.best_accuracy = cv.mean.accuracy;
      found = true;
    }
    res.evaluated.emplace_back(point, std::move(cv));
  }
  if (!found) throw FitError("every grid point failed to evaluate");
  return res;
}

// Cartesian product of per-key value lists, e.g. {"max_depth": [1, 3]}; keys
// vary slowest-first in declaration order and omitted keys keep defaults.
inline std::vector<Hyperparameters> grid_from_json(Family family, const nlohmann::ordered_json& spec) {
  if (!spec.is_object() || spec.empty()) throw ConfigError("grid must be a nonempty JSON object of value lists");
  std::vector<nlohmann::json> points{nlohmann::json::object()};
  for (auto it = spec.begin(); it != spec.end(); ++it) {
    if (!it.value().is_array() || it.value().empty())
      throw ConfigError("grid entry '" + it.key() + "' must be a nonempty list");
    std::vector<nlohmann::json> next;
    for (const auto& p : points)
      for (const auto& v : it.value()) {
        nlohmann::json q = p;
        q[it.key()] = nlohmann::json::parse(v.dump());
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  std::vector<Hyperparameters> out;
  for (const auto& p : points) out.push_back(params_from_json(family, p));
  return out;
}

inline std::string format_fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline void write_matrix_csv(std::ostream& out, const AccuracyMatrix& mx) {
  std::vector<std::string> row{"Model/ Rank"};
  row.insert(row.end(), mx.models.begin(), mx.models.end());
  csv::write_row(out, row);
  for (std::size_t i = 0; i < mx.rows(); ++i) {
    row.assign(1, subset_label(mx.subset_sizes[i]));
    for (std::size_t m = 0; m < mx.cols(); ++m) {
      const auto a = mx.accuracy(i, m);
      row.push_back(a ? format_fixed3(*a) : "NA");
    }
    csv::write_row(out, row);
  }
}

inline void write_matrix_markdown(std::ostream& out, const AccuracyMatrix& mx) {
  out << "| Model/ Rank |";
  for (const auto& m : mx.models) out << ' ' << m << " |";
  out << "\n|---|";
  for (std::size_t m = 0; m < mx.cols(); ++m) out << "---:|";
  out << '\n';
  for (std::size_t i = 0; i < mx.rows(); ++i) {
    out << "| " << subset_label(mx.subset_sizes[i]) << " |";
    for (std::size_t m = 0; m < mx.cols(); ++m) {
      const auto a = mx.accuracy(i, m);
      out << ' ' << (a ? format_fixed3(*a) : "NA") << " |";
    }
    out << '\n';
  }
}

inline nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

inline nlohmann::json cv_to_json(const CvResult& c) {
  nlohmann::json j;
  if (!c.ok()) {
    j["error"] = *c.error;
    return j;
  }
  j["accuracy"] = c.mean.accuracy;
  j["precision"] = c.mean.precision;
  j["recall"] = c.mean.recall;
  j["f1"] = c.mean.f1;
  j["auc"] = number_or_null(c.auc);
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : c.folds)
    folds.push_back({{"test_rows", f.test_rows},
                     {"tp", f.confusion.tp},
                     {"fp", f.confusion.fp},
                     {"fn", f.confusion.fn},
                     {"tn", f.confusion.tn},
                     {"accuracy", f.scores.accuracy},
                     {"precision", f.scores.precision},
                     {"recall", f.scores.recall},
                     {"f1", f.scores.f1},
                     {"auc", number_or_null(f.auc)}});
  j["folds"] = folds;
  return j;
}

inline nlohmann::json matrix_to_json(const AccuracyMatrix& mx) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < mx.rows(); ++i) {
    nlohmann::json cells = nlohmann::json::object();
    for (std::size_t m = 0; m < mx.cols(); ++m) cells[mx.models[m]] = cv_to_json(mx.cells[i][m]);
    rows.push_back({{"label", subset_label(mx.subset_sizes[i])},
                    {"features", std::vector<std::string>(mx.feature_order.begin(),
                                                          mx.feature_order.begin() +
                                                              static_cast<std::ptrdiff_t>(mx.subset_sizes[i]))},
                    {"cells", cells}});
  }
  return {{"models", mx.models}, {"feature_order", mx.feature_order}, {"rows", rows}, {"warnings", mx.warnings}};
}

}  // namespace tabrank
