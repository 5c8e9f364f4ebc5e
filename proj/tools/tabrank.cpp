// tabrank command-line driver: rank, sweep, train, predict, validate-schema.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tabrank/evaluation.hpp"
#include "tabrank/ingest.hpp"
#include "tabrank/models/classifier.hpp"
#include "tabrank/ranking.hpp"
#include "tabrank/report.hpp"

namespace fs = std::filesystem;
using namespace tabrank;

namespace {

struct Common {
  std::string input;
  std::string schema;
  std::string preset;
  std::string out;
  std::uint64_t seed = 42;
};

struct RankOpts {
  std::vector<std::string> scorers;
  std::vector<std::string> formats{"csv", "json"};
  std::size_t bins = 4;
  std::size_t relieff_neighbors = 10;
  std::size_t relieff_samples = 0;
};

struct SweepOpts {
  std::vector<std::string> models;
  std::vector<std::string> scorers;
  std::vector<std::string> formats{"csv", "json"};
  std::string order_file;
  std::string rank_by = "consensus";
  std::size_t folds = 10;
  bool smote = true;
  bool smote_global = false;
  bool global_impute = false;
  std::size_t threads = 0;
  std::size_t smote_neighbors = 5;
  double smote_ratio = 1.0;
};

struct TrainOpts {
  std::string model = "random_forest";
  std::string params_file;
  std::string grid_file;
  std::size_t folds = 10;
  bool smote = true;
  std::size_t threads = 0;
};

struct PredictOpts {
  std::string model_file;
};

Schema resolve_schema(const Common& c) {
  if (!c.schema.empty() && !c.preset.empty()) throw ConfigError("give either --schema or --preset, not both");
  if (!c.preset.empty()) {
    if (c.preset != "dental2018") throw ConfigError("unknown preset '" + c.preset + "' (known: dental2018)");
    return dental2018_schema();
  }
  if (c.schema.empty()) throw ConfigError("a schema is required: pass --schema FILE or --preset dental2018");
  return load_schema(c.schema);
}

DataTable load_input(const Common& c, const Schema& schema, bool quiet = false) {
  if (c.input.empty()) throw ConfigError("--input is required");
  LoadReport report;
  DataTable t = load_table(c.input, schema, &report);
  if (!quiet && report.dropped_missing_target > 0)
    std::cerr << "note: dropped " << report.dropped_missing_target << " rows with no target value\n";
  return t;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream o(p, std::ios::binary);
  if (!o) throw ConfigError("cannot write '" + p.string() + "'");
  return o;
}

fs::path out_dir(const Common& c) {
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  fs::create_directories(dir);
  return dir;
}

std::vector<Scorer> parse_scorers(const std::vector<std::string>& names) {
  std::vector<Scorer> out;
  if (names.empty()) return {kAllScorers.begin(), kAllScorers.end()};
  for (const auto& n : names) out.push_back(parse_scorer(n));
  return out;
}

bool wants(const std::vector<std::string>& formats, const std::string& f) {
  for (const auto& x : formats) {
    if (x != "csv" && x != "json" && x != "md") throw ConfigError("unknown format '" + x + "' (csv, json, md)");
    if (x == f) return true;
  }
  return false;
}

// Ranking statistics need complete columns; impute the whole table when
// cells are missing.
DataTable complete_for_ranking(const DataTable& t) {
  if (!t.has_missing_features()) return t;
  std::cerr << "note: imputing missing cells (median / mode) before ranking\n";
  return apply_imputer(fit_imputer(t), t);
}

std::vector<std::string> read_order_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open order file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto s = std::string(detail::trim(line));
    if (s.empty() || s[0] == '#') continue;
    out.push_back(s);
  }
  return out;
}

int cmd_rank(const Common& c, const RankOpts& o) {
  const Schema schema = resolve_schema(c);
  const DataTable table = complete_for_ranking(load_input(c, schema));
  ScorerConfig cfg;
  cfg.bins = o.bins;
  cfg.relieff_neighbors = o.relieff_neighbors;
  cfg.relieff_samples = o.relieff_samples;
  cfg.seed = c.seed;
  std::vector<std::string> warnings;
  const auto scorers = parse_scorers(o.scorers);
  const RankingTable rt = build_ranking(table, cfg, scorers, &warnings);
  const fs::path dir = out_dir(c);
  if (wants(o.formats, "csv")) {
    auto f = open_out(dir / "ranking.csv");
    write_ranking_csv(f, rt);
  }
  if (wants(o.formats, "json")) {
    auto f = open_out(dir / "ranking.json");
    f << ranking_to_json(rt).dump(2) << '\n';
  }
  if (wants(o.formats, "md")) {
    auto f = open_out(dir / "ranking.md");
    write_ranking_markdown(f, rt);
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "ranked " << rt.features.size() << " features; consensus order:\n";
  for (std::size_t i = 0; i < rt.consensus_order.size(); ++i)
    std::cout << "  " << (i + 1) << ". " << rt.consensus_order[i] << '\n';
  return 0;
}

PipelineOptions pipeline(const Common& c, std::size_t folds, bool smote, bool smote_global, bool global_impute,
                         std::size_t threads) {
  PipelineOptions p;
  p.folds = folds;
  p.seed = c.seed;
  p.smote = smote;
  p.smote_global = smote_global;
  p.impute = global_impute ? ImputeMode::Global : ImputeMode::FoldSafe;
  p.threads = threads;
  return p;
}

int cmd_sweep(const Common& c, const SweepOpts& o) {
  const Schema schema = resolve_schema(c);
  const DataTable table = load_input(c, schema);
  std::vector<ClassifierSpec> specs;
  if (o.models.empty()) {
    for (auto f : kDefaultRoster) specs.push_back(ClassifierSpec::defaults(f, c.seed));
  } else {
    for (const auto& m : o.models) specs.push_back(ClassifierSpec::defaults(parse_family(m), c.seed));
  }
  std::vector<std::string> order;
  if (!o.order_file.empty()) {
    order = read_order_file(o.order_file);
  } else {
    ScorerConfig cfg;
    cfg.seed = c.seed;
    const auto scorers = parse_scorers(o.scorers);
    const RankingTable rt = build_ranking(complete_for_ranking(table), cfg, scorers);
    order = o.rank_by == "consensus" ? rt.consensus_order : rt.order_by(parse_scorer(o.rank_by));
  }
  PipelineOptions p = pipeline(c, o.folds, o.smote, o.smote_global, o.global_impute, o.threads);
  p.smote_config.k_neighbors = o.smote_neighbors;
  p.smote_config.target_ratio = o.smote_ratio;
  const AccuracyMatrix mx = sweep(table, order, specs, p);

  const fs::path dir = out_dir(c);
  if (wants(o.formats, "csv")) {
    auto f = open_out(dir / "matrix.csv");
    write_matrix_csv(f, mx);
  }
  if (wants(o.formats, "json")) {
    auto f = open_out(dir / "matrix.json");
    f << matrix_to_json(mx).dump(2) << '\n';
  }
  if (wants(o.formats, "md")) {
    auto f = open_out(dir / "matrix.md");
    write_matrix_markdown(f, mx);
  }
  {
    auto f = open_out(dir / "accuracy.svg");
    write_accuracy_svg(f, mx);
  }
  {
    auto f = open_out(dir / "warnings.txt");
    for (const auto& w : mx.warnings) f << w << '\n';
  }
  std::size_t failed = 0;
  for (std::size_t i = 0; i < mx.rows(); ++i)
    for (std::size_t m = 0; m < mx.cols(); ++m) failed += !mx.cells[i][m].ok();
  std::cout << "swept " << mx.rows() << " subsets x " << mx.cols() << " models";
  if (failed) std::cout << " (" << failed << " cells NA, see warnings.txt)";
  std::cout << "; wrote " << dir.string() << '\n';
  return 0;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + std::string(e.what()));
  }
}

int cmd_train(const Common& c, const TrainOpts& o) {
  const Schema schema = resolve_schema(c);
  const DataTable raw = load_input(c, schema);
  const Family family = parse_family(o.model);
  ClassifierSpec spec = ClassifierSpec::defaults(family, c.seed);
  if (!o.params_file.empty()) spec.params = params_from_json(family, read_json_file(o.params_file));
  if (!o.grid_file.empty()) {
    std::ifstream in(o.grid_file);
    if (!in) throw ConfigError("cannot open '" + o.grid_file + "'");
    nlohmann::ordered_json g;
    try {
      g = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("'" + o.grid_file + "' is not valid JSON: " + std::string(e.what()));
    }
    const auto grid = grid_from_json(family, g);
    const auto res = grid_search(raw, family, grid, pipeline(c, o.folds, o.smote, false, false, o.threads));
    spec.params = res.best;
    std::cout << "grid search: best CV accuracy " << format_fixed3(res.best_accuracy) << " with "
              << params_to_json(res.best).dump() << '\n';
  }
  const Imputer imputer = fit_imputer(raw);
  DataTable table = apply_imputer(imputer, raw);
  std::vector<std::string> warnings;
  if (o.smote && family != Family::Constant) {
    try {
      table = smote(table, SmoteConfig{}, derive_seed(c.seed, {detail::kSmoteStream}), &warnings);
    } catch (const ResampleError& e) {
      warnings.push_back(std::string("SMOTE skipped: ") + e.what());
    }
  }
  const TrainedModel model = train(spec, table, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  nlohmann::json j = model.to_json();
  j["imputer"] = imputer;
  j["schema"] = schema;
  const fs::path path = c.out.empty() ? fs::path("model.json") : fs::path(c.out);
  auto f = open_out(path);
  f << j.dump() << '\n';
  std::cout << "trained " << family_display_name(family) << " on " << raw.row_count() << " rows; wrote "
            << path.string() << '\n';
  return 0;
}

int cmd_predict(const Common& c, const PredictOpts& o) {
  const nlohmann::json j = read_json_file(o.model_file);
  const TrainedModel model = TrainedModel::from_json(j);
  Schema schema = (c.schema.empty() && c.preset.empty()) ? schema_from_json(j.at("schema")) : resolve_schema(c);
  if (c.input.empty()) throw ConfigError("--input is required");
  LoadReport report;
  const DataTable raw = load_table(c.input, schema, &report, false);
  const Imputer imputer = imputer_from_json(j.at("imputer"));
  const DataTable table = apply_imputer(imputer, raw);
  const auto probs = model.predict_proba(table);
  const fs::path path = c.out.empty() ? fs::path("predictions.csv") : fs::path(c.out);
  auto f = open_out(path);
  csv::write_row(f, {"row", "probability", "label"});
  char buf[40];
  for (std::size_t i = 0; i < probs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", probs[i]);
    csv::write_row(f, {std::to_string(table.row_ids()[i]), buf,
                       probs[i] >= 0.5 ? model.positive_label() : model.negative_label()});
  }
  std::cout << "scored " << probs.size() << " rows; wrote " << path.string() << '\n';
  return 0;
}

int cmd_validate(const Common& c) {
  const Schema schema = resolve_schema(c);
  std::cout << "schema ok: " << schema.columns.size() << " columns, target " << schema.target << " (positive '"
            << schema.positive_label << "')\n";
  if (!c.input.empty()) {
    LoadReport report;
    const DataTable t = load_table(c.input, schema, &report);
    std::cout << "input ok: " << t.row_count() << " rows kept of " << report.rows_read << " read, "
              << report.dropped_missing_target << " dropped for a missing target, missing feature cells "
              << format_fixed3(100.0 * report.missing_fraction()) << "%\n";
  }
  return 0;
}

void add_common(CLI::App* app, Common& c, bool needs_input = true) {
  auto* in = app->add_option("--input", c.input, "input CSV file");
  if (needs_input) in->required();
  app->add_option("--schema", c.schema, "schema JSON file");
  app->add_option("--preset", c.preset, "built-in schema (dental2018)");
  app->add_option("--seed", c.seed, "random seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature ranking and classifier evaluation for tabular CSV data"};
  app.require_subcommand(1);
  Common common;
  RankOpts rank;
  SweepOpts sw;
  TrainOpts tr;
  PredictOpts pr;

  auto* rank_cmd = app.add_subcommand("rank", "score and rank features");
  add_common(rank_cmd, common);
  rank_cmd->add_option("--out", common.out, "output directory");
  rank_cmd->add_option("--scorers", rank.scorers, "scorers to run (default: all)")->delimiter(',');
  rank_cmd->add_option("--format", rank.formats, "output formats: csv, json, md")->delimiter(',');
  rank_cmd->add_option("--bins", rank.bins, "equal-frequency bins for numeric features")->capture_default_str();
  rank_cmd->add_option("--relieff-neighbors", rank.relieff_neighbors)->capture_default_str();
  rank_cmd->add_option("--relieff-samples", rank.relieff_samples, "0 = every row")->capture_default_str();

  auto* sweep_cmd = app.add_subcommand("sweep", "cross-validate models on growing top-ranked feature subsets");
  add_common(sweep_cmd, common);
  sweep_cmd->add_option("--out", common.out, "output directory");
  sweep_cmd->add_option("--models", sw.models, "model ids (default: all twelve)")->delimiter(',');
  sweep_cmd->add_option("--scorers", sw.scorers, "scorers used to order features")->delimiter(',');
  sweep_cmd->add_option("--order", sw.order_file, "file listing the feature order, one name per line");
  sweep_cmd->add_option("--rank-by", sw.rank_by, "consensus or a scorer name")->capture_default_str();
  sweep_cmd->add_option("--folds", sw.folds)->capture_default_str();
  sweep_cmd->add_flag("--smote,!--no-smote", sw.smote, "oversample the minority class in training folds");
  sweep_cmd->add_flag("--smote-global", sw.smote_global, "oversample the whole table before splitting");
  sweep_cmd->add_flag("--global-impute", sw.global_impute, "fit the imputer on the whole table");
  sweep_cmd->add_option("--smote-neighbors", sw.smote_neighbors)->capture_default_str();
  sweep_cmd->add_option("--smote-ratio", sw.smote_ratio)->capture_default_str();
  sweep_cmd->add_option("--threads", sw.threads, "worker threads, 0 = all cores")->capture_default_str();
  sweep_cmd->add_option("--format", sw.formats, "output formats: csv, json, md")->delimiter(',');

  auto* train_cmd = app.add_subcommand("train", "fit one model on the whole input and save it");
  add_common(train_cmd, common);
  train_cmd->add_option("--out", common.out, "model file to write")->capture_default_str();
  train_cmd->add_option("--model", tr.model, "model id")->capture_default_str();
  train_cmd->add_option("--params", tr.params_file, "JSON file of hyperparameters");
  train_cmd->add_option("--grid", tr.grid_file, "JSON grid of hyperparameter lists to search by CV");
  train_cmd->add_option("--folds", tr.folds, "folds for --grid")->capture_default_str();
  train_cmd->add_flag("--smote,!--no-smote", tr.smote, "oversample the minority class before fitting");
  train_cmd->add_option("--threads", tr.threads)->capture_default_str();

  auto* predict_cmd = app.add_subcommand("predict", "score rows with a saved model");
  add_common(predict_cmd, common);
  predict_cmd->add_option("--model", pr.model_file, "model file from train")->required();
  predict_cmd->add_option("--out", common.out, "predictions CSV to write");

  auto* validate_cmd = app.add_subcommand("validate-schema", "check a schema and optionally an input file");
  add_common(validate_cmd, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*rank_cmd) return cmd_rank(common, rank);
    if (*sweep_cmd) return cmd_sweep(common, sw);
    if (*train_cmd) return cmd_train(common, tr);
    if (*predict_cmd) return cmd_predict(common, pr);
    if (*validate_cmd) return cmd_validate(common);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_usage_error(e) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
