// Acceptance driver: one PASS / FAIL / SKIP line per criterion, exit status 1
// if anything failed. Criteria 10-12 need the dental provider file; point
// TABRANK_DENTAL_CSV at it to enable them.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include "support.hpp"
#include "tabrank/evaluation.hpp"
#include "tabrank/ingest.hpp"
#include "tabrank/metrics.hpp"
#include "tabrank/models/gradient_check.hpp"
#include "tabrank/ranking.hpp"
#include "tabrank/resampling.hpp"

namespace fs = std::filesystem;
using namespace tabrank;
namespace ts = testing_support;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Pass;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::Fail, std::move(d)}; }
Outcome skip(std::string d) { return {Status::Skip, std::move(d)}; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const char* dataset_path() {
  const char* p = std::getenv("TABRANK_DENTAL_CSV");
  return p && *p ? p : nullptr;
}

// 1 ---------------------------------------------------------------------

Outcome scorer_oracles() {
  std::size_t tables = 0, bad = 0;
  std::string first_bad;
  auto check = [&](const char* what, double got, double want, const std::vector<std::vector<std::uint64_t>>& m) {
    if (ts::close_rel(got, want, 1e-12)) return;
    if (bad++ == 0) {
      first_bad = std::string(what) + " on [";
      for (const auto& r : m) first_bad += "[" + std::to_string(r[0]) + "," + std::to_string(r[1]) + "]";
      first_bad += "]: " + fmt("%.17g", got) + " vs " + fmt("%.17g", want);
    }
  };
  for (std::size_t values = 1; values <= 3; ++values) {
    const std::size_t cells = values * 2;
    std::vector<std::uint64_t> c(cells, 0);
    while (true) {
      std::vector<std::vector<std::uint64_t>> m(values, std::vector<std::uint64_t>(2));
      std::uint64_t total = 0;
      for (std::size_t i = 0; i < cells; ++i) total += m[i / 2][i % 2] = c[i];
      if (total > 0) {
        ++tables;
        const ContingencyTable ct(m);
        const auto s = ts::oracle::expand(m);
        check("information_gain", information_gain(ct), ts::oracle::info_gain(s), m);
        check("gain_ratio", gain_ratio(ct), ts::oracle::gain_ratio(s), m);
        check("gini_gain", gini_gain(ct), ts::oracle::gini_gain(s), m);
        const auto x = chi_square(ct);
        const auto xo = ts::oracle::chi_square(s);
        if (x.has_value() != xo.has_value()) {
          if (bad++ == 0) first_bad = "chi_square applicability differs";
        } else if (x) {
          check("chi_square", *x, *xo, m);
        }
      }
      std::size_t i = 0;
      while (i < cells && ++c[i] > 6) c[i++] = 0;
      if (i == cells) break;
    }
  }
  const std::string d = std::to_string(tables) + " tables";
  return bad ? fail(d + ", " + std::to_string(bad) + " mismatches; first " + first_bad) : pass(d);
}

// 2 ---------------------------------------------------------------------

Outcome relieff_brute_force() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    ts::TableShape s;
    s.rows = 4 + seed % 47;
    s.numeric = seed % 4;
    s.categorical = 1 + (seed / 4) % 3;
    s.integer_values = seed % 3 == 0;
    const auto t = ts::random_table(1000 + seed, s);
    ScorerConfig cfg;
    cfg.relieff_neighbors = 1 + seed % 7;
    const auto w = relieff(t, cfg);
    const auto ref = ts::oracle::relieff(t, cfg.relieff_neighbors);
    if (w.size() != ref.size()) return fail("seed " + std::to_string(seed) + ": weight count differs");
    for (std::size_t f = 0; f < w.size(); ++f) worst = std::max(worst, std::abs(w[f] - ref[f]));
  }
  const std::string d = "max |diff| " + fmt("%.3g", worst) + " over 100 tables";
  return worst <= 1e-12 ? pass(d) : fail(d);
}

// 3 ---------------------------------------------------------------------

Outcome auc_pairwise() {
  std::mt19937_64 gen(2024);
  double worst = 0.0;
  bool monotone = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen() % 199;
    std::vector<std::uint8_t> y(n);
    std::vector<double> s(n), m(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = gen() % 3 == 0;
      s[i] = static_cast<double>(gen() % 12) / 4.0;  // few distinct values, many ties
    }
    y[0] = 1;
    y[1] = 0;
    for (std::size_t i = 0; i < n; ++i) m[i] = std::exp(2.0 * s[i]) - 7.0;
    const double a = auc(y, s);
    worst = std::max(worst, std::abs(a - ts::oracle::pairwise_auc(y, s)));
    monotone = monotone && auc(y, m) == a;
  }
  const std::string d = "max |diff| " + fmt("%.3g", worst) + (monotone ? ", monotone map exact" : ", monotone map differs");
  return worst <= 1e-12 && monotone ? pass(d) : fail(d);
}

// 4 ---------------------------------------------------------------------

Outcome gradient_checks() {
  ts::TableShape s;
  s.rows = 48;
  s.numeric = 4;
  s.categorical = 2;
  const auto t = ts::random_table(77, s);
  const auto x = encode_for_model(t, true);
  const auto y = t.labels();
  std::string d;
  bool ok = true;
  for (auto f : {Family::LogisticRegression, Family::SGDLinear, Family::NeuralNet}) {
    GradientCheckConfig cfg;  // 20 points, 64-32-16 hidden layers
    const auto r = numeric_gradient_check(f, x, y, cfg);
    ok = ok && r.points == 20 && r.max_relative_error < 1e-4;
    if (!d.empty()) d += ", ";
    d += std::string(family_id(f)) + " " + fmt("%.2e", r.max_relative_error);
    if (f == Family::NeuralNet) d += " (" + std::to_string(r.rejected_points) + " kink points redrawn)";
  }
  return ok ? pass(d) : fail(d);
}

// 5 ---------------------------------------------------------------------

// Squared distances on the same standardized encoding SMOTE searches in.
double sq_dist(const EncodedMatrix& e, std::size_t a, std::size_t b) {
  double d = 0;
  for (std::size_t c = 0; c < e.cols; ++c) {
    const double v = e.at(a, c) - e.at(b, c);
    d += v * v;
  }
  return d;
}

Outcome smote_invariants() {
  std::size_t tables = 0, synthetic = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ts::TableShape s;
    s.rows = 30 + seed * 2;
    s.numeric = 1 + seed % 4;
    s.categorical = seed % 3;
    s.positive_rate = 0.1 + 0.02 * static_cast<double>(seed % 10);
    const auto t = ts::random_table(500 + seed, s);
    const auto y = t.labels();
    std::size_t pos = 0;
    for (auto v : y) pos += v;
    const std::size_t n_min = std::min(pos, y.size() - pos), n_maj = y.size() - n_min;
    if (n_min < 2 || n_min == n_maj) continue;
    const std::uint8_t minority = pos <= y.size() - pos ? 1 : 0;
    SmoteConfig cfg;
    cfg.target_ratio = seed % 2 ? 1.0 : 0.75;
    const std::size_t wanted = static_cast<std::size_t>(std::ceil(cfg.target_ratio * static_cast<double>(n_maj) - 1e-9));
    if (wanted <= n_min) continue;
    const std::size_t k = std::min(cfg.k_neighbors, n_min - 1);
    const auto out = smote(t, cfg, seed);
    ++tables;
    const std::string where = "table " + std::to_string(seed) + ": ";

    const auto oy = out.labels();
    std::size_t out_min = 0;
    for (auto v : oy) out_min += v == minority;
    if (out_min != wanted)
      return fail(where + "minority count " + std::to_string(out_min) + ", target " + std::to_string(wanted));

    // Originals: same cells, serialized byte for byte.
    std::vector<std::size_t> head(t.row_count());
    std::iota(head.begin(), head.end(), std::size_t{0});
    std::ostringstream before, after;
    write_table(before, t);
    write_table(after, out.take_rows(head));
    if (before.str() != after.str()) return fail(where + "original rows changed");

    // Each synthetic row must sit inside the box spanned by some minority row
    // and one of its k nearest minority neighbors (ties at the k-th distance
    // admitted).
    std::vector<std::size_t> mins;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == minority) mins.push_back(i);
    const auto enc = encode_for_model(t, true);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (auto a : mins) {
      std::vector<double> d;
      for (auto b : mins)
        if (b != a) d.push_back(sq_dist(enc, a, b));
      std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
      const double kth = d[k - 1];
      for (auto b : mins)
        if (b != a && sq_dist(enc, a, b) <= kth) pairs.emplace_back(a, b);
    }
    std::vector<std::size_t> numeric;
    for (auto fi : t.feature_indices())
      if (t.column(fi).is_numeric()) numeric.push_back(fi);
    for (std::size_t i = t.row_count(); i < out.row_count(); ++i) {
      ++synthetic;
      if (oy[i] != minority) return fail(where + "synthetic row has the majority label");
      const bool inside = std::any_of(pairs.begin(), pairs.end(), [&](const auto& p) {
        for (auto fi : numeric) {
          const Column& c = t.column(fi);
          const double v = out.column(c.name()).number(i);
          const double a = c.number(p.first), b = c.number(p.second);
          if (v < std::min(a, b) || v > std::max(a, b)) return false;
        }
        return true;
      });
      if (!inside) return fail(where + "synthetic row " + std::to_string(i) + " outside every seed-neighbor interval");
    }
  }
  return pass(std::to_string(tables) + " tables, " + std::to_string(synthetic) + " synthetic rows");
}

// 6 ---------------------------------------------------------------------

double prevalence_of_majority(const DataTable& t) {
  const auto y = t.labels();
  std::size_t pos = 0;
  for (auto v : y) pos += v;
  return static_cast<double>(std::max(pos, y.size() - pos)) / static_cast<double>(y.size());
}

Outcome constant_identity() {
  PipelineOptions opts;
  opts.threads = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    ts::TableShape s;
    s.rows = 20 + seed * 7;
    s.positive_rate = 0.05 + 0.03 * static_cast<double>(seed % 15);
    s.missing_rate = seed % 3 == 0 ? 0.1 : 0.0;
    const auto t = ts::random_table(900 + seed, s);
    const auto r = cross_validate(t, ClassifierSpec::defaults(Family::Constant), opts);
    if (!r.ok()) return fail("seed " + std::to_string(seed) + ": " + *r.error);
    worst = std::max(worst, std::abs(r.mean.accuracy - prevalence_of_majority(t)));
  }
  std::string d = "30 tables, max |diff| " + fmt("%.3g", worst);
  if (worst > 1e-12) return fail(d);
  if (const char* path = dataset_path()) {
    const auto t = load_table(path, dental2018_schema());
    const auto r = cross_validate(t, ClassifierSpec::defaults(Family::Constant), opts);
    if (!r.ok()) return fail(d + "; dataset run failed: " + *r.error);
    const std::string shown = format_fixed3(r.mean.accuracy);
    d += "; dataset Constant accuracy " + shown;
    if (shown != "0.811") return fail(d + " (expected 0.811)");
  } else {
    d += "; dataset check skipped (TABRANK_DENTAL_CSV unset)";
  }
  return pass(d);
}

// 7 ---------------------------------------------------------------------

struct Synthetic {
  DataTable table;
  std::vector<std::string> informative;  // heaviest weight first
  double rule_accuracy = 0.0;            // noise-free rule against the noisy labels
};

// Five informative features drive a linear score with Gaussian noise;
// labels are the top 20% of the noisy score. Fifteen pure-noise features.
Synthetic make_synthetic(std::size_t n, std::uint64_t seed) {
  constexpr std::size_t kFeatures = 20;
  const double weights[] = {2.0, 1.5, 1.0, 0.75, 0.5};
  const std::size_t slots[] = {13, 2, 17, 6, 9};  // informative columns, scattered
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  std::vector<std::vector<double>> x(kFeatures, std::vector<double>(n));
  for (auto& col : x)
    for (auto& v : col) v = z(gen);
  std::vector<double> clean(n), noisy(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 5; ++j) clean[i] += weights[j] * x[slots[j]][i];
    noisy[i] = clean[i] + 0.4 * z(gen);
  }
  std::vector<double> sorted = noisy;
  std::sort(sorted.begin(), sorted.end());
  const double cut = sorted[n * 8 / 10];
  std::vector<std::string> y(n);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = noisy[i] >= cut ? "pos" : "neg";
    agree += (clean[i] >= cut) == (noisy[i] >= cut);
  }
  std::vector<Column> cols;
  std::vector<std::string> names;
  for (std::size_t f = 0; f < kFeatures; ++f) {
    char name[8];
    std::snprintf(name, sizeof name, "x%02zu", f + 1);
    names.push_back(name);
    cols.push_back(Column::numeric(name, std::move(x[f])));
  }
  cols.push_back(Column::categorical("y", y, {}, std::vector<std::string>{"neg", "pos"}));
  Synthetic s{DataTable(std::move(cols), "y", "pos"), {}, static_cast<double>(agree) / static_cast<double>(n)};
  for (auto slot : slots) s.informative.push_back(names[slot]);
  return s;
}

Outcome synthetic_recovery() {
  const auto syn = make_synthetic(2000, 20260101);
  std::string d = "rule accuracy " + format_fixed3(syn.rule_accuracy);
  bool ok = true;

  // (a)
  ScorerConfig sc;
  const Scorer ig[] = {Scorer::InfoGain};
  const auto order = build_ranking(syn.table, sc, ig).order_by(Scorer::InfoGain);
  std::size_t worst_pos = 0;
  for (const auto& f : syn.informative)
    worst_pos = std::max<std::size_t>(worst_pos, std::find(order.begin(), order.end(), f) - order.begin() + 1);
  d += "; (a) informative features within top " + std::to_string(worst_pos);
  ok = ok && worst_pos <= 8;

  // (b)
  PipelineOptions opts;
  d += "; (b)";
  for (auto f : {Family::RandomForest, Family::GradientBoosting, Family::AdaBoost, Family::NeuralNet}) {
    const auto r = cross_validate(syn.table, ClassifierSpec::defaults(f, 42), opts);
    const double acc = r.ok() ? r.mean.accuracy : 0.0;
    d += std::string(" ") + family_id(f) + " " + (r.ok() ? format_fixed3(acc) : "NA");
    ok = ok && r.ok() && acc >= 0.90;
  }

  // (c) top-5 informative against the single most informative feature.
  auto subset = [&](std::size_t r) {
    std::vector<Column> cols;
    for (std::size_t i = 0; i < r; ++i) cols.push_back(syn.table.column(syn.informative[i]));
    cols.push_back(syn.table.target());
    return syn.table.with_columns(std::move(cols));
  };
  const DataTable one = subset(1), five = subset(5);
  std::size_t regressions = 0, models = 0;
  std::string which;
  for (auto f : kDefaultRoster) {
    ++models;
    const auto spec = ClassifierSpec::defaults(f, 42);
    const auto a1 = cross_validate(one, spec, opts), a5 = cross_validate(five, spec, opts);
    if (!a1.ok() || !a5.ok() || a5.mean.accuracy < a1.mean.accuracy - 0.02) {
      ++regressions;
      which += " " + spec.name();
    }
  }
  d += "; (c) " + std::to_string(models - regressions) + "/" + std::to_string(models) + " models hold up";
  if (regressions) d += " (not:" + which + ")";
  ok = ok && regressions == 0;
  return ok ? pass(d) : fail(d);
}

// 8 ---------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + TABRANK_CLI + "\" " + args + " >\"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome sweep_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("tabrank_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  struct Cleanup {
    fs::path p;
    ~Cleanup() { fs::remove_all(p); }
  } cleanup{dir};
  {
    auto syn = make_synthetic(200, 8);
    std::ofstream data(dir / "data.csv", std::ios::binary);
    write_table(data, syn.table);
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& f : syn.table.feature_names()) cols.push_back({{"name", f}, {"kind", "numeric"}});
    std::ofstream(dir / "schema.json")
        << nlohmann::json{{"target", {{"name", "y"}, {"labels", {"neg", "pos"}}, {"positive", "pos"}}},
                          {"columns", cols}}
               .dump();
  }
  const std::string base = "sweep --input \"" + (dir / "data.csv").string() + "\" --schema \"" +
                           (dir / "schema.json").string() + "\" --seed 11 --folds 5";
  const std::pair<const char*, const char*> runs[] = {{"a", "1"}, {"b", "4"}};
  for (auto [name, threads] : runs) {
    const int code = run_cli(base + " --threads " + threads + " --out \"" + (dir / name).string() + "\"", dir / "log.txt");
    if (code != 0) return fail(std::string("sweep exited ") + std::to_string(code) + ": " + slurp(dir / "log.txt"));
  }
  const std::string a = slurp(dir / "a" / "matrix.csv");
  if (a.empty()) return fail("empty matrix.csv");
  const bool same = a == slurp(dir / "b" / "matrix.csv");
  const std::string d = "20 features x 12 models, threads 1 and 4, " + std::to_string(a.size()) + " bytes";
  return same ? pass(d + ", identical") : fail(d + ", outputs differ");
}

// 9 ---------------------------------------------------------------------

Outcome sweep_shape() {
  const auto syn = make_synthetic(240, 9);
  std::vector<ClassifierSpec> specs;
  for (auto f : kDefaultRoster) specs.push_back(ClassifierSpec::defaults(f, 42));
  std::vector<std::string> order = syn.table.feature_names();
  std::reverse(order.begin(), order.end());
  PipelineOptions opts;
  std::mutex mu;
  std::size_t traces = 0, violations = 0;
  const FoldObserver obs = [&](const FoldTrace& tr) {
    const std::vector<std::string> expect(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(tr.r));
    std::lock_guard lock(mu);
    ++traces;
    violations += tr.train_features != expect;
  };
  const auto mx = sweep(syn.table, order, specs, opts, obs);
  std::size_t na = 0;
  for (std::size_t i = 0; i < mx.rows(); ++i)
    for (std::size_t m = 0; m < mx.cols(); ++m) na += !mx.cells[i][m].ok();
  const std::string d = std::to_string(mx.rows()) + "x" + std::to_string(mx.cols()) + " matrix, " +
                        std::to_string(traces) + " fold traces, " + std::to_string(violations) +
                        " touched features outside their prefix, " + std::to_string(na) + " NA cells";
  const bool ok = mx.rows() == 20 && mx.cols() == 12 && traces == 20 * 12 * 10 && violations == 0 && na == 0;
  return ok ? pass(d) : fail(d);
}

// 10-12 -----------------------------------------------------------------

Outcome dental_headline() {
  const char* path = dataset_path();
  if (!path) return skip("TABRANK_DENTAL_CSV unset");
  const auto t = load_table(path, dental2018_schema());
  std::vector<ClassifierSpec> specs;
  for (auto f : kDefaultRoster) specs.push_back(ClassifierSpec::defaults(f, 42));
  ScorerConfig sc;
  const auto order = build_ranking(apply_imputer(fit_imputer(t), t), sc, kAllScorers).consensus_order;
  const auto mx = sweep(t, order, specs, PipelineOptions{});
  const std::size_t last = mx.rows() - 1;
  std::vector<std::size_t> idx(mx.cols());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto acc = [&](std::size_t m) { return mx.accuracy(last, m).value_or(-1.0); };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return acc(a) > acc(b); });
  std::string d = "top three at r=" + std::to_string(mx.subset_sizes[last]) + ":";
  std::set<std::string> top;
  bool ok = true;
  for (std::size_t i = 0; i < 3 && i < idx.size(); ++i) {
    d += " " + mx.models[idx[i]] + " " + format_fixed3(acc(idx[i]));
    top.insert(mx.models[idx[i]]);
    ok = ok && acc(idx[i]) >= 0.90;
  }
  const std::set<std::string> want{family_display_name(Family::NeuralNet), family_display_name(Family::GradientBoosting),
                                   family_display_name(Family::RandomForest)};
  return ok && top == want ? pass(d) : fail(d);
}

Outcome dental_chi_square() {
  const char* path = dataset_path();
  if (!path) return skip("TABRANK_DENTAL_CSV unset");
  const auto t = load_table(path, dental2018_schema());
  const auto x = chi_square(crosstab(t.column("DELIVERY_SYSTEM"), t.labels()));
  if (!x) return fail("chi_square not applicable to DELIVERY_SYSTEM");
  const double rel = std::abs(*x - 1556.771) / 1556.771;
  const std::string d = "DELIVERY_SYSTEM chi2 " + fmt("%.3f", *x) + " (published 1556.771, off " + fmt("%.3f", 100 * rel) + "%)";
  return rel <= 0.01 ? pass(d) : fail(d);
}

Outcome dental_ranking_table() {
  const char* path = dataset_path();
  if (!path) return skip("TABRANK_DENTAL_CSV unset");
  const auto t = load_table(path, dental2018_schema());
  ScorerConfig sc;
  const auto rt = build_ranking(apply_imputer(fit_imputer(t), t), sc, kAllScorers);
  std::ostringstream out;
  write_ranking_csv(out, rt);
  std::istringstream in(out.str());
  csv::Reader reader(in);
  std::vector<std::string> row;
  reader.next(row);
  const auto anova_col = static_cast<std::size_t>(
      std::find(ranking_csv_header().begin(), ranking_csv_header().end(), "anova") - ranking_csv_header().begin());
  std::size_t rows = 0, bad_na = 0;
  while (reader.next(row)) {
    ++rows;
    const bool categorical = t.column(row[0]).is_categorical();
    bad_na += categorical != (row[anova_col] == "NA");
  }
  const std::string d = std::to_string(rows) + " feature rows, " + std::to_string(bad_na) + " NA mismatches in the anova column";
  return rows == 20 && bad_na == 0 ? pass(d) : fail(d);
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"scorer oracle equivalence", scorer_oracles},
      {"relieff brute-force equivalence", relieff_brute_force},
      {"auc pairwise equivalence", auc_pairwise},
      {"gradient checks", gradient_checks},
      {"smote invariants", smote_invariants},
      {"constant classifier identity", constant_identity},
      {"synthetic recovery", synthetic_recovery},
      {"sweep determinism", sweep_determinism},
      {"sweep shape and nesting", sweep_shape},
      {"dental headline ordering", dental_headline},
      {"dental chi-square", dental_chi_square},
      {"dental ranking table", dental_ranking_table},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = fail(std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    failed += o.status == Status::Fail;
    std::printf("%s %2d %s: %s [%.1fs]\n", tag, n, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
