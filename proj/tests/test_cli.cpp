#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tabrank/csv.hpp"
#include "tabrank/ingest.hpp"

namespace fs = std::filesystem;
using namespace tabrank;

namespace {

struct CliRun {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("tabrank_cli_") + info->name() + "_" +
                                        std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun run(const std::string& args) {
    const fs::path o = dir_ / "stdout.txt", e = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + TABRANK_CLI + "\" " + args + " >\"" + o.string() + "\" 2>\"" +
                            e.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(o);
    r.err = slurp(e);
    return r;
  }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  // Two numeric features and a categorical one; "a" tracks the label.
  void small_dataset(std::size_t rows = 90) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> z;
    std::ostringstream csv;
    csv << "a,b,c,y\n";
    for (std::size_t i = 0; i < rows; ++i) {
      const bool pos = i % 3 == 0;
      csv << (pos ? 1.5 : 0.0) + z(gen) << ',' << z(gen) << ',' << (gen() % 2 ? "u" : "v") << ','
          << (pos ? "yes" : "no") << '\n';
    }
    data_ = write("data.csv", csv.str());
    schema_ = write("schema.json", R"({"target": {"name": "y", "labels": ["no", "yes"], "positive": "yes"},
      "columns": [{"name": "a", "kind": "numeric"}, {"name": "b", "kind": "numeric"},
                  {"name": "c", "kind": "categorical"}]})");
  }

  std::string io() const { return "--input \"" + data_.string() + "\" --schema \"" + schema_.string() + "\""; }

  fs::path dir_, data_, schema_;
};

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  csv::Reader r(in);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> f;
  while (r.next(f)) rows.push_back(f);
  return rows;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_F(Cli, MissingSchemaFileIsUsageError) {
  small_dataset();
  const auto r = run("rank --input \"" + data_.string() + "\" --schema \"" + (dir_ / "nope.json").string() + "\"");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nope.json"), std::string::npos) << r.err;
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
}

TEST_F(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(run("").code, 2); }

TEST_F(Cli, ValidateSchemaReportsCounts) {
  small_dataset();
  const auto r = run("validate-schema " + io());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("schema ok: 4 columns, target y"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("90 rows kept"), std::string::npos) << r.out;
}

TEST_F(Cli, RankWritesOneRowPerFeature) {
  small_dataset();
  const auto r = run("rank " + io() + " --out \"" + (dir_ / "rk").string() + "\" --format csv,json,md");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(dir_ / "rk" / "ranking.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].front(), "feature");
  EXPECT_EQ(rows[0].back(), "consensus_rank");
  EXPECT_EQ(rows[1][0], "a");
  EXPECT_TRUE(fs::exists(dir_ / "rk" / "ranking.json"));
  EXPECT_TRUE(fs::exists(dir_ / "rk" / "ranking.md"));
  EXPECT_NE(r.out.find("ranked 3 features"), std::string::npos);
}

TEST_F(Cli, RankMissingColumnIsNamed) {
  small_dataset();
  write("data.csv", "a,c,y\n1,u,yes\n0,v,no\n");
  const auto r = run("rank " + io());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'b'"), std::string::npos) << r.err;
}

TEST_F(Cli, BadNumberReportsRow) {
  small_dataset();
  write("data.csv", "a,b,c,y\n1,2,u,yes\n0,oops,v,no\n");
  const auto r = run("rank " + io());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("row 3"), std::string::npos) << r.err;
}

TEST_F(Cli, SweepMatrixShapeAndChart) {
  small_dataset();
  const fs::path out = dir_ / "sw";
  const auto r = run("sweep " + io() + " --models tree --folds 3 --out \"" + out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(out / "matrix.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"Model/ Rank", "Tree"}));
  EXPECT_EQ(rows[1][0], "Rank (1)");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 2u);
    const double acc = std::stod(rows[i][1]);
    EXPECT_GE(acc, 0.0);
    EXPECT_LE(acc, 1.0);
  }
  const std::string svg = slurp(out / "accuracy.svg");
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_EQ(count(svg, "<polyline"), 1u);
  EXPECT_EQ(count(svg, "<svg"), count(svg, "</svg>"));
  EXPECT_EQ(count(svg, "<g"), count(svg, "</g>"));
  EXPECT_TRUE(fs::exists(out / "matrix.json"));
  EXPECT_TRUE(fs::exists(out / "warnings.txt"));
}

TEST_F(Cli, SweepRerunsAreByteIdentical) {
  small_dataset();
  const std::string base = "sweep " + io() + " --models constant,naive_bayes,knn --folds 4";
  ASSERT_EQ(run(base + " --threads 1 --out \"" + (dir_ / "r1").string() + "\"").code, 0);
  ASSERT_EQ(run(base + " --threads 3 --out \"" + (dir_ / "r2").string() + "\"").code, 0);
  EXPECT_EQ(slurp(dir_ / "r1" / "matrix.csv"), slurp(dir_ / "r2" / "matrix.csv"));
  EXPECT_EQ(slurp(dir_ / "r1" / "matrix.json"), slurp(dir_ / "r2" / "matrix.json"));
  EXPECT_EQ(slurp(dir_ / "r1" / "accuracy.svg"), slurp(dir_ / "r2" / "accuracy.svg"));
}

TEST_F(Cli, SweepHonoursOrderFile) {
  small_dataset();
  const auto order = write("order.txt", "# worst first\nc\nb\na\n");
  const fs::path out = dir_ / "ord";
  const auto r = run("sweep " + io() + " --models constant --folds 3 --order \"" + order.string() + "\" --out \"" +
                     out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string json = slurp(out / "matrix.json");
  EXPECT_LT(json.find("\"c\""), json.find("\"a\""));
}

TEST_F(Cli, UnknownModelIsConfigError) {
  small_dataset();
  const auto r = run("sweep " + io() + " --models perceptron");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("perceptron"), std::string::npos);
}

TEST_F(Cli, TrainConstantThenPredictMajority) {
  small_dataset();
  const fs::path model = dir_ / "m.json", preds = dir_ / "p.csv";
  auto r = run("train " + io() + " --model constant --out \"" + model.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("trained Constant on 90 rows"), std::string::npos) << r.out;
  // Predict reads the schema stored in the model file; the target column is optional.
  const auto query = write("query.csv", "a,b,c\n0.1,0.2,u\n5,5,v\n");
  r = run("predict --input \"" + query.string() + "\" --model \"" + model.string() + "\" --out \"" +
          preds.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("scored 2 rows"), std::string::npos);
  const auto rows = read_csv(preds);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"row", "probability", "label"}));
  for (std::size_t i = 1; i < 3; ++i) {
    EXPECT_EQ(rows[i][2], "no");
    EXPECT_NEAR(std::stod(rows[i][1]), 30.0 / 90.0, 1e-12);
  }
}

TEST_F(Cli, PredictImputesMissingCellsAndRejectsMissingColumns) {
  small_dataset();
  const fs::path model = dir_ / "m.json";
  ASSERT_EQ(run("train " + io() + " --model tree --out \"" + model.string() + "\"").code, 0);
  const auto holes = write("holes.csv", "a,b,c\nNA,0.2,u\n2,,NA\n");
  auto r = run("predict --input \"" + holes.string() + "\" --model \"" + model.string() + "\" --out \"" +
               (dir_ / "p.csv").string() + "\"");
  EXPECT_EQ(r.code, 0) << r.err;
  const auto short_cols = write("short.csv", "a,c\n1,u\n");
  r = run("predict --input \"" + short_cols.string() + "\" --model \"" + model.string() + "\" --out \"" +
          (dir_ / "q.csv").string() + "\"");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'b'"), std::string::npos) << r.err;
}

TEST_F(Cli, TrainWithParamsAndGrid) {
  small_dataset();
  const auto params = write("params.json", R"({"max_depth": 2, "min_leaf": 3})");
  auto r = run("train " + io() + " --model tree --params \"" + params.string() + "\" --out \"" +
               (dir_ / "m.json").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(dir_ / "m.json").find("\"max_depth\":2"), std::string::npos);
  const auto bad = write("bad.json", R"({"depth": 2})");
  EXPECT_EQ(run("train " + io() + " --model tree --params \"" + bad.string() + "\"").code, 2);
  const auto grid = write("grid.json", R"({"max_depth": [1, 3], "min_leaf": [1]})");
  r = run("train " + io() + " --model tree --folds 3 --grid \"" + grid.string() + "\" --out \"" +
          (dir_ / "g.json").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("grid search: best CV accuracy"), std::string::npos);
}

TEST_F(Cli, ShippedSampleRanksAndSweeps) {
  const std::string io = std::string("--input \"") + TABRANK_SAMPLES + "/demo.csv\" --schema \"" + TABRANK_SAMPLES +
                         "/demo_schema.json\"";
  auto r = run("rank " + io + " --out \"" + (dir_ / "rk").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_csv(dir_ / "rk" / "ranking.csv").size(), 7u);
  r = run("sweep " + io + " --models constant,logreg --folds 5 --out \"" + (dir_ / "sw").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_csv(dir_ / "sw" / "matrix.csv").size(), 7u);
}
