#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace mlforge;
namespace ts = testing_support;

namespace {

BenchConfig parse(const std::string& text, const std::filesystem::path& base = {}) {
  std::istringstream in(text);
  return parse_bench_config(in, "cfg", base);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

const std::string minimal = "[dataset d]\npath = d.arff\nlabels = trailing:2\n[learner br]\nmethod = BR\n";

}  // namespace

TEST(BenchConfig, Defaults) {
  const auto cfg = parse(minimal);
  EXPECT_EQ(cfg.seed, 1u);
  EXPECT_EQ(cfg.iters, 10u);
  EXPECT_EQ(cfg.measures, all_measures());
  EXPECT_EQ(cfg.workers, 1u);
  EXPECT_EQ(cfg.policy, UndefinedPolicy::strict);
  ASSERT_EQ(cfg.datasets.size(), 1u);
  EXPECT_EQ(cfg.datasets[0].labels.trailing, 2u);
  ASSERT_EQ(cfg.learners.size(), 1u);
  EXPECT_EQ(cfg.learners[0].base.kind(), LearnerKind::featureless);
  EXPECT_EQ(cfg.learners[0].method.internal_folds, 2u);
}

TEST(BenchConfig, FullFile) {
  const auto cfg = parse(R"(# comment
; another
[bench]
seed = 42
iters = 5
measures = hamming, f1
workers = 3
output = out/dir
policy = skip_undefined

[dataset a]
path = data/a.csv
labels = y1,y2
min_prevalence = 0.02

[learner cc]
method = CC
base = logistic
base.iterations = 200
chain_order = random
threshold = 0.4

[learner sta]
method = sta
base = tree
internal_folds = 3
first_level = logistic:iterations=50
)",
                         "/root");
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.iters, 5u);
  EXPECT_EQ(cfg.measures, (std::vector<Measure>{Measure::hamming, Measure::f1}));
  EXPECT_EQ(cfg.workers, 3u);
  EXPECT_EQ(cfg.output, "out/dir");
  EXPECT_EQ(cfg.policy, UndefinedPolicy::skip_undefined);
  EXPECT_EQ(cfg.datasets[0].path, "/root/data/a.csv");
  EXPECT_EQ(cfg.datasets[0].labels.names, (std::vector<std::string>{"y1", "y2"}));
  EXPECT_EQ(cfg.datasets[0].min_prevalence, 0.02);
  const auto& cc = cfg.learners[0];
  EXPECT_EQ(cc.method.method, Method::CC);
  EXPECT_EQ(cc.base.param("iterations"), 200);
  EXPECT_EQ(cc.method.chain_policy, ChainOrderPolicy::random_per_iteration);
  EXPECT_EQ(cc.method.threshold, 0.4);
  const auto& sta = cfg.learners[1];
  EXPECT_EQ(sta.method.method, Method::STA);
  EXPECT_EQ(sta.method.internal_folds, 3u);
  ASSERT_TRUE(sta.method.first_level);
  EXPECT_EQ(sta.method.first_level->param("iterations"), 50);
}

TEST(BenchConfig, ErrorsPointAtTheLine) {
  EXPECT_EQ(error_line("[bench]\nseed = 1\nspeed = 2\n" + minimal), 3u);
  EXPECT_EQ(error_line("[bench]\n[bench]\n" + minimal), 2u);
  EXPECT_EQ(error_line("[model x]\n"), 1u);
  EXPECT_EQ(error_line("seed = 1\n"), 1u);
  EXPECT_EQ(error_line(minimal + "[learner br]\nmethod = CC\n"), 6u);
  EXPECT_EQ(error_line(minimal + "color = red\n"), 6u);
  EXPECT_EQ(error_line(minimal + "method\n"), 6u);
  EXPECT_EQ(error_line(minimal + "base.depth = x\n"), 6u);
  EXPECT_EQ(error_line("[bench]\nmeasures = logloss\n" + minimal), 2u);
  EXPECT_EQ(error_line("[bench]\niters = -3\n" + minimal), 2u);
  EXPECT_EQ(error_line("[dataset d]\nlabels = trailing:0\n"), 2u);
}

TEST(BenchConfig, WholeFileChecks) {
  EXPECT_THROW(parse("[bench]\niters = 1\n" + minimal), ParseError);
  EXPECT_THROW(parse("[bench]\nworkers = 0\n" + minimal), ParseError);
  EXPECT_THROW(parse("[learner br]\nmethod = BR\n"), ParseError);
  EXPECT_THROW(parse("[dataset d]\npath = x\nlabels = a\n"), ParseError);
  EXPECT_THROW(parse("[dataset d]\nlabels = a\n[learner br]\nmethod = BR\n"), ParseError);
  EXPECT_THROW(parse("[dataset d]\npath = x\n[learner br]\nmethod = BR\n"), ParseError);
  EXPECT_THROW(parse(minimal + "[learner x]\nbase = tree\n"), ParseError);
  EXPECT_THROW(parse(minimal + "[learner n]\nmethod = NST\ninternal_folds = 1\n"), ParseError);
  EXPECT_THROW(parse(minimal + "[learner t]\nmethod = BR\nthreshold = 1\n"), ParseError);
  EXPECT_THROW(parse(minimal + "[learner t]\nmethod = BR\nbase = logistic\nbase.max_depth = 2\n"), ParseError);
}

TEST(BenchConfig, ResolvedEchoReparsesToTheSameConfig) {
  const auto cfg = parse(minimal + "[learner cc]\nmethod = CC\nbase = tree\nbase.max_depth = 3\nchain_order = random\n"
                                   "[learner dbr]\nmethod = DBR\nfirst_level = featureless\n"
                                   "[dataset e]\npath = e.csv\nlabels = a, b\nmin_prevalence = 0.05\n");
  const auto echo = format_bench_config(cfg);
  const auto again = parse(echo);
  EXPECT_EQ(format_bench_config(again), echo);
  EXPECT_NE(echo.find("base.min_split = 5"), std::string::npos);
  EXPECT_NE(echo.find("iters = 10"), std::string::npos);
  EXPECT_NE(echo.find("labels = trailing:2"), std::string::npos);
}

TEST(BenchConfig, ReadsFromFile) {
  const ts::TempDir dir("cfg");
  const auto cfg = read_bench_config(dir.write("b.ini", minimal));
  EXPECT_EQ(cfg.datasets[0].path, dir.file("d.arff"));
  EXPECT_THROW(read_bench_config(dir.file("missing.ini")), ParseError);
}
