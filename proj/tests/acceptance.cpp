// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Pass criterion names to run a subset.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

using namespace mlforge;
namespace ts = testing_support;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) { return text::format_real(v); }

BinaryMatrix random_bits(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  BinaryMatrix y(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) y(i, k) = rng() & 1u;
  return y;
}

// ---------------------------------------------------------------------------

Outcome metric_oracle() {
  const auto start = Clock::now();
  std::size_t sets = 0, mismatches = 0;
  auto compare = [&](const BinaryMatrix& y, const BinaryMatrix& yhat) {
    ++sets;
    const auto pred = PredictionSet::from_labels(y, yhat);
    for (auto measure : all_measures())
      for (bool strict : {true, false}) {
        const auto got =
            evaluate(pred, measure, strict ? UndefinedPolicy::strict : UndefinedPolicy::skip_undefined).value;
        const auto want = ts::reference_measure(measure, y, yhat, strict);
        if (got.has_value() != want.has_value() || (got && *got != *want)) ++mismatches;
      }
  };
  for (std::size_t m = 1; m <= 4; ++m) {
    const std::size_t patterns = std::size_t{1} << m;
    for (std::size_t a = 0; a < patterns; ++a)
      for (std::size_t b = 0; b < patterns; ++b)
        compare(BinaryMatrix::from_rows(1, m, ts::bit_pattern(a, m)), BinaryMatrix::from_rows(1, m, ts::bit_pattern(b, m)));
  }
  // Every two-instance set with m = 4: (2^4 * 2^4)^2 = 65,536 pairs.
  for (std::size_t code = 0; code < (std::size_t{1} << 16); ++code) {
    auto y = ts::bit_pattern(code & 0xff, 8), yhat = ts::bit_pattern(code >> 8, 8);
    compare(BinaryMatrix::from_rows(2, 4, y), BinaryMatrix::from_rows(2, 4, yhat));
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < 5.0, std::to_string(sets) + " prediction sets, " + std::to_string(mismatches) +
                                             " disagreements, " + text::format_fixed(secs, 2) + " s (limit 5 s)"};
}

Outcome width_law() {
  const auto task = ts::six_row_task();
  const BaseLearnerSpec recorder(LearnerKind::mock_recorder);
  const std::vector<std::pair<Method, std::vector<std::size_t>>> expected{
      {Method::BR, {3, 3, 3}}, {Method::CC, {3, 4, 5}}, {Method::NST, {3, 4, 5}},
      {Method::DBR, {5, 5, 5}}, {Method::STA, {6, 6, 6}}};
  Outcome out;
  for (const auto& [method, widths] : expected) {
    const auto model = fit_multilabel(method, task, recorder);
    std::vector<std::string> got;
    bool same = true;
    for (std::size_t k = 0; k < 3; ++k) {
      got.push_back(std::to_string(model.per_label_models[k].input_dimension));
      same = same && model.per_label_models[k].input_dimension == widths[k];
    }
    out.pass = out.pass && same;
    out.detail += std::string(out.detail.empty() ? "" : ", ") + to_string(method) + " " + text::join(got, "/");
  }
  return out;
}

Outcome leakage() {
  const BaseLearnerSpec memorizer(LearnerKind::mock_memorizer);
  std::size_t checked = 0, violations = 0, differs_from_truth = 0;
  auto check_column = [&](const RealMatrix& seen, std::size_t col, const std::vector<std::uint8_t>& expected,
                          const BinaryVector& truth) {
    for (std::size_t i = 0; i < expected.size(); ++i) {
      ++checked;
      if (seen(i, col) != expected[i]) ++violations;
      if (seen(i, col) != truth[i]) ++differs_from_truth;
    }
  };
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto task = ts::random_task(60 + 7 * seed, 3, {0.3, 0.2, 0.4, 0.35}, 100 + seed);
    const auto& y = task.dataset.labels();
    for (std::size_t folds : {2u, 3u, 5u}) {
      FitOptions opt;
      opt.seed = seed;
      opt.internal_folds = folds;
      opt.order = ChainOrder::random(4, seed);
      const auto split = kfold_split(task.n(), folds, derive_seed(seed, seed_stream::internal_cv));

      const auto nst = fit_nested_stacking(task, memorizer, opt);
      for (std::size_t j = 1; j < 4; ++j) {
        const auto& seen = std::get<MemorizerState>(nst.per_label_models[opt.order->at(j)].state).training_features;
        for (std::size_t t = 0; t < j; ++t) {
          const auto label = opt.order->at(t);
          check_column(seen, 3 + t, ts::reference_unseen_fallback(y.column(label), split.fold_of, 0.5), y.column(label));
        }
      }
      const auto sta = fit_stacking(task, memorizer, opt);
      for (std::size_t k = 0; k < 4; ++k) {
        const auto& seen = std::get<MemorizerState>(sta.per_label_models[k].state).training_features;
        for (std::size_t l = 0; l < 4; ++l)
          check_column(seen, 3 + l, ts::reference_unseen_fallback(y.column(l), split.fold_of, 0.5), y.column(l));
      }
    }
  }
  return {violations == 0 && differs_from_truth > 0,
          std::to_string(checked) + " augmented entries (NST and STA), " + std::to_string(violations) +
              " in-fold values, " + std::to_string(differs_from_truth) + " entries differ from the memorized label"};
}

Outcome featureless_baseline() {
  Outcome out;
  const BaseLearnerSpec featureless;
  MethodSpec br;
  std::size_t datasets = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const std::vector<std::vector<double>> weights{{0.3, 0.3, 0.4}, {0.45, 0.35, 0.2}, {0.25, 0.25, 0.25, 0.25},
                                                   {0.4, 0.3, 0.2, 0.1}, {0.34, 0.33, 0.33}};
    const auto task = ts::single_label_task(200, 4, weights[seed - 1], seed);
    for (double prev : dataset_stats(task).per_label_prevalence)
      if (prev >= 0.5) return {false, "fixture has a label with prevalence >= 0.5"};
    ++datasets;
    const auto r = resample(br, featureless, task, ResampleDesc{10, false, seed});
    const auto recall = r.mean(Measure::recall), f1 = r.mean(Measure::f1), precision = r.mean(Measure::precision);
    const bool ok = recall && *recall == 0.0 && f1 && *f1 == 0.0 && !precision;
    if (!ok) out.pass = false;

    const auto model = fit_multilabel(Method::BR, task, featureless);
    const auto pred = predict_multilabel(model, task.dataset.features(), task.dataset.labels());
    if (*recall_score(pred).value != 0.0 || *f1_score(pred).value != 0.0 || precision_score(pred).value) out.pass = false;

    const auto bench = benchmark({{"BR(fl)", br, featureless}}, std::vector<Task>{task}, ResampleDesc{10, false, seed});
    if (to_aligned(make_table(bench, Measure::f1)).find("0.0000") == std::string::npos) out.pass = false;
  }
  out.detail = std::to_string(datasets) + " datasets with prevalences < 0.5: recall 0, F1 0 (table \"0.0000\"), "
               "strict precision NA" + std::string(out.pass ? "" : " -- mismatch");
  return out;
}

Outcome eq1_fixture() {
  const double cardinality = dataset_stats(ts::six_row_task()).cardinality;
  std::mt19937_64 rng(2016);
  std::size_t violations = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const std::size_t n = 1 + rng() % 12, m = 1 + rng() % 8;
    const auto pred = PredictionSet::from_labels(random_bits(n, m, rng), random_bits(n, m, rng));
    if (hamming_loss(pred) > subset01_loss(pred)) ++violations;
  }
  return {cardinality == 2.0 && violations == 0,
          "cardinality " + fmt(cardinality) + ", " + std::to_string(violations) + " violations of hamming <= subset01"};
}

Outcome chain_gain() {
  const auto start = Clock::now();
  DependenceSpec spec;
  LabelRule first;
  first.feature_weights = {1.0, -0.8, 0.6, 0.4, -0.5};
  first.noise = 0.1;
  spec.labels = {first, DependenceSpec::copy_of(0)};
  const auto task = make_synthetic_task(2000, 5, spec, 20160601);
  const BaseLearnerSpec logistic(LearnerKind::logistic);
  const ResampleDesc cv{10, false, 42};
  MethodSpec br, cc;
  cc.method = Method::CC;
  const auto r_br = resample(br, logistic, task, cv, {Measure::subset01});
  const auto r_cc = resample(cc, logistic, task, cv, {Measure::subset01});
  const double loss_br = *r_br.mean(Measure::subset01), loss_cc = *r_cc.mean(Measure::subset01);
  const double secs = seconds_since(start);
  return {loss_cc < loss_br - 0.03 && secs < 60.0,
          "subset01 BR " + text::format_fixed(loss_br) + ", CC " + text::format_fixed(loss_cc) + ", gain " +
              text::format_fixed(loss_br - loss_cc) + " (need >= 0.03), " + text::format_fixed(secs, 1) + " s"};
}

Outcome numerical_checks() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  double worst_grad = 0.0;
  for (int problem = 0; problem < 20; ++problem) {
    const std::size_t n = 10 + 3 * problem, p = 1 + problem % 6;
    RealMatrix x(n, p);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) x(i, j) = normal(rng);
    BinaryVector y(n);
    for (auto& v : y) v = rng() & 1u;
    std::vector<double> w(p);
    for (auto& v : w) v = normal(rng);
    const double b = normal(rng), l2 = 0.05 * (problem % 4);
    std::vector<double> gw(p);
    double gb = 0.0;
    logistic::gradient(x, y, w, b, l2, gw, gb);
    const double h = 1e-5;
    for (std::size_t j = 0; j <= p; ++j) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      if (j < p) {
        wp[j] += h;
        wm[j] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      const double fd = (logistic::loss(x, y, wp, bp, l2) - logistic::loss(x, y, wm, bm, l2)) / (2 * h);
      const double analytic = j < p ? gw[j] : gb;
      worst_grad = std::max(worst_grad, std::abs(fd - analytic) / std::max(1.0, std::abs(analytic)));
    }
  }
  double worst_auc = 0.0;
  std::size_t auc_cases = 0, definedness = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 100;
    std::vector<double> scores(n);
    BinaryVector truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rep % 2 ? static_cast<double>(rng() % 11) / 10.0 : std::uniform_real_distribution<double>()(rng);
      truth[i] = rng() % 3 == 0;
    }
    const auto got = auc(scores, truth);
    const auto want = ts::reference_auc(scores, truth);
    ++auc_cases;
    if (got.has_value() != want.has_value()) ++definedness;
    else if (got) worst_auc = std::max(worst_auc, std::abs(*got - *want));
  }
  return {worst_grad <= 1e-5 && worst_auc <= 1e-12 && definedness == 0,
          "gradient max rel err " + fmt(worst_grad) + " over 20 problems; AUC max abs err " + fmt(worst_auc) +
              " over " + std::to_string(auc_cases) + " cases of 100 instances"};
}

Outcome determinism() {
  const auto task = make_synthetic_task(300, 4, DependenceSpec{{{{1.0, 0.5}, {}, 0.0, 0.1},
                                                                DependenceSpec::copy_of(0),
                                                                {{0.0, 0.0, 1.0, -1.0}, {0.5}, -0.2, 0.05}}},
                                        5);
  const BaseLearnerSpec logistic(LearnerKind::logistic, {{"iterations", 200}});
  std::vector<LearnerConfig> grid;
  for (auto m : {Method::BR, Method::CC, Method::NST, Method::DBR, Method::STA}) {
    MethodSpec spec;
    spec.method = m;
    spec.chain_policy = ChainOrderPolicy::random_per_iteration;
    grid.push_back({to_string(m), spec, logistic});
  }
  auto run = [&](std::size_t workers) {
    ResampleOptions opt;
    opt.workers = workers;
    std::string out;
    for (const auto& l : grid)
      out += format_resample(resample(l.method, l.base, task, ResampleDesc{5, false, 11}, all_measures(), opt));
    const auto bench = benchmark(grid, std::vector<Task>{task}, ResampleDesc{5, false, 11}, all_measures(), opt);
    out += to_long_format(bench);
    for (auto m : all_measures()) out += to_delimited(make_table(bench, m));
    return out;
  };
  const auto a = run(1), b = run(1), c = run(4);
  return {a == b && a == c, std::to_string(a.size()) + " bytes of resample and bench output; repeat run " +
                                (a == b ? "identical" : "DIFFERENT") + ", 4 workers " + (a == c ? "identical" : "DIFFERENT")};
}

Outcome round_trips() {
  const ts::TempDir dir("acceptance");
  std::size_t models = 0, model_diffs = 0;
  const auto task = ts::random_task(80, 4, {0.3, 0.5, 0.45}, 77);
  const auto probe = ts::random_task(40, 4, {0.5}, 78).dataset.features();
  for (auto method : {Method::BR, Method::CC, Method::NST, Method::DBR, Method::STA})
    for (auto kind : {LearnerKind::featureless, LearnerKind::logistic, LearnerKind::tree}) {
      FitOptions opt;
      opt.seed = 3;
      opt.order = ChainOrder({1, 2, 0});
      const auto model = fit_multilabel(method, task, BaseLearnerSpec(kind), opt);
      const auto path = dir.file("m" + std::to_string(models++) + ".model");
      save_model(model, path);
      const auto loaded = load_model(path);
      const auto a = predict_multilabel(model, probe), b = predict_multilabel(loaded, probe);
      if (!(a.probs == b.probs) || !(a.predicted == b.predicted)) ++model_diffs;
    }

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit;
  std::size_t pred_diffs = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rng() % 30, m = 1 + rng() % 6;
    RealMatrix probs(n, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < m; ++k) probs(i, k) = rep % 5 == 0 ? static_cast<double>(rng() % 2) : unit(rng);
    std::vector<std::string> names;
    for (std::size_t k = 0; k < m; ++k) names.push_back("label " + std::to_string(k));
    std::optional<BinaryMatrix> truth;
    if (rep % 2) truth = random_bits(n, m, rng);
    const auto pred = PredictionSet::from_probs(probs, names, 0.05 + 0.9 * unit(rng), truth);
    write_predictions(pred, dir.file("p.txt"));
    const auto back = read_predictions(dir.file("p.txt"));
    if (!(back.probs == pred.probs) || !(back.predicted == pred.predicted) || back.truth != pred.truth ||
        back.label_names != pred.label_names || back.threshold != pred.threshold)
      ++pred_diffs;
  }

  std::size_t arff_diffs = 0;
  for (int rep = 0; rep < 50; ++rep) {
    ArffDocument doc;
    doc.relation = rep % 2 ? "plain" : "with space";
    doc.attributes.push_back({"x", false, "numeric", {}});
    doc.attributes.push_back({"nominal feature", true, "numeric", {"a", "b c", "it's"}});
    doc.attributes.push_back({"r", false, "real", {}});
    doc.attributes.push_back({"y1", true, "numeric", {"0", "1"}});
    for (std::size_t i = 0; i < 1 + rng() % 20; ++i)
      doc.rows.push_back({fmt(std::normal_distribution<double>(0, 1e3)(rng)), doc.attributes[1].values[rng() % 3],
                          fmt(unit(rng)), std::to_string(rng() % 2)});
    const auto first = parse_arff_string(write_arff(doc));
    const auto second = parse_arff_string(write_arff(first));
    if (!(first == second) || write_arff(first) != write_arff(second) || !(first == doc)) ++arff_diffs;
  }
  return {model_diffs == 0 && pred_diffs == 0 && arff_diffs == 0,
          std::to_string(models) + " models (" + std::to_string(model_diffs) + " differ), 50 prediction files (" +
              std::to_string(pred_diffs) + " differ), 50 ARFF documents (" + std::to_string(arff_diffs) +
              " not fixed points)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric_oracle", metric_oracle}, {"width_law", width_law},           {"leakage", leakage},
      {"featureless_baseline", featureless_baseline}, {"eq1_fixture", eq1_fixture},
      {"chain_gain", chain_gain},       {"numerical_checks", numerical_checks},
      {"determinism", determinism},     {"round_trips", round_trips}};

  std::vector<std::string> wanted(argv + 1, argv + argc);
  for (const auto& w : wanted) {
    bool known = false;
    for (const auto& c : criteria) known = known || c.first == w;
    if (!known) {
      std::cerr << "unknown criterion '" << w << "'\n";
      return 2;
    }
  }
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
