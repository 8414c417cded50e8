#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "data.hpp"
#include "error.hpp"
#include "folds.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "transform.hpp"

namespace mlforge {

/// k-fold cross-validation. Stratification is not supported.
struct ResampleDesc {
  std::size_t iters = 10;
  bool stratify = false;
  std::uint64_t seed = 0;
};

enum class ChainOrderPolicy { identity, random_per_iteration };

inline const char* to_string(ChainOrderPolicy p) {
  return p == ChainOrderPolicy::identity ? "identity" : "random";
}

inline ChainOrderPolicy parse_chain_order_policy(const std::string& s) {
  if (s == "identity" || s == "id") return ChainOrderPolicy::identity;
  if (s == "random" || s == "random_per_iteration") return ChainOrderPolicy::random_per_iteration;
  throw InvalidArgument("unknown chain order policy '" + s + "' (expected identity or random)");
}

/// Everything about a multilabel learner except its base learner.
struct MethodSpec {
  Method method = Method::BR;
  std::size_t internal_folds = 2;
  double threshold = 0.5;
  ChainOrderPolicy chain_policy = ChainOrderPolicy::identity;
  std::optional<BaseLearnerSpec> first_level;
};

struct ResampleOptions {
  std::size_t workers = 1;
  UndefinedPolicy undefined = UndefinedPolicy::strict;
};

struct ResampleResult {
  std::vector<Measure> measures;
  FoldAssignment folds;
  std::vector<std::vector<MeasureValue>> per_fold_values;  // [fold][measure]
  std::vector<std::optional<double>> aggregate_mean;       // [measure]
  std::vector<std::optional<double>> aggregate_sd;         // [measure]
  PredictionSet pooled_predictions;                        // all n rows, original order
  std::vector<std::optional<ChainOrder>> chain_orders_used;  // [fold]; CC/NST only
  double wall_time = 0.0;                                  // seconds

  std::size_t measure_index(Measure m) const {
    for (std::size_t j = 0; j < measures.size(); ++j)
      if (measures[j] == m) return j;
    throw InvalidArgument(std::string("measure not part of this result: ") + to_string(m));
  }
  std::optional<double> mean(Measure m) const { return aggregate_mean[measure_index(m)]; }
};

namespace detail {

inline std::uint64_t fold_fit_seed(std::uint64_t seed, std::size_t fold) {
  return derive_seed(seed, 0x666f6c64ULL, fold);
}

// Mean and sample sd (n-1) of the defined fold values, subject to policy.
inline std::pair<std::optional<double>, std::optional<double>> aggregate(const std::vector<MeasureValue>& values,
                                                                         UndefinedPolicy policy) {
  std::vector<double> v;
  for (const auto& mv : values) {
    if (mv.value) v.push_back(*mv.value);
    else if (policy == UndefinedPolicy::strict) return {std::nullopt, std::nullopt};
  }
  if (v.empty()) return {std::nullopt, std::nullopt};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, std::nullopt};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace detail

/// Cross-validates one multilabel learner on one task: for every fold, fit on
/// the complement, predict the held-out rows and score every measure.
inline ResampleResult resample(const MethodSpec& method, const BaseLearnerSpec& base, const Task& task,
                               const ResampleDesc& rdesc, const std::vector<Measure>& measures = all_measures(),
                               const ResampleOptions& options = {}) {
  if (rdesc.stratify) throw InvalidArgument("stratified multilabel cross-validation is not supported");
  if (measures.empty()) throw InvalidArgument("at least one measure is required");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = task.n(), m = task.m(), k = rdesc.iters;

  ResampleResult result;
  result.measures = measures;
  result.folds = kfold_split(n, k, rdesc.seed);
  result.per_fold_values.resize(k);
  result.chain_orders_used.resize(k);

  RealMatrix pooled(n, m);
  parallel_for(k, options.workers, [&](std::size_t f) {
    const auto train = result.folds.train_indices(f);
    const auto test = result.folds.test_indices(f);
    const Task train_task(task.id, task.dataset.subset(train));
    const auto test_data = task.dataset.subset(test);

    FitOptions fit;
    fit.threshold = method.threshold;
    fit.internal_folds = method.internal_folds;
    fit.seed = detail::fold_fit_seed(rdesc.seed, f);
    fit.first_level = method.first_level;
    if (uses_chain(method.method)) {
      fit.order = method.chain_policy == ChainOrderPolicy::random_per_iteration
                      ? ChainOrder::random(m, derive_seed(rdesc.seed, seed_stream::chain_order, f))
                      : ChainOrder::identity(m);
      result.chain_orders_used[f] = fit.order;
    }
    const auto model = fit_multilabel(method.method, train_task, base, fit);
    const auto pred = predict_multilabel(model, test_data.features(), test_data.labels());
    for (std::size_t t = 0; t < test.size(); ++t)
      for (std::size_t l = 0; l < m; ++l) pooled(test[t], l) = pred.probs(t, l);
    for (auto measure : measures) result.per_fold_values[f].push_back(evaluate(pred, measure, options.undefined));
  });

  for (std::size_t j = 0; j < measures.size(); ++j) {
    std::vector<MeasureValue> column;
    for (std::size_t f = 0; f < k; ++f) column.push_back(result.per_fold_values[f][j]);
    auto [mean, sd] = detail::aggregate(column, options.undefined);
    result.aggregate_mean.push_back(mean);
    result.aggregate_sd.push_back(sd);
  }
  result.pooled_predictions =
      PredictionSet::from_probs(std::move(pooled), task.dataset.label_names(), method.threshold, task.dataset.labels());
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// ---------------------------------------------------------------------------
// Benchmark grid

struct LearnerConfig {
  std::string name;
  MethodSpec method;
  BaseLearnerSpec base;
};

/// A task that is materialized lazily, so that a dataset which fails to load
/// turns into per-cell error records instead of aborting the grid.
struct BenchmarkTask {
  std::string id;
  std::function<Task()> load;
};

struct BenchmarkCell {
  std::string task_id;
  std::string learner;
  std::optional<ResampleResult> result;
  std::string error;  // nonempty iff result is empty

  bool ok() const noexcept { return result.has_value(); }
};

struct BenchmarkResult {
  std::vector<std::string> task_ids;
  std::vector<std::string> learner_names;
  std::vector<Measure> measures;
  std::vector<BenchmarkCell> cells;  // row-major: task x learner

  const BenchmarkCell& cell(std::size_t task, std::size_t learner) const {
    return cells.at(task * learner_names.size() + learner);
  }
  std::size_t n_failed() const {
    std::size_t c = 0;
    for (const auto& cell : cells) c += !cell.ok();
    return c;
  }
};

/// Full factorial (tasks x learners) cross-validation. All learners on a task
/// share the same outer folds. Cells are independent jobs; results land in
/// fixed slots so output never depends on completion order.
inline BenchmarkResult benchmark(const std::vector<LearnerConfig>& grid, const std::vector<BenchmarkTask>& tasks,
                                 const ResampleDesc& rdesc, const std::vector<Measure>& measures = all_measures(),
                                 const ResampleOptions& options = {}) {
  if (grid.empty()) throw InvalidArgument("benchmark needs at least one learner");
  if (tasks.empty()) throw InvalidArgument("benchmark needs at least one task");
  BenchmarkResult out;
  out.measures = measures;
  for (const auto& t : tasks) out.task_ids.push_back(t.id);
  for (const auto& l : grid) out.learner_names.push_back(l.name);
  detail::require_unique(out.learner_names, "learner");
  detail::require_unique(out.task_ids, "task");

  std::vector<std::optional<Task>> loaded(tasks.size());
  std::vector<std::string> load_errors(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    try {
      loaded[t].emplace(tasks[t].load());
    } catch (const std::exception& e) {
      load_errors[t] = e.what();
    }
  }

  out.cells.resize(tasks.size() * grid.size());
  ResampleOptions inner = options;
  inner.workers = 1;
  parallel_for(out.cells.size(), options.workers, [&](std::size_t c) {
    const std::size_t t = c / grid.size(), l = c % grid.size();
    auto& cell = out.cells[c];
    cell.task_id = tasks[t].id;
    cell.learner = grid[l].name;
    if (!loaded[t]) {
      cell.error = "task failed to load: " + load_errors[t];
      return;
    }
    try {
      cell.result = resample(grid[l].method, grid[l].base, *loaded[t], rdesc, measures, inner);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  return out;
}

inline BenchmarkResult benchmark(const std::vector<LearnerConfig>& grid, const std::vector<Task>& tasks,
                                 const ResampleDesc& rdesc, const std::vector<Measure>& measures = all_measures(),
                                 const ResampleOptions& options = {}) {
  std::vector<BenchmarkTask> lazy;
  for (const auto& t : tasks) lazy.push_back({t.id, [t] { return t; }});
  return benchmark(grid, lazy, rdesc, measures, options);
}

}  // namespace mlforge
