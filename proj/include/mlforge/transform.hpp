#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "data.hpp"
#include "error.hpp"
#include "folds.hpp"
#include "learners.hpp"
#include "parallel.hpp"
#include "prediction.hpp"
#include "random.hpp"

namespace mlforge {

// Problem transformation methods.
//
//                  true labels    predicted labels
//   partial cond.  CC             NST
//   full cond.     DBR            STA
//
// plus BR, which conditions on nothing.
enum class Method { BR, CC, NST, DBR, STA };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::BR: return "BR";
    case Method::CC: return "CC";
    case Method::NST: return "NST";
    case Method::DBR: return "DBR";
    case Method::STA: return "STA";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (auto m : {Method::BR, Method::CC, Method::NST, Method::DBR, Method::STA})
    if (text::iequals(s, to_string(m))) return m;
  throw InvalidArgument("unknown method '" + s + "' (expected BR, CC, NST, DBR or STA)");
}

inline bool uses_chain(Method m) { return m == Method::CC || m == Method::NST; }
inline bool uses_internal_cv(Method m) { return m == Method::NST || m == Method::STA; }

/// A permutation of label indices; position j of the chain predicts label at(j).
class ChainOrder {
 public:
  ChainOrder() = default;

  explicit ChainOrder(std::vector<std::size_t> order) : order_(std::move(order)) {
    std::vector<bool> seen(order_.size(), false);
    for (auto k : order_) {
      if (k >= order_.size() || seen[k]) throw InvalidArgument("chain order is not a permutation");
      seen[k] = true;
    }
  }

  static ChainOrder identity(std::size_t m) {
    std::vector<std::size_t> o(m);
    std::iota(o.begin(), o.end(), std::size_t{0});
    return ChainOrder(std::move(o));
  }

  static ChainOrder random(std::size_t m, std::uint64_t seed) {
    std::vector<std::size_t> o(m);
    std::iota(o.begin(), o.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(o.begin(), o.end(), rng);
    return ChainOrder(std::move(o));
  }

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t at(std::size_t position) const { return order_.at(position); }
  const std::vector<std::size_t>& indices() const noexcept { return order_; }

  // Chain position of label k.
  std::size_t position_of(std::size_t label) const {
    return static_cast<std::size_t>(std::find(order_.begin(), order_.end(), label) - order_.begin());
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t j = 0; j < order_.size(); ++j) s += (j ? "," : "") + std::to_string(order_[j]);
    return s;
  }

  friend bool operator==(const ChainOrder&, const ChainOrder&) = default;

 private:
  std::vector<std::size_t> order_;
};

struct FitOptions {
  double threshold = 0.5;
  std::size_t internal_folds = 2;  // NST, STA
  std::uint64_t seed = 0;
  std::optional<ChainOrder> order;  // CC, NST; identity when unset
  // DBR/STA first-level BR learner; the base learner when unset.
  std::optional<BaseLearnerSpec> first_level;
  // Optional per-label override of the base learner (size m). Test doubles
  // use it to give each label its own constant.
  std::vector<BaseLearnerSpec> per_label;
  std::size_t workers = 1;
};

struct MultilabelModel {
  Method method = Method::BR;
  BaseLearnerSpec base_spec;
  double threshold = 0.5;
  ChainOrder chain_order;
  // Indexed by label, not by chain position.
  std::vector<BinaryModel> per_label_models;
  // DBR/STA: the first-level BR models on X, indexed by label. Empty otherwise.
  std::vector<BinaryModel> level1_models;
  std::size_t internal_folds = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> label_names;
  std::vector<std::string> feature_names;
  std::vector<std::string> dropped_features;

  std::size_t n_labels() const noexcept { return label_names.size(); }
  std::size_t n_features() const noexcept { return feature_names.size(); }

  /// Input width the classifier for `label` must have been trained on.
  std::size_t expected_width(std::size_t label) const {
    const std::size_t p = n_features(), m = n_labels();
    switch (method) {
      case Method::BR: return p;
      case Method::CC:
      case Method::NST: return p + chain_order.position_of(label);
      case Method::DBR: return p + m - 1;
      case Method::STA: return p + m;
    }
    return p;
  }

  void validate() const {
    const std::size_t m = n_labels();
    if (m == 0) throw InvalidArgument("model has no labels");
    if (per_label_models.size() != m) throw InvalidArgument("model needs one classifier per label");
    if (chain_order.size() != m) throw InvalidArgument("chain order length does not match label count");
    const bool two_level = method == Method::DBR || method == Method::STA;
    if (two_level ? level1_models.size() != m : !level1_models.empty())
      throw InvalidArgument("first-level model count does not match method");
    for (std::size_t k = 0; k < m; ++k) {
      if (per_label_models[k].input_dimension != expected_width(k))
        throw InvalidArgument("classifier for label " + std::to_string(k) + " has input width " +
                              std::to_string(per_label_models[k].input_dimension) + ", expected " +
                              std::to_string(expected_width(k)));
      if (two_level && level1_models[k].input_dimension != n_features())
        throw InvalidArgument("first-level classifier width does not match p");
    }
    check_threshold(threshold);
  }

  friend bool operator==(const MultilabelModel&, const MultilabelModel&) = default;
};

namespace detail {

inline const BaseLearnerSpec& label_spec(const BaseLearnerSpec& base, const FitOptions& opt, std::size_t k) {
  return opt.per_label.empty() ? base : opt.per_label.at(k);
}

inline void check_options(const Task& task, const FitOptions& opt) {
  check_threshold(opt.threshold);
  if (!opt.per_label.empty() && opt.per_label.size() != task.m())
    throw InvalidArgument("per-label learner list must have one entry per label");
}

inline MultilabelModel skeleton(Method method, const Task& task, const BaseLearnerSpec& base, const FitOptions& opt) {
  MultilabelModel model;
  model.method = method;
  model.base_spec = base;
  model.threshold = opt.threshold;
  model.chain_order = ChainOrder::identity(task.m());
  model.internal_folds = uses_internal_cv(method) ? opt.internal_folds : 0;
  model.seed = opt.seed;
  model.label_names = task.dataset.label_names();
  model.feature_names = task.dataset.feature_names();
  model.dropped_features = task.dataset.dropped_features();
  return model;
}

// Label columns `cols` of Y as a 0/1 matrix.
inline BinaryMatrix label_columns(const BinaryMatrix& labels, const std::vector<std::size_t>& cols) {
  return labels.select_cols(cols);
}

inline BinaryMatrix single_column(const BinaryVector& v) {
  return BinaryMatrix::from_rows(v.size(), 1, v);
}

inline std::vector<std::size_t> all_but(std::size_t m, std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < m; ++l)
    if (l != k) out.push_back(l);
  return out;
}

inline FoldAssignment internal_folds(const Task& task, const FitOptions& opt) {
  if (opt.internal_folds < 2) throw InvalidArgument("internal folds must be at least 2");
  if (opt.internal_folds > task.n())
    throw InvalidArgument("internal folds (" + std::to_string(opt.internal_folds) + ") exceed number of instances (" +
                          std::to_string(task.n()) + ")");
  return kfold_split(task.n(), opt.internal_folds, derive_seed(opt.seed, seed_stream::internal_cv));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Out-of-sample (cross-fitted) label generation

/// For every fold, fits on the other folds and predicts the held-out rows.
/// Entry i therefore never comes from a model that saw row i.
inline BinaryVector cross_fit_labels(const BaseLearnerSpec& base, const RealMatrix& features,
                                     const BinaryVector& target, const FoldAssignment& folds, double threshold = 0.5) {
  if (folds.n() != features.rows() || target.size() != features.rows())
    throw InvalidArgument("fold assignment does not match instance count");
  BinaryVector out(target.size());
  for (std::size_t f = 0; f < folds.k; ++f) {
    const auto train = folds.train_indices(f);
    const auto test = folds.test_indices(f);
    BinaryVector y(train.size());
    for (std::size_t t = 0; t < train.size(); ++t) y[t] = target[train[t]];
    const auto model = fit_binary(base, features.select_rows(train), y);
    const auto hard = predict_label(model, features.select_rows(test), threshold);
    for (std::size_t t = 0; t < test.size(); ++t) out[test[t]] = hard[t];
  }
  return out;
}

/// Cross-fitted predictions of label `target_column` from X augmented with
/// the true label columns `augmenting_columns`.
inline BinaryVector out_of_sample_labels(const Task& task, const BaseLearnerSpec& base, const FoldAssignment& folds,
                                         std::size_t target_column,
                                         const std::vector<std::size_t>& augmenting_columns = {},
                                         double threshold = 0.5) {
  if (target_column >= task.m()) throw InvalidArgument("target column out of range");
  for (auto c : augmenting_columns)
    if (c >= task.m()) throw InvalidArgument("augmenting column out of range");
  const auto& d = task.dataset;
  const auto x = augment_features(d.features(), detail::label_columns(d.labels(), augmenting_columns));
  return cross_fit_labels(base, x, d.label_column(target_column), folds, threshold);
}

inline BinaryVector out_of_sample_labels(const Task& task, const BaseLearnerSpec& base, std::size_t folds,
                                         std::uint64_t seed, std::size_t target_column,
                                         const std::vector<std::size_t>& augmenting_columns = {},
                                         double threshold = 0.5) {
  if (folds < 2) throw InvalidArgument("number of folds must be at least 2");
  if (folds > task.n()) throw InvalidArgument("number of folds exceeds number of instances");
  return out_of_sample_labels(task, base, kfold_split(task.n(), folds, seed), target_column, augmenting_columns,
                              threshold);
}

// ---------------------------------------------------------------------------
// Fitting

inline MultilabelModel fit_binary_relevance(const Task& task, const BaseLearnerSpec& base, const FitOptions& opt = {}) {
  detail::check_options(task, opt);
  auto model = detail::skeleton(Method::BR, task, base, opt);
  const auto& d = task.dataset;
  model.per_label_models.resize(task.m());
  parallel_for(task.m(), opt.workers, [&](std::size_t k) {
    model.per_label_models[k] = fit_binary(detail::label_spec(base, opt, k), d.features(), d.label_column(k));
  });
  return model;
}

inline MultilabelModel fit_binary_relevance(const Task& task, const BaseLearnerSpec& base, double threshold) {
  FitOptions opt;
  opt.threshold = threshold;
  return fit_binary_relevance(task, base, opt);
}

/// Chain position j trains on X plus the TRUE labels of positions 0..j-1.
inline MultilabelModel fit_classifier_chains(const Task& task, const BaseLearnerSpec& base,
                                             const FitOptions& opt = {}) {
  detail::check_options(task, opt);
  auto model = detail::skeleton(Method::CC, task, base, opt);
  model.chain_order = opt.order.value_or(ChainOrder::identity(task.m()));
  if (model.chain_order.size() != task.m()) throw InvalidArgument("chain order length does not match label count");
  const auto& d = task.dataset;
  model.per_label_models.resize(task.m());
  RealMatrix x = d.features();
  for (std::size_t j = 0; j < task.m(); ++j) {
    const auto k = model.chain_order.at(j);
    const auto y = d.label_column(k);
    model.per_label_models[k] = fit_binary(detail::label_spec(base, opt, k), x, y);
    x = augment_features(x, detail::single_column(y));
  }
  return model;
}

/// Chain position j trains on X plus cross-fitted PREDICTED labels of
/// positions 0..j-1. Each stage's predictions are produced on the already
/// augmented matrix, so stage j's internal models see yhat_0..yhat_{j-1}.
/// The stored chain classifiers are fitted on all rows and play the role of
/// the full-data level-1 predictors at prediction time.
inline MultilabelModel fit_nested_stacking(const Task& task, const BaseLearnerSpec& base,
                                           const FitOptions& opt = {}) {
  detail::check_options(task, opt);
  auto model = detail::skeleton(Method::NST, task, base, opt);
  model.chain_order = opt.order.value_or(ChainOrder::identity(task.m()));
  if (model.chain_order.size() != task.m()) throw InvalidArgument("chain order length does not match label count");
  const auto folds = detail::internal_folds(task, opt);
  const auto& d = task.dataset;
  model.per_label_models.resize(task.m());
  RealMatrix x = d.features();
  for (std::size_t j = 0; j < task.m(); ++j) {
    const auto k = model.chain_order.at(j);
    const auto& spec = detail::label_spec(base, opt, k);
    const auto y = d.label_column(k);
    model.per_label_models[k] = fit_binary(spec, x, y);
    if (j + 1 < task.m()) {
      const auto yhat = cross_fit_labels(spec, x, y, folds, opt.threshold);
      x = augment_features(x, detail::single_column(yhat));
    }
  }
  return model;
}

/// Label k trains on X plus the TRUE labels of all other labels (in label
/// order). A first-level BR model supplies those columns at prediction time.
inline MultilabelModel fit_dbr(const Task& task, const BaseLearnerSpec& base, const FitOptions& opt = {}) {
  detail::check_options(task, opt);
  auto model = detail::skeleton(Method::DBR, task, base, opt);
  const auto& d = task.dataset;
  const auto& first = opt.first_level ? *opt.first_level : base;
  const std::size_t m = task.m();
  model.per_label_models.resize(m);
  model.level1_models.resize(m);
  parallel_for(2 * m, opt.workers, [&](std::size_t job) {
    const std::size_t k = job % m;
    if (job < m) {
      model.level1_models[k] = fit_binary(opt.first_level ? first : detail::label_spec(base, opt, k), d.features(),
                                          d.label_column(k));
    } else {
      const auto x = augment_features(d.features(), detail::label_columns(d.labels(), detail::all_but(m, k)));
      model.per_label_models[k] = fit_binary(detail::label_spec(base, opt, k), x, d.label_column(k));
    }
  });
  return model;
}

/// Label k trains on X plus the cross-fitted BR predictions of ALL m labels
/// (its own included). The first-level BR models are refitted on all rows.
inline MultilabelModel fit_stacking(const Task& task, const BaseLearnerSpec& base, const FitOptions& opt = {}) {
  detail::check_options(task, opt);
  auto model = detail::skeleton(Method::STA, task, base, opt);
  const auto folds = detail::internal_folds(task, opt);
  const auto& d = task.dataset;
  const std::size_t m = task.m();
  auto first_spec = [&](std::size_t k) -> const BaseLearnerSpec& {
    return opt.first_level ? *opt.first_level : detail::label_spec(base, opt, k);
  };

  BinaryMatrix yhat(task.n(), m);
  model.level1_models.resize(m);
  parallel_for(2 * m, opt.workers, [&](std::size_t job) {
    const std::size_t k = job % m;
    if (job < m) {
      yhat.set_column(k, cross_fit_labels(first_spec(k), d.features(), d.label_column(k), folds, opt.threshold));
    } else {
      model.level1_models[k] = fit_binary(first_spec(k), d.features(), d.label_column(k));
    }
  });

  const auto x = augment_features(d.features(), yhat);
  model.per_label_models.resize(m);
  parallel_for(m, opt.workers, [&](std::size_t k) {
    model.per_label_models[k] = fit_binary(detail::label_spec(base, opt, k), x, d.label_column(k));
  });
  return model;
}

inline MultilabelModel fit_multilabel(Method method, const Task& task, const BaseLearnerSpec& base,
                                      const FitOptions& opt = {}) {
  switch (method) {
    case Method::BR: return fit_binary_relevance(task, base, opt);
    case Method::CC: return fit_classifier_chains(task, base, opt);
    case Method::NST: return fit_nested_stacking(task, base, opt);
    case Method::DBR: return fit_dbr(task, base, opt);
    case Method::STA: return fit_stacking(task, base, opt);
  }
  throw InvalidArgument("unknown method");
}

// ---------------------------------------------------------------------------
// Prediction

inline PredictionSet predict_multilabel(const MultilabelModel& model, const RealMatrix& features,
                                        std::optional<BinaryMatrix> truth = std::nullopt) {
  const std::size_t n = features.rows(), m = model.n_labels();
  if (features.cols() != model.n_features())
    throw InvalidArgument("width mismatch: model expects " + std::to_string(model.n_features()) +
                          " features, got " + std::to_string(features.cols()));
  RealMatrix probs(n, m);

  switch (model.method) {
    case Method::BR:
      for (std::size_t k = 0; k < m; ++k) probs.set_column(k, predict_prob(model.per_label_models[k], features));
      break;
    case Method::CC:
    case Method::NST: {
      RealMatrix x = features;
      for (std::size_t j = 0; j < m; ++j) {
        const auto k = model.chain_order.at(j);
        const auto p = predict_prob(model.per_label_models[k], x);
        probs.set_column(k, p);
        if (j + 1 < m) x = augment_features(x, detail::single_column(threshold_probs(p, model.threshold)));
      }
      break;
    }
    case Method::DBR:
    case Method::STA: {
      BinaryMatrix first(n, m);
      for (std::size_t k = 0; k < m; ++k)
        first.set_column(k, predict_label(model.level1_models[k], features, model.threshold));
      if (model.method == Method::STA) {
        const auto x = augment_features(features, first);
        for (std::size_t k = 0; k < m; ++k) probs.set_column(k, predict_prob(model.per_label_models[k], x));
      } else {
        for (std::size_t k = 0; k < m; ++k) {
          const auto x = augment_features(features, detail::label_columns(first, detail::all_but(m, k)));
          probs.set_column(k, predict_prob(model.per_label_models[k], x));
        }
      }
      break;
    }
  }
  return PredictionSet::from_probs(std::move(probs), model.label_names, model.threshold, std::move(truth));
}

/// Reorders named data columns into the model's feature order. Columns the
/// model dropped as constant during training are ignored.
inline RealMatrix align_features(const MultilabelModel& model, const RealMatrix& columns,
                                 const std::vector<std::string>& names) {
  if (names.size() != columns.cols()) throw InvalidArgument("column name count does not match data width");
  const std::set<std::string> dropped(model.dropped_features.begin(), model.dropped_features.end());
  std::map<std::string, std::size_t> where;
  std::size_t used = 0;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (dropped.count(names[j])) continue;
    where[names[j]] = j;
    ++used;
  }
  auto mismatch = [&](const std::string& detail) {
    return InvalidArgument("width mismatch: model expects " + std::to_string(model.n_features()) +
                           " features, data has " + std::to_string(used) + " (" + detail + ")");
  };
  for (const auto& [name, j] : where)
    if (std::find(model.feature_names.begin(), model.feature_names.end(), name) == model.feature_names.end())
      throw mismatch("unexpected column '" + name + "'");
  RealMatrix out(columns.rows(), model.n_features());
  for (std::size_t f = 0; f < model.n_features(); ++f) {
    const auto it = where.find(model.feature_names[f]);
    if (it == where.end()) throw mismatch("missing column '" + model.feature_names[f] + "'");
    for (std::size_t i = 0; i < columns.rows(); ++i) out(i, f) = columns(i, it->second);
  }
  return out;
}

}  // namespace mlforge
