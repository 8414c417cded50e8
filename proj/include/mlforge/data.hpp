#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "matrix.hpp"

namespace mlforge {

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline void require_unique(const std::vector<std::string>& names, const char* what) {
  std::set<std::string> seen;
  for (const auto& n : names)
    if (!seen.insert(n).second) throw InvalidArgument(std::string("duplicate ") + what + " name '" + n + "'");
}

}  // namespace detail

/// Features X (n x p, numeric) and labels Y (n x m, 0/1) with their names.
/// Immutable once built; the constructor enforces every shape invariant.
class MultilabelDataset {
 public:
  MultilabelDataset(RealMatrix features, BinaryMatrix labels, std::vector<std::string> feature_names,
                    std::vector<std::string> label_names, std::vector<std::string> dropped_features = {})
      : features_(std::move(features)),
        labels_(std::move(labels)),
        feature_names_(std::move(feature_names)),
        label_names_(std::move(label_names)),
        dropped_features_(std::move(dropped_features)) {
    if (labels_.rows() == 0) throw InvalidArgument("dataset needs at least one instance");
    if (labels_.cols() == 0) throw InvalidArgument("dataset needs at least one label");
    // A feature-less dataset may come with a 0x0 feature matrix.
    if (features_.cols() == 0 && features_.rows() == 0) features_ = RealMatrix(labels_.rows(), 0);
    if (features_.rows() != labels_.rows())
      throw InvalidArgument("feature rows (" + std::to_string(features_.rows()) + ") != label rows (" +
                            std::to_string(labels_.rows()) + ")");
    if (feature_names_.size() != features_.cols()) throw InvalidArgument("feature name count does not match p");
    if (label_names_.size() != labels_.cols()) throw InvalidArgument("label name count does not match m");
    detail::require_unique(feature_names_, "feature");
    detail::require_unique(label_names_, "label");
    for (auto v : labels_.storage())
      if (v > 1) throw InvalidArgument("label matrix entries must be 0 or 1");
    for (auto v : features_.storage())
      if (std::isnan(v)) throw InvalidArgument("missing feature values are not supported");
  }

  std::size_t n_instances() const noexcept { return labels_.rows(); }
  std::size_t n_features() const noexcept { return features_.cols(); }
  std::size_t n_labels() const noexcept { return labels_.cols(); }

  const RealMatrix& features() const noexcept { return features_; }
  const BinaryMatrix& labels() const noexcept { return labels_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::vector<std::string>& label_names() const noexcept { return label_names_; }
  // Constant feature columns removed at ingestion.
  const std::vector<std::string>& dropped_features() const noexcept { return dropped_features_; }

  BinaryVector label_column(std::size_t k) const { return labels_.column(k); }

  MultilabelDataset subset(std::span<const std::size_t> rows) const {
    return {features_.select_rows(rows), labels_.select_rows(rows), feature_names_, label_names_, dropped_features_};
  }

 private:
  RealMatrix features_;
  BinaryMatrix labels_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> label_names_;
  std::vector<std::string> dropped_features_;
};

/// A named multilabel problem. The positive class of every label is 1.
struct Task {
  Task(std::string task_id, MultilabelDataset data) : id(std::move(task_id)), dataset(std::move(data)) {
    if (id.empty()) throw InvalidArgument("task id must be nonempty");
  }

  std::string id;
  MultilabelDataset dataset;
  static constexpr int positive_value = 1;

  std::size_t n() const noexcept { return dataset.n_instances(); }
  std::size_t p() const noexcept { return dataset.n_features(); }
  std::size_t m() const noexcept { return dataset.n_labels(); }
};

struct DatasetStats {
  std::size_t n_instances = 0;
  std::size_t n_predictors = 0;
  std::size_t n_labels = 0;
  double cardinality = 0.0;
  std::vector<double> per_label_prevalence;
  bool featureless = false;  // p == 0: only the featureless learner applies
};

// ---------------------------------------------------------------------------
// Tabular input

/// One column of a raw table. Nominal columns store the level index as a
/// double and list their levels in declaration order.
struct Column {
  std::string name;
  std::vector<double> values;
  std::vector<std::string> levels;

  bool nominal() const noexcept { return !levels.empty(); }
};

struct Table {
  std::vector<Column> columns;

  std::size_t n_rows() const noexcept { return columns.empty() ? 0 : columns.front().values.size(); }

  const Column* find(const std::string& name) const {
    for (const auto& c : columns)
      if (c.name == name) return &c;
    return nullptr;
  }
};

struct TaskOptions {
  // Remove feature columns that take a single value (n >= 2 only).
  bool drop_constant_features = false;
  // Receives one line per dropped column.
  std::ostream* notices = nullptr;
};

namespace detail {

// Maps a target column onto {0,1}; nullopt when the column is not binary.
inline std::optional<BinaryVector> binary_target(const Column& col) {
  BinaryVector out(col.values.size());
  if (col.nominal()) {
    std::vector<int> code(col.levels.size(), -1);
    for (std::size_t l = 0; l < col.levels.size(); ++l) {
      const auto s = lower(col.levels[l]);
      if (s == "0" || s == "false") code[l] = 0;
      else if (s == "1" || s == "true") code[l] = 1;
      else return std::nullopt;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto idx = static_cast<std::size_t>(col.values[i]);
      if (idx >= code.size()) return std::nullopt;
      out[i] = static_cast<std::uint8_t>(code[idx]);
    }
    return out;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (col.values[i] == 0.0) out[i] = 0;
    else if (col.values[i] == 1.0) out[i] = 1;
    else return std::nullopt;
  }
  return out;
}

}  // namespace detail

struct EncodedFeatures {
  RealMatrix values;
  std::vector<std::string> names;
  std::vector<std::string> dropped;
};

/// Every column not in `excluded` becomes a feature; nominal columns are
/// one-hot encoded in level order and named "column=level".
inline EncodedFeatures encode_features(const Table& table, const std::set<std::string>& excluded,
                                       const TaskOptions& options = {}) {
  const std::size_t n = table.n_rows();
  for (const auto& c : table.columns)
    if (c.values.size() != n) throw InvalidArgument("column '" + c.name + "' has inconsistent length");

  std::vector<std::vector<double>> cols;
  EncodedFeatures out;
  auto add_feature = [&](std::string name, std::vector<double> values) {
    const bool constant =
        n >= 2 && std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); });
    if (options.drop_constant_features && constant) {
      if (options.notices) *options.notices << "notice: dropped constant feature '" << name << "'\n";
      out.dropped.push_back(std::move(name));
      return;
    }
    out.names.push_back(std::move(name));
    cols.push_back(std::move(values));
  };

  for (const auto& col : table.columns) {
    if (excluded.count(col.name)) continue;
    if (!col.nominal()) {
      add_feature(col.name, col.values);
      continue;
    }
    for (std::size_t l = 0; l < col.levels.size(); ++l) {
      std::vector<double> indicator(n);
      for (std::size_t i = 0; i < n; ++i) indicator[i] = static_cast<std::size_t>(col.values[i]) == l ? 1.0 : 0.0;
      add_feature(col.name + "=" + col.levels[l], std::move(indicator));
    }
  }
  out.values = RealMatrix(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) out.values.set_column(j, cols[j]);
  return out;
}

/// Builds a task from a table: `target_names` become the label matrix, every
/// other column becomes a feature as in encode_features.
inline Task make_multilabel_task(const Table& table, const std::vector<std::string>& target_names, std::string id,
                                 const TaskOptions& options = {}) {
  if (target_names.empty()) throw InvalidArgument("at least one target is required");
  detail::require_unique(target_names, "target");
  std::vector<std::string> column_names;
  for (const auto& c : table.columns) column_names.push_back(c.name);
  detail::require_unique(column_names, "column");

  const std::size_t n = table.n_rows();
  BinaryMatrix labels(n, target_names.size());
  for (std::size_t k = 0; k < target_names.size(); ++k) {
    const Column* col = table.find(target_names[k]);
    if (col == nullptr) throw InvalidArgument("unknown target '" + target_names[k] + "'");
    if (col->values.size() != n) throw InvalidArgument("column '" + col->name + "' has inconsistent length");
    auto bits = detail::binary_target(*col);
    if (!bits) throw InvalidArgument("non-binary label values in target column '" + target_names[k] + "'");
    labels.set_column(k, *bits);
  }

  auto enc = encode_features(table, std::set<std::string>(target_names.begin(), target_names.end()), options);
  return Task(std::move(id), MultilabelDataset(std::move(enc.values), std::move(labels), std::move(enc.names),
                                               target_names, std::move(enc.dropped)));
}

inline DatasetStats dataset_stats(const Task& task) {
  const auto& d = task.dataset;
  DatasetStats s;
  s.n_instances = d.n_instances();
  s.n_predictors = d.n_features();
  s.n_labels = d.n_labels();
  s.featureless = d.n_features() == 0;
  s.per_label_prevalence.assign(s.n_labels, 0.0);
  std::size_t ones = 0;
  for (std::size_t k = 0; k < s.n_labels; ++k) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < s.n_instances; ++i) count += d.labels()(i, k);
    ones += count;
    s.per_label_prevalence[k] = static_cast<double>(count) / static_cast<double>(s.n_instances);
  }
  s.cardinality = static_cast<double>(ones) / static_cast<double>(s.n_instances);
  return s;
}

/// Labels whose prevalence is strictly below `min_prevalence`, in task order.
inline std::vector<std::string> sparse_labels(const Task& task, double min_prevalence) {
  const auto stats = dataset_stats(task);
  std::vector<std::string> out;
  for (std::size_t k = 0; k < stats.n_labels; ++k)
    if (stats.per_label_prevalence[k] < min_prevalence) out.push_back(task.dataset.label_names()[k]);
  return out;
}

inline std::pair<Task, std::vector<std::string>> filter_sparse_labels(const Task& task, double min_prevalence = 0.02) {
  if (!(min_prevalence >= 0.0 && min_prevalence <= 1.0))
    throw InvalidArgument("min_prevalence must lie in [0,1]");
  const auto stats = dataset_stats(task);
  const auto& d = task.dataset;
  std::vector<std::size_t> keep;
  std::vector<std::string> removed;
  for (std::size_t k = 0; k < stats.n_labels; ++k) {
    if (stats.per_label_prevalence[k] < min_prevalence) removed.push_back(d.label_names()[k]);
    else keep.push_back(k);
  }
  if (keep.empty()) throw InvalidArgument("no labels remain after removing sparse labels");
  std::vector<std::string> names;
  for (auto k : keep) names.push_back(d.label_names()[k]);
  MultilabelDataset kept(d.features(), d.labels().select_cols(keep), d.feature_names(), std::move(names),
                         d.dropped_features());
  return {Task(task.id, std::move(kept)), std::move(removed)};
}

/// Appends 0/1 columns to a feature matrix, original columns first.
inline RealMatrix augment_features(const RealMatrix& features, const BinaryMatrix& extra_columns) {
  return hconcat(features, extra_columns);
}

/// Named variant: also returns the extended column-name list.
inline std::pair<RealMatrix, std::vector<std::string>> augment_features(const RealMatrix& features,
                                                                        const std::vector<std::string>& feature_names,
                                                                        const BinaryMatrix& extra_columns,
                                                                        const std::vector<std::string>& column_names) {
  if (column_names.size() != extra_columns.cols()) throw InvalidArgument("extra column name count mismatch");
  auto names = feature_names;
  names.insert(names.end(), column_names.begin(), column_names.end());
  return {hconcat(features, extra_columns), std::move(names)};
}

}  // namespace mlforge
