#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <type_traits>
#include <variant>
#include <vector>

#include "error.hpp"
#include "matrix.hpp"
#include "text.hpp"

namespace mlforge {

// ---------------------------------------------------------------------------
// Learner recipes

enum class LearnerKind {
  featureless,
  logistic,
  tree,
  mock_constant,
  mock_recorder,
  mock_memorizer,
  mock_passthrough,
};

inline const char* to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::featureless: return "featureless";
    case LearnerKind::logistic: return "logistic";
    case LearnerKind::tree: return "tree";
    case LearnerKind::mock_constant: return "mock_constant";
    case LearnerKind::mock_recorder: return "mock_recorder";
    case LearnerKind::mock_memorizer: return "mock_memorizer";
    case LearnerKind::mock_passthrough: return "mock_passthrough";
  }
  return "?";
}

inline LearnerKind parse_learner_kind(const std::string& name) {
  for (auto k : {LearnerKind::featureless, LearnerKind::logistic, LearnerKind::tree, LearnerKind::mock_constant,
                 LearnerKind::mock_recorder, LearnerKind::mock_memorizer, LearnerKind::mock_passthrough})
    if (name == to_string(k)) return k;
  if (name == "fl") return LearnerKind::featureless;
  throw InvalidArgument("unknown base learner '" + name + "'");
}

/// Base learner kind plus its hyperparameters. Construction fills defaults
/// and rejects unknown keys or out-of-range values, so every live spec is
/// fully resolved.
///
///   logistic:         learning_rate (0.1), iterations (1000), l2 (1e-4)
///   tree:             max_depth (8), min_split (5)
///   mock_constant:    value (1); probability returned for every row
///   mock_passthrough: column (1); returns input column (cols - column)
class BaseLearnerSpec {
 public:
  using Params = std::map<std::string, double>;

  BaseLearnerSpec() : BaseLearnerSpec(LearnerKind::featureless) {}

  explicit BaseLearnerSpec(LearnerKind kind, const Params& overrides = {}) : kind_(kind), params_(defaults(kind)) {
    for (const auto& [key, value] : overrides) {
      if (!params_.count(key))
        throw InvalidArgument("unknown hyperparameter '" + key + "' for learner " + mlforge::to_string(kind));
      params_[key] = value;
    }
    validate();
  }

  LearnerKind kind() const noexcept { return kind_; }
  const Params& params() const noexcept { return params_; }
  double param(const std::string& key) const { return params_.at(key); }

  /// "kind" or "kind:key=value,key=value" (all resolved hyperparameters).
  std::string to_string() const {
    std::string s = mlforge::to_string(kind_);
    char sep = ':';
    for (const auto& [k, v] : params_) {
      s += sep + k + "=" + text::format_real(v);
      sep = ',';
    }
    return s;
  }

  static BaseLearnerSpec parse(const std::string& s) {
    const auto colon = s.find(':');
    const auto kind = parse_learner_kind(std::string(text::trim(s.substr(0, colon))));
    Params params;
    if (colon != std::string::npos) {
      for (const auto& item : text::split(s.substr(colon + 1), ',')) {
        const auto t = text::trim(item);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw InvalidArgument("expected key=value in learner spec, got '" + std::string(t) + "'");
        const auto value = text::parse_real(text::trim(t.substr(eq + 1)));
        if (!value) throw InvalidArgument("non-numeric hyperparameter value in '" + std::string(t) + "'");
        params[std::string(text::trim(t.substr(0, eq)))] = *value;
      }
    }
    return BaseLearnerSpec(kind, params);
  }

  friend bool operator==(const BaseLearnerSpec&, const BaseLearnerSpec&) = default;

 private:
  static Params defaults(LearnerKind kind) {
    switch (kind) {
      case LearnerKind::logistic: return {{"learning_rate", 0.1}, {"iterations", 1000}, {"l2", 1e-4}};
      case LearnerKind::tree: return {{"max_depth", 8}, {"min_split", 5}};
      case LearnerKind::mock_constant: return {{"value", 1.0}};
      case LearnerKind::mock_passthrough: return {{"column", 1}};
      default: return {};
    }
  }

  void require_count(const std::string& key, double min) const {
    const double v = params_.at(key);
    if (!(v >= min) || v != std::floor(v) || v > 1e9)
      throw InvalidArgument(key + " must be an integer >= " + text::format_real(min));
  }

  void validate() const {
    switch (kind_) {
      case LearnerKind::logistic:
        if (!(params_.at("learning_rate") > 0.0) || !std::isfinite(params_.at("learning_rate")))
          throw InvalidArgument("learning_rate must be positive");
        if (!(params_.at("l2") >= 0.0) || !std::isfinite(params_.at("l2")))
          throw InvalidArgument("l2 must be non-negative");
        require_count("iterations", 1);
        break;
      case LearnerKind::tree:
        require_count("max_depth", 0);
        require_count("min_split", 2);
        break;
      case LearnerKind::mock_constant:
        if (!(params_.at("value") >= 0.0 && params_.at("value") <= 1.0))
          throw InvalidArgument("mock_constant value must lie in [0,1]");
        break;
      case LearnerKind::mock_passthrough: require_count("column", 1); break;
      default: break;
    }
  }

  LearnerKind kind_;
  Params params_;
};

// ---------------------------------------------------------------------------
// Fitted state per learner family

struct ConstantState {
  double probability = 0.0;
  friend bool operator==(const ConstantState&, const ConstantState&) = default;
};

struct LogisticState {
  std::vector<double> mean;
  std::vector<double> scale;   // 0 marks a constant column excluded from the linear term
  std::vector<double> weights; // one per input column; 0 for excluded columns
  double bias = 0.0;
  friend bool operator==(const LogisticState&, const LogisticState&) = default;
};

struct TreeNode {
  // Leaf when feature < 0.
  int feature = -1;
  double threshold = 0.0;  // go left iff x[feature] <= threshold
  int left = -1;
  int right = -1;
  double probability = 0.0;
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeState {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  friend bool operator==(const TreeState&, const TreeState&) = default;
};

// Exact-row lookup table; unseen rows get the training positive rate.
struct MemorizerState {
  RealMatrix rows;                 // distinct training rows, in first-seen order
  std::vector<double> probability; // positive fraction among duplicates of each row
  // Training rows in their original order, with targets. Kept so that tests
  // can inspect exactly what a wrapper fed into the learner.
  RealMatrix training_features;
  BinaryVector training_target;
  friend bool operator==(const MemorizerState&, const MemorizerState&) = default;
};

struct PassthroughState {
  std::size_t column = 0;
  friend bool operator==(const PassthroughState&, const PassthroughState&) = default;
};

using FittedState = std::variant<ConstantState, LogisticState, TreeState, MemorizerState, PassthroughState>;

/// A fitted binary classifier C: R^input_dimension -> [0,1].
struct BinaryModel {
  BaseLearnerSpec spec;
  std::size_t input_dimension = 0;
  double train_positive_rate = 0.0;
  FittedState state;

  friend bool operator==(const BinaryModel&, const BinaryModel&) = default;
};

// ---------------------------------------------------------------------------
// Logistic regression

namespace logistic {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// Mean log-loss plus (l2/2)||w||^2 on already-standardized inputs.
inline double loss(const RealMatrix& x, std::span<const std::uint8_t> y, std::span<const double> w, double b,
                   double l2) {
  const std::size_t n = x.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x(i, j);
    total += softplus(z) - (y[i] ? z : 0.0);
  }
  double penalty = 0.0;
  for (double wj : w) penalty += wj * wj;
  return total / static_cast<double>(n) + 0.5 * l2 * penalty;
}

/// Analytic gradient of loss(); grad_w must have w.size() entries.
inline void gradient(const RealMatrix& x, std::span<const std::uint8_t> y, std::span<const double> w, double b,
                     double l2, std::span<double> grad_w, double& grad_b) {
  const std::size_t n = x.rows();
  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x(i, j);
    const double r = sigmoid(z) - static_cast<double>(y[i]);
    for (std::size_t j = 0; j < w.size(); ++j) grad_w[j] += r * x(i, j);
    grad_b += r;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < w.size(); ++j) grad_w[j] = grad_w[j] * inv_n + l2 * w[j];
  grad_b *= inv_n;
}

inline LogisticState fit(const RealMatrix& features, std::span<const std::uint8_t> target, double learning_rate,
                         std::size_t iterations, double l2) {
  const std::size_t n = features.rows(), p = features.cols();
  LogisticState s;
  s.mean.assign(p, 0.0);
  s.scale.assign(p, 0.0);
  s.weights.assign(p, 0.0);

  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < p; ++j) {
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += features(i, j);
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (features(i, j) - mu) * (features(i, j) - mu);
    const double sd = std::sqrt(var / static_cast<double>(n));
    s.mean[j] = mu;
    if (sd > 0.0) {
      s.scale[j] = sd;
      active.push_back(j);
    }
  }

  RealMatrix z(n, active.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < active.size(); ++a) {
      const auto j = active[a];
      z(i, a) = (features(i, j) - s.mean[j]) / s.scale[j];
    }

  std::vector<double> w(active.size(), 0.0), gw(active.size());
  double b = 0.0, gb = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    gradient(z, target, w, b, l2, gw, gb);
    for (std::size_t a = 0; a < w.size(); ++a) w[a] -= learning_rate * gw[a];
    b -= learning_rate * gb;
  }
  for (std::size_t a = 0; a < active.size(); ++a) s.weights[active[a]] = w[a];
  s.bias = b;
  return s;
}

inline double predict(const LogisticState& s, std::span<const double> x) {
  double z = s.bias;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (s.scale[j] > 0.0) z += s.weights[j] * (x[j] - s.mean[j]) / s.scale[j];
  return sigmoid(z);
}

}  // namespace logistic

// ---------------------------------------------------------------------------
// CART classification tree with Gini splitting

namespace cart {

namespace detail {

inline double gini(double pos, double total) {
  if (total <= 0) return 0.0;
  const double q = pos / total;
  return 2.0 * q * (1.0 - q);
}

struct Builder {
  const RealMatrix& x;
  std::span<const std::uint8_t> y;
  std::size_t max_depth;
  std::size_t min_split;
  std::vector<TreeNode> nodes;

  int grow(std::vector<std::size_t>& idx, std::size_t depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    double pos = 0;
    for (auto i : idx) pos += y[i];
    const double total = static_cast<double>(idx.size());
    nodes[id].probability = pos / total;

    if (depth >= max_depth || idx.size() < min_split || pos == 0 || pos == total) return id;

    // Best split by weighted child Gini. Zero-gain splits are accepted so that
    // interactions such as XOR can be reached at the next level; ties keep
    // the first (feature, threshold) in scan order.
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_impurity = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order(idx);
    for (std::size_t f = 0; f < x.cols(); ++f) {
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x(a, f) < x(b, f); });
      double left_pos = 0;
      for (std::size_t s = 0; s + 1 < order.size(); ++s) {
        left_pos += y[order[s]];
        const double lo = x(order[s], f), hi = x(order[s + 1], f);
        if (!(lo < hi)) continue;
        const double nl = static_cast<double>(s + 1), nr = total - nl;
        const double impurity = (nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr)) / total;
        if (impurity < best_impurity - 1e-15) {
          best_impurity = impurity;
          best_feature = static_cast<int>(f);
          best_threshold = lo + (hi - lo) / 2.0;
          if (!(best_threshold < hi)) best_threshold = lo;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) (x(i, best_feature) <= best_threshold ? left : right).push_back(i);
    nodes[id].feature = best_feature;
    nodes[id].threshold = best_threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }
};

}  // namespace detail

inline TreeState fit(const RealMatrix& x, std::span<const std::uint8_t> y, std::size_t max_depth,
                     std::size_t min_split) {
  detail::Builder b{x, y, max_depth, min_split, {}};
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  b.grow(idx, 0);
  return TreeState{std::move(b.nodes)};
}

inline double predict(const TreeState& t, std::span<const double> x) {
  std::size_t id = 0;
  while (t.nodes[id].feature >= 0) {
    const auto& node = t.nodes[id];
    id = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
  }
  return t.nodes[id].probability;
}

}  // namespace cart

// ---------------------------------------------------------------------------
// fit / predict

inline BinaryModel fit_binary(const BaseLearnerSpec& spec, const RealMatrix& features,
                              std::span<const std::uint8_t> target) {
  if (features.rows() != target.size())
    throw InvalidArgument("dimension mismatch: " + std::to_string(features.rows()) + " feature rows vs " +
                          std::to_string(target.size()) + " targets");
  if (target.empty()) throw InvalidArgument("cannot fit a binary model on zero rows");

  BinaryModel model{spec, features.cols(), 0.0, ConstantState{}};
  std::size_t pos = 0;
  for (auto v : target) {
    if (v > 1) throw InvalidArgument("binary target must contain only 0/1");
    pos += v;
  }
  model.train_positive_rate = static_cast<double>(pos) / static_cast<double>(target.size());
  const bool constant_target = pos == 0 || pos == target.size();

  switch (spec.kind()) {
    case LearnerKind::featureless:
    case LearnerKind::mock_recorder:
      model.state = ConstantState{model.train_positive_rate};
      break;
    case LearnerKind::mock_constant:
      model.state = ConstantState{spec.param("value")};
      break;
    case LearnerKind::mock_passthrough: {
      const auto back = static_cast<std::size_t>(spec.param("column"));
      if (back > features.cols())
        throw InvalidArgument("mock_passthrough column offset exceeds input width " + std::to_string(features.cols()));
      model.state = PassthroughState{features.cols() - back};
      break;
    }
    case LearnerKind::logistic:
      if (constant_target) {
        model.state = ConstantState{model.train_positive_rate};
        break;
      }
      model.state = logistic::fit(features, target, spec.param("learning_rate"),
                                  static_cast<std::size_t>(spec.param("iterations")), spec.param("l2"));
      break;
    case LearnerKind::tree:
      if (constant_target) {
        model.state = ConstantState{model.train_positive_rate};
        break;
      }
      model.state = cart::fit(features, target, static_cast<std::size_t>(spec.param("max_depth")),
                              static_cast<std::size_t>(spec.param("min_split")));
      break;
    case LearnerKind::mock_memorizer: {
      MemorizerState s;
      std::vector<double> flat;
      std::vector<std::pair<double, double>> counts;  // (positives, total)
      std::map<std::vector<double>, std::size_t> seen;
      for (std::size_t i = 0; i < features.rows(); ++i) {
        std::vector<double> r(features.row(i).begin(), features.row(i).end());
        auto [it, inserted] = seen.emplace(r, counts.size());
        if (inserted) {
          counts.emplace_back(0.0, 0.0);
          flat.insert(flat.end(), r.begin(), r.end());
        }
        counts[it->second].first += target[i];
        counts[it->second].second += 1.0;
      }
      s.rows = RealMatrix::from_rows(counts.size(), features.cols(), std::move(flat));
      for (const auto& [p, t] : counts) s.probability.push_back(p / t);
      s.training_features = features;
      s.training_target.assign(target.begin(), target.end());
      model.state = std::move(s);
      break;
    }
  }
  return model;
}

inline std::vector<double> predict_prob(const BinaryModel& model, const RealMatrix& features) {
  if (features.cols() != model.input_dimension)
    throw InvalidArgument("dimension mismatch: model expects " + std::to_string(model.input_dimension) +
                          " input columns, got " + std::to_string(features.cols()));
  std::vector<double> out(features.rows());
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        for (std::size_t i = 0; i < features.rows(); ++i) {
          const auto row = features.row(i);
          if constexpr (std::is_same_v<S, ConstantState>) {
            out[i] = s.probability;
          } else if constexpr (std::is_same_v<S, LogisticState>) {
            out[i] = logistic::predict(s, row);
          } else if constexpr (std::is_same_v<S, TreeState>) {
            out[i] = cart::predict(s, row);
          } else if constexpr (std::is_same_v<S, PassthroughState>) {
            out[i] = std::clamp(row[s.column], 0.0, 1.0);
          } else {
            out[i] = model.train_positive_rate;
            for (std::size_t r = 0; r < s.rows.rows(); ++r) {
              const auto cand = s.rows.row(r);
              if (std::equal(cand.begin(), cand.end(), row.begin())) {
                out[i] = s.probability[r];
                break;
              }
            }
          }
        }
      },
      model.state);
  return out;
}

inline void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("threshold must lie strictly between 0 and 1");
}

/// Hard labels: 1 iff probability >= threshold.
inline BinaryVector threshold_probs(std::span<const double> probs, double threshold) {
  BinaryVector out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= threshold ? 1 : 0;
  return out;
}

inline BinaryVector predict_label(const BinaryModel& model, const RealMatrix& features, double threshold = 0.5) {
  check_threshold(threshold);
  return threshold_probs(predict_prob(model, features), threshold);
}

}  // namespace mlforge
