#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "prediction.hpp"

namespace mlforge {

enum class Measure { subset01, hamming, accuracy, precision, recall, f1 };

inline const std::vector<Measure>& all_measures() {
  static const std::vector<Measure> all{Measure::subset01, Measure::hamming,   Measure::accuracy,
                                        Measure::precision, Measure::recall, Measure::f1};
  return all;
}

inline const char* to_string(Measure m) {
  switch (m) {
    case Measure::subset01: return "subset01";
    case Measure::hamming: return "hamming";
    case Measure::accuracy: return "accuracy";
    case Measure::precision: return "precision";
    case Measure::recall: return "recall";
    case Measure::f1: return "f1";
  }
  return "?";
}

inline Measure parse_measure(const std::string& s) {
  for (auto m : all_measures())
    if (s == to_string(m)) return m;
  if (s == "hamloss") return Measure::hamming;
  if (s == "acc") return Measure::accuracy;
  if (s == "ppv") return Measure::precision;
  if (s == "tpr") return Measure::recall;
  throw InvalidArgument("unknown measure '" + s + "'");
}

/// Losses are minimized, scores maximized.
inline bool is_loss(Measure m) { return m == Measure::subset01 || m == Measure::hamming; }

/// What to do with instances whose score has a zero denominator.
///   strict:         the aggregate is undefined (NA) if any instance is
///   skip_undefined: average over the defined instances only
enum class UndefinedPolicy { strict, skip_undefined };

struct MeasureValue {
  Measure measure = Measure::hamming;
  std::optional<double> value;
  std::size_t n_undefined_instances = 0;

  bool defined() const noexcept { return value.has_value(); }
};

namespace detail {

struct InstanceCounts {
  std::size_t truth = 0;      // |y|
  std::size_t predicted = 0;  // |yhat|
  std::size_t both = 0;       // |y and yhat|
  std::size_t mismatches = 0;
};

inline const BinaryMatrix& require_truth(const PredictionSet& pred) {
  if (!pred.truth) throw InvalidArgument("measure requires true labels, but the prediction set has none");
  return *pred.truth;
}

inline InstanceCounts count_instance(const BinaryMatrix& y, const BinaryMatrix& yhat, std::size_t i) {
  InstanceCounts c;
  for (std::size_t k = 0; k < y.cols(); ++k) {
    c.truth += y(i, k);
    c.predicted += yhat(i, k);
    c.both += y(i, k) & yhat(i, k);
    c.mismatches += y(i, k) != yhat(i, k);
  }
  return c;
}

struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
};

// Per-instance score; nullopt when undefined.
inline std::optional<Ratio> instance_score(Measure measure, const InstanceCounts& c, std::size_t m) {
  const auto ratio = [](std::size_t a, std::size_t b) { return Ratio{a, b}; };
  switch (measure) {
    case Measure::subset01: return ratio(c.mismatches ? 1 : 0, 1);
    case Measure::hamming: return ratio(c.mismatches, m);
    case Measure::accuracy: {
      const std::size_t uni = c.truth + c.predicted - c.both;
      return uni == 0 ? ratio(1, 1) : ratio(c.both, uni);
    }
    case Measure::precision:
      if (c.predicted == 0) return std::nullopt;
      return ratio(c.both, c.predicted);
    case Measure::recall:
      if (c.truth == 0) return ratio(c.predicted == 0 ? 1 : 0, 1);
      return ratio(c.both, c.truth);
    case Measure::f1: {
      const std::size_t denom = c.truth + c.predicted;
      return denom == 0 ? ratio(1, 1) : ratio(2 * c.both, denom);
    }
  }
  return std::nullopt;
}

using u128 = unsigned __int128;

inline u128 gcd128(u128 a, u128 b) {
  while (b != 0) {
    const u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Mean of ratios in [0,1], kept as an exact fraction so the result is
// correctly rounded. Falls back to long double once the common denominator
// passes 2^62.
class MeanAccumulator {
 public:
  void add(Ratio r) {
    approx_ += static_cast<long double>(r.num) / static_cast<long double>(r.den);
    ++count_;
    if (!exact_) return;
    const std::uint64_t g = std::gcd(den_, r.den);
    const std::uint64_t scale = r.den / g;
    if (den_ > (std::uint64_t{1} << 62) / scale) {
      exact_ = false;
      return;
    }
    num_ = num_ * scale + static_cast<u128>(r.num) * (den_ / g);
    den_ *= scale;
  }

  std::size_t count() const noexcept { return count_; }

  double mean() const {
    if (!exact_) return static_cast<double>(approx_ / static_cast<long double>(count_));
    u128 n = num_, d = static_cast<u128>(den_) * count_;
    const u128 g = gcd128(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    const u128 limit = u128{1} << 53;
    if (n < limit && d < limit) return static_cast<double>(n) / static_cast<double>(d);
    return static_cast<double>(static_cast<long double>(n) / static_cast<long double>(d));
  }

 private:
  u128 num_ = 0;
  std::uint64_t den_ = 1;
  std::size_t count_ = 0;
  long double approx_ = 0.0L;
  bool exact_ = true;
};

}  // namespace detail

/// Mean of the per-instance scores of `measure` over all rows.
inline MeasureValue evaluate(const PredictionSet& pred, Measure measure,
                             UndefinedPolicy policy = UndefinedPolicy::strict) {
  const auto& y = detail::require_truth(pred);
  MeasureValue out{measure, std::nullopt, 0};
  detail::MeanAccumulator acc;
  for (std::size_t i = 0; i < pred.n(); ++i) {
    const auto s = detail::instance_score(measure, detail::count_instance(y, pred.predicted, i), pred.m());
    if (s) acc.add(*s);
    else ++out.n_undefined_instances;
  }
  if (acc.count() == 0) return out;
  if (out.n_undefined_instances > 0 && policy == UndefinedPolicy::strict) return out;
  out.value = acc.mean();
  return out;
}

inline double subset01_loss(const PredictionSet& pred) { return *evaluate(pred, Measure::subset01).value; }
inline double hamming_loss(const PredictionSet& pred) { return *evaluate(pred, Measure::hamming).value; }

inline MeasureValue accuracy_score(const PredictionSet& pred, UndefinedPolicy policy = UndefinedPolicy::strict) {
  return evaluate(pred, Measure::accuracy, policy);
}
inline MeasureValue precision_score(const PredictionSet& pred, UndefinedPolicy policy = UndefinedPolicy::strict) {
  return evaluate(pred, Measure::precision, policy);
}
inline MeasureValue recall_score(const PredictionSet& pred, UndefinedPolicy policy = UndefinedPolicy::strict) {
  return evaluate(pred, Measure::recall, policy);
}
inline MeasureValue f1_score(const PredictionSet& pred, UndefinedPolicy policy = UndefinedPolicy::strict) {
  return evaluate(pred, Measure::f1, policy);
}

// ---------------------------------------------------------------------------
// Per-label binary performance

enum class BinaryMeasure { acc, mmce, auc };

inline const char* to_string(BinaryMeasure m) {
  switch (m) {
    case BinaryMeasure::acc: return "acc";
    case BinaryMeasure::mmce: return "mmce";
    case BinaryMeasure::auc: return "auc";
  }
  return "?";
}

inline BinaryMeasure parse_binary_measure(const std::string& s) {
  for (auto m : {BinaryMeasure::acc, BinaryMeasure::mmce, BinaryMeasure::auc})
    if (s == to_string(m)) return m;
  throw InvalidArgument("unknown binary measure '" + s + "'");
}

/// Mann-Whitney AUC: fraction of (positive, negative) pairs ranked
/// correctly, ties counted 1/2. Computed from mid-ranks in O(n log n).
/// nullopt when truth has a single class.
inline std::optional<double> auc(const std::vector<double>& scores, const BinaryVector& truth) {
  if (scores.size() != truth.size()) throw InvalidArgument("auc: score/truth length mismatch");
  const std::size_t n = scores.size();
  std::size_t pos = 0;
  for (auto t : truth) pos += t;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return std::nullopt;

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t s = 0; s < n;) {
    std::size_t e = s;
    while (e < n && scores[idx[e]] == scores[idx[s]]) ++e;
    const double mid = (static_cast<double>(s + 1) + static_cast<double>(e)) / 2.0;
    for (std::size_t t = s; t < e; ++t)
      if (truth[idx[t]]) rank_sum += mid;
    s = e;
  }
  const double u = rank_sum - static_cast<double>(pos) * static_cast<double>(pos + 1) / 2.0;
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

struct LabelPerformance {
  std::string label;
  std::optional<double> acc;
  std::optional<double> mmce;
  std::optional<double> auc;
};

inline std::vector<LabelPerformance> binary_label_performance(
    const PredictionSet& pred,
    const std::vector<BinaryMeasure>& measures = {BinaryMeasure::acc, BinaryMeasure::mmce, BinaryMeasure::auc}) {
  const auto& y = detail::require_truth(pred);
  const auto wants = [&](BinaryMeasure m) { return std::find(measures.begin(), measures.end(), m) != measures.end(); };
  std::vector<LabelPerformance> out;
  for (std::size_t k = 0; k < pred.m(); ++k) {
    LabelPerformance lp{pred.label_names[k], std::nullopt, std::nullopt, std::nullopt};
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.n(); ++i) hits += y(i, k) == pred.predicted(i, k);
    const double acc = static_cast<double>(hits) / static_cast<double>(pred.n());
    if (wants(BinaryMeasure::acc)) lp.acc = acc;
    if (wants(BinaryMeasure::mmce)) lp.mmce = 1.0 - acc;
    if (wants(BinaryMeasure::auc)) lp.auc = auc(pred.probs.column(k), y.column(k));
    out.push_back(std::move(lp));
  }
  return out;
}

}  // namespace mlforge
