#pragma once

// Fixtures and reference implementations shared by the test binaries. The
// reference code is written from the set definitions and does not call the
// library routines it is compared against.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include <mlforge/mlforge.hpp>

namespace testing_support {

using mlforge::BinaryMatrix;
using mlforge::Measure;
using mlforge::RealMatrix;

// Six instances, three features, labels 001,101,110,111,110,110.
inline BinaryMatrix six_row_labels() {
  return BinaryMatrix{{0, 0, 1}, {1, 0, 1}, {1, 1, 0}, {1, 1, 1}, {1, 1, 0}, {1, 1, 0}};
}

inline RealMatrix six_row_features() {
  return RealMatrix{{0.5, 1.0, -2.0}, {1.5, -1.0, 0.0}, {2.5, 0.0, 1.0},
                    {3.5, 2.0, -1.0}, {4.5, -2.0, 2.0}, {5.5, 3.0, 0.5}};
}

inline mlforge::Task six_row_task() {
  return {"six-row",
          mlforge::MultilabelDataset(six_row_features(), six_row_labels(), {"x1", "x2", "x3"}, {"y1", "y2", "y3"})};
}

/// n rows of distinct standard-normal features and independent Bernoulli
/// labels with the given prevalences.
inline mlforge::Task random_task(std::size_t n, std::size_t p, const std::vector<double>& prevalence,
                                 std::uint64_t seed, const std::string& id = "random") {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  RealMatrix x(n, p);
  BinaryMatrix y(n, prevalence.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) x(i, j) = normal(rng);
    for (std::size_t k = 0; k < prevalence.size(); ++k) y(i, k) = unit(rng) < prevalence[k] ? 1 : 0;
  }
  std::vector<std::string> fn, ln;
  for (std::size_t j = 0; j < p; ++j) fn.push_back("f" + std::to_string(j));
  for (std::size_t k = 0; k < prevalence.size(); ++k) ln.push_back("l" + std::to_string(k));
  return {id, mlforge::MultilabelDataset(std::move(x), std::move(y), std::move(fn), std::move(ln))};
}

// Every row carries exactly one label, drawn with the given weights.
inline mlforge::Task single_label_task(std::size_t n, std::size_t p, const std::vector<double>& weights,
                                       std::uint64_t seed, const std::string& id = "single") {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  RealMatrix x(n, p);
  BinaryMatrix y(n, weights.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) x(i, j) = normal(rng);
    y(i, pick(rng)) = 1;
  }
  std::vector<std::string> fn, ln;
  for (std::size_t j = 0; j < p; ++j) fn.push_back("f" + std::to_string(j));
  for (std::size_t k = 0; k < weights.size(); ++k) ln.push_back("l" + std::to_string(k));
  return {id, mlforge::MultilabelDataset(std::move(x), std::move(y), std::move(fn), std::move(ln))};
}

// ---------------------------------------------------------------------------
// Set-based measure reference

struct Fraction {
  long num = 0;
  long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline std::set<std::size_t> relevant(const BinaryMatrix& y, std::size_t row) {
  std::set<std::size_t> s;
  for (std::size_t k = 0; k < y.cols(); ++k)
    if (y(row, k)) s.insert(k);
  return s;
}

inline long intersection_size(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  long c = 0;
  for (auto v : a) c += b.count(v) ? 1 : 0;
  return c;
}

inline long union_size(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  std::set<std::size_t> u = a;
  u.insert(b.begin(), b.end());
  return static_cast<long>(u.size());
}

/// Per-instance score for truth set `y` and predicted set `p` over m labels;
/// nullopt when undefined.
inline std::optional<Fraction> reference_instance(Measure measure, const std::set<std::size_t>& y,
                                                  const std::set<std::size_t>& p, std::size_t m) {
  const long inter = intersection_size(y, p), uni = union_size(y, p);
  const long ny = static_cast<long>(y.size()), np = static_cast<long>(p.size());
  switch (measure) {
    case Measure::subset01: return Fraction{y == p ? 0 : 1, 1};
    case Measure::hamming: return Fraction{uni - inter, static_cast<long>(m)};  // symmetric difference
    case Measure::accuracy:
      if (uni == 0) return Fraction{1, 1};
      return Fraction{inter, uni};
    case Measure::precision:
      if (np == 0) return std::nullopt;
      return Fraction{inter, np};
    case Measure::recall:
      if (ny == 0) return Fraction{np == 0 ? 1 : 0, 1};
      return Fraction{inter, ny};
    case Measure::f1:
      if (ny + np == 0) return Fraction{1, 1};
      return Fraction{2 * inter, ny + np};
  }
  return std::nullopt;
}

/// Mean over rows; strict returns nullopt if any row is undefined.
inline std::optional<double> reference_measure(Measure measure, const BinaryMatrix& y, const BinaryMatrix& yhat,
                                               bool strict) {
  long num = 0, den = 1;
  std::size_t defined = 0;
  bool any_undefined = false;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const auto f = reference_instance(measure, relevant(y, i), relevant(yhat, i), y.cols());
    if (!f) {
      any_undefined = true;
      continue;
    }
    num = num * f->den + f->num * den;
    den *= f->den;
    ++defined;
  }
  if (defined == 0 || (strict && any_undefined)) return std::nullopt;
  return static_cast<double>(num) / (static_cast<double>(den) * static_cast<double>(defined));
}

/// Row `index` of the 2^m enumeration of {0,1}^m, bit k = label k.
inline std::vector<std::uint8_t> bit_pattern(std::size_t index, std::size_t m) {
  std::vector<std::uint8_t> out(m);
  for (std::size_t k = 0; k < m; ++k) out[k] = (index >> k) & 1u;
  return out;
}

// ---------------------------------------------------------------------------
// AUC by exhaustive pair counting

inline std::optional<double> reference_auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& truth) {
  double good = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < scores.size(); ++a) {
    if (!truth[a]) continue;
    for (std::size_t b = 0; b < scores.size(); ++b) {
      if (truth[b]) continue;
      ++pairs;
      if (scores[a] > scores[b]) good += 1.0;
      else if (scores[a] == scores[b]) good += 0.5;
    }
  }
  if (pairs == 0) return std::nullopt;
  return good / static_cast<double>(pairs);
}

// ---------------------------------------------------------------------------
// Cross-fitting reference for a memorizing base learner on unique rows: a
// held-out row is never memorized, so its prediction is the positive rate of
// the fold complement, thresholded.

inline std::vector<std::uint8_t> reference_unseen_fallback(const std::vector<std::uint8_t>& target,
                                                           const std::vector<std::size_t>& fold_of, double threshold) {
  std::vector<std::uint8_t> out(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    std::size_t pos = 0, total = 0;
    for (std::size_t r = 0; r < target.size(); ++r) {
      if (fold_of[r] == fold_of[i]) continue;
      pos += target[r];
      ++total;
    }
    out[i] = static_cast<double>(pos) / static_cast<double>(total) >= threshold ? 1 : 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::size_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("mlforge-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    const auto p = file(name);
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
