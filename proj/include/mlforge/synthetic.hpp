#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "data.hpp"
#include "random.hpp"

namespace mlforge {

/// Rule for one label in a synthetic chain:
///   y_k = 1{ bias + feature_weights . x + label_weights . (y_1..y_{k-1}) > 0 },
/// then flipped with probability `noise`.
struct LabelRule {
  std::vector<double> feature_weights;  // length p (shorter vectors are zero-padded)
  std::vector<double> label_weights;    // weights on preceding labels; length <= k-1
  double bias = 0.0;
  double noise = 0.0;
};

struct DependenceSpec {
  std::vector<LabelRule> labels;

  // y_k := y_source (before y_k's own noise).
  static LabelRule copy_of(std::size_t source) {
    LabelRule r;
    r.label_weights.assign(source + 1, 0.0);
    r.label_weights[source] = 1.0;
    r.bias = -0.5;
    return r;
  }
};

/// Draws n instances with p standard-normal features and labels sampled
/// ancestrally along the rule chain. Deterministic for a fixed seed.
inline Task make_synthetic_task(std::size_t n, std::size_t p, const DependenceSpec& spec, std::uint64_t seed,
                                std::string id = "synthetic") {
  if (n == 0) throw InvalidArgument("synthetic task needs n >= 1");
  if (spec.labels.empty()) throw InvalidArgument("synthetic task needs at least one label rule");
  const std::size_t m = spec.labels.size();
  for (std::size_t k = 0; k < m; ++k) {
    const auto& r = spec.labels[k];
    if (!(r.noise >= 0.0 && r.noise <= 1.0)) throw InvalidArgument("noise rate must lie in [0,1]");
    if (r.feature_weights.size() > p) throw InvalidArgument("label rule has more feature weights than p");
    if (r.label_weights.size() > k) throw InvalidArgument("label rule may only depend on preceding labels");
  }

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  RealMatrix x(n, p);
  BinaryMatrix y(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) x(i, j) = normal(rng);
    for (std::size_t k = 0; k < m; ++k) {
      const auto& r = spec.labels[k];
      double score = r.bias;
      for (std::size_t j = 0; j < r.feature_weights.size(); ++j) score += r.feature_weights[j] * x(i, j);
      for (std::size_t l = 0; l < r.label_weights.size(); ++l) score += r.label_weights[l] * y(i, l);
      std::uint8_t bit = score > 0.0 ? 1 : 0;
      // The flip draw is taken for every label so that changing one noise
      // rate does not shift the random stream of the others.
      if (unit(rng) < r.noise) bit ^= 1;
      y(i, k) = bit;
    }
  }

  std::vector<std::string> fnames, lnames;
  for (std::size_t j = 0; j < p; ++j) fnames.push_back("x" + std::to_string(j + 1));
  for (std::size_t k = 0; k < m; ++k) lnames.push_back("y" + std::to_string(k + 1));
  return Task(std::move(id), MultilabelDataset(std::move(x), std::move(y), std::move(fnames), std::move(lnames)));
}

}  // namespace mlforge
