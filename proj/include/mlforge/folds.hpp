#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"
#include "random.hpp"

namespace mlforge {

/// fold_of[i] is the (0-based) fold holding instance i out.
struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;

  std::size_t n() const noexcept { return fold_of.size(); }

  std::vector<std::size_t> test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] == fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
      if (fold_of[i] != fold) out.push_back(i);
    return out;
  }

  friend bool operator==(const FoldAssignment&, const FoldAssignment&) = default;
};

/// Seeded uniform shuffle of 0..n-1, then contiguous chunks; the first n % k
/// chunks receive one extra instance.
inline FoldAssignment kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("number of folds must be at least 2");
  if (k > n)
    throw InvalidArgument("number of folds (" + std::to_string(k) + ") exceeds number of instances (" +
                          std::to_string(n) + ")");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  FoldAssignment out{k, std::vector<std::size_t>(n)};
  const std::size_t base = n / k, extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t s = 0; s < size; ++s) out.fold_of[perm[pos++]] = f;
  }
  return out;
}

/// Explicit assignment, e.g. {0,0,1,1} for the first-half/second-half split.
inline FoldAssignment make_fold_assignment(std::vector<std::size_t> fold_of) {
  if (fold_of.empty()) throw InvalidArgument("fold assignment is empty");
  const std::size_t k = *std::max_element(fold_of.begin(), fold_of.end()) + 1;
  std::vector<bool> used(k, false);
  for (auto f : fold_of) used[f] = true;
  if (std::find(used.begin(), used.end(), false) != used.end()) throw InvalidArgument("fold assignment has an empty fold");
  if (k < 2) throw InvalidArgument("number of folds must be at least 2");
  return FoldAssignment{k, std::move(fold_of)};
}

}  // namespace mlforge
