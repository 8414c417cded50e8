#pragma once

#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "learners.hpp"
#include "matrix.hpp"

namespace mlforge {

/// Per-instance label probabilities, the thresholded hard labels and,
/// when known, the true label matrix.
struct PredictionSet {
  std::optional<BinaryMatrix> truth;
  RealMatrix probs;
  BinaryMatrix predicted;
  std::vector<std::string> label_names;
  double threshold = 0.5;

  std::size_t n() const noexcept { return probs.rows(); }
  std::size_t m() const noexcept { return probs.cols(); }

  static PredictionSet from_probs(RealMatrix probs, std::vector<std::string> label_names, double threshold,
                                  std::optional<BinaryMatrix> truth = std::nullopt) {
    check_threshold(threshold);
    PredictionSet p;
    p.predicted = BinaryMatrix(probs.rows(), probs.cols());
    for (std::size_t i = 0; i < probs.rows(); ++i)
      for (std::size_t k = 0; k < probs.cols(); ++k) p.predicted(i, k) = probs(i, k) >= threshold ? 1 : 0;
    p.probs = std::move(probs);
    p.label_names = std::move(label_names);
    p.threshold = threshold;
    p.truth = std::move(truth);
    p.validate();
    return p;
  }

  /// Hard predictions only; probabilities are set to the 0/1 labels.
  static PredictionSet from_labels(std::optional<BinaryMatrix> truth, const BinaryMatrix& predicted,
                                   std::vector<std::string> label_names = {}) {
    if (label_names.empty())
      for (std::size_t k = 0; k < predicted.cols(); ++k) label_names.push_back("y" + std::to_string(k + 1));
    RealMatrix probs(predicted.rows(), predicted.cols());
    for (std::size_t i = 0; i < predicted.rows(); ++i)
      for (std::size_t k = 0; k < predicted.cols(); ++k) probs(i, k) = predicted(i, k);
    return from_probs(std::move(probs), std::move(label_names), 0.5, std::move(truth));
  }

  void validate() const {
    if (predicted.rows() != probs.rows() || predicted.cols() != probs.cols())
      throw InvalidArgument("prediction matrix shapes disagree");
    if (label_names.size() != probs.cols()) throw InvalidArgument("label name count does not match prediction width");
    if (truth && (truth->rows() != probs.rows() || truth->cols() != probs.cols()))
      throw InvalidArgument("truth shape does not match predictions");
    for (std::size_t i = 0; i < probs.rows(); ++i)
      for (std::size_t k = 0; k < probs.cols(); ++k) {
        const double p = probs(i, k);
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("probabilities must lie in [0,1]");
        if (predicted(i, k) != (p >= threshold ? 1 : 0))
          throw InvalidArgument("hard labels are inconsistent with probabilities and threshold");
      }
  }

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

}  // namespace mlforge
