#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace mlforge;

namespace {

double training_accuracy(const BinaryModel& model, const RealMatrix& x, const BinaryVector& y) {
  const auto hat = predict_label(model, x);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += hat[i] == y[i];
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

RealMatrix random_matrix(std::size_t n, std::size_t p, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  RealMatrix x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = normal(rng);
  return x;
}

BinaryVector random_bits(std::size_t n, std::mt19937_64& rng) {
  BinaryVector y(n);
  for (auto& v : y) v = rng() & 1u;
  return y;
}

}  // namespace

TEST(BaseLearnerSpec, DefaultsAndOverrides) {
  const BaseLearnerSpec logit(LearnerKind::logistic, {{"iterations", 50}});
  EXPECT_EQ(logit.param("iterations"), 50);
  EXPECT_EQ(logit.param("learning_rate"), 0.1);
  EXPECT_EQ(BaseLearnerSpec::parse(logit.to_string()), logit);
  EXPECT_EQ(BaseLearnerSpec::parse("fl").kind(), LearnerKind::featureless);
  EXPECT_EQ(BaseLearnerSpec::parse("tree:max_depth=2").param("max_depth"), 2);
}

TEST(BaseLearnerSpec, RejectsBadParameters) {
  EXPECT_THROW(BaseLearnerSpec(LearnerKind::logistic, {{"depth", 1}}), InvalidArgument);
  EXPECT_THROW(BaseLearnerSpec(LearnerKind::logistic, {{"learning_rate", -1}}), InvalidArgument);
  EXPECT_THROW(BaseLearnerSpec(LearnerKind::tree, {{"max_depth", 1.5}}), InvalidArgument);
  EXPECT_THROW(BaseLearnerSpec::parse("forest"), InvalidArgument);
  EXPECT_THROW(BaseLearnerSpec::parse("tree:max_depth"), InvalidArgument);
}

TEST(FitBinary, FeaturelessRate) {
  const auto model = fit_binary(BaseLearnerSpec(), RealMatrix(4, 0), BinaryVector{1, 1, 0, 0});
  EXPECT_EQ(model.train_positive_rate, 0.5);
  EXPECT_EQ(predict_prob(model, RealMatrix(3, 0)), (std::vector<double>{0.5, 0.5, 0.5}));
}

TEST(FitBinary, LogisticSeparatesLine) {
  const RealMatrix x{{-2}, {-1}, {1}, {2}};
  const BinaryVector y{0, 0, 1, 1};
  const auto model = fit_binary(BaseLearnerSpec(LearnerKind::logistic, {{"iterations", 500}}), x, y);
  EXPECT_EQ(training_accuracy(model, x, y), 1.0);
}

TEST(FitBinary, TreeLearnsXor) {
  const RealMatrix x{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const BinaryVector y{0, 1, 1, 0};
  const auto model = fit_binary(BaseLearnerSpec(LearnerKind::tree, {{"max_depth", 2}, {"min_split", 2}}), x, y);
  EXPECT_EQ(training_accuracy(model, x, y), 1.0);
}

TEST(PredictProb, ZeroLogisticIsHalf) {
  BinaryModel model{BaseLearnerSpec(LearnerKind::logistic), 2, 0.3, LogisticState{{0, 0}, {1, 1}, {0, 0}, 0.0}};
  EXPECT_EQ(predict_prob(model, RealMatrix{{3, -4}, {0.1, 7}}), (std::vector<double>{0.5, 0.5}));
}

TEST(PredictProb, MemorizerRecallsPositives) {
  const RealMatrix x{{1, 2}, {3, 4}, {5, 6}};
  const BinaryVector y{1, 0, 1};
  const auto model = fit_binary(BaseLearnerSpec(LearnerKind::mock_memorizer), x, y);
  EXPECT_EQ(predict_prob(model, x), (std::vector<double>{1.0, 0.0, 1.0}));
  EXPECT_EQ(predict_prob(model, RealMatrix{{9, 9}}), std::vector<double>{2.0 / 3.0});
}

TEST(PredictProb, WidthMismatch) {
  const auto model = fit_binary(BaseLearnerSpec(), RealMatrix(2, 3), BinaryVector{0, 1});
  EXPECT_THROW(predict_prob(model, RealMatrix(2, 2)), InvalidArgument);
}

TEST(PredictProb, WithinUnitIntervalForAllLearners) {
  std::mt19937_64 rng(7);
  const std::vector<BaseLearnerSpec> specs{
      BaseLearnerSpec(), BaseLearnerSpec(LearnerKind::logistic, {{"iterations", 200}, {"learning_rate", 1.0}}),
      BaseLearnerSpec(LearnerKind::tree), BaseLearnerSpec(LearnerKind::mock_memorizer),
      BaseLearnerSpec(LearnerKind::mock_constant, {{"value", 0.25}}), BaseLearnerSpec(LearnerKind::mock_passthrough)};
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 5 + rep, p = 1 + rep % 4;
    const auto x = random_matrix(n, p, rng, 1.0 + rep * 10.0);
    const auto y = random_bits(n, rng);
    const auto probe = random_matrix(20, p, rng, 1e3);
    for (const auto& spec : specs) {
      const auto model = fit_binary(spec, x, y);
      for (double v : predict_prob(model, probe)) {
        EXPECT_GE(v, 0.0) << spec.to_string();
        EXPECT_LE(v, 1.0) << spec.to_string();
      }
    }
  }
}

TEST(PredictLabel, ThresholdBoundary) {
  EXPECT_EQ(threshold_probs(std::vector<double>{0.4, 0.5, 0.6}, 0.5), (BinaryVector{0, 1, 1}));
}

TEST(PredictLabel, FeaturelessNearHalf) {
  BinaryModel below{BaseLearnerSpec(), 0, 0.49, ConstantState{0.49}};
  BinaryModel at{BaseLearnerSpec(), 0, 0.50, ConstantState{0.50}};
  EXPECT_EQ(predict_label(below, RealMatrix(3, 0), 0.5), (BinaryVector{0, 0, 0}));
  EXPECT_EQ(predict_label(at, RealMatrix(3, 0), 0.5), (BinaryVector{1, 1, 1}));
}

TEST(PredictLabel, ThresholdMustBeInterior) {
  const auto model = fit_binary(BaseLearnerSpec(), RealMatrix(2, 0), BinaryVector{0, 1});
  EXPECT_THROW(predict_label(model, RealMatrix(1, 0), 0.0), InvalidArgument);
  EXPECT_THROW(predict_label(model, RealMatrix(1, 0), 1.0), InvalidArgument);
}

TEST(FitBinary, ConstantTargetGivesConstantPredictor) {
  std::mt19937_64 rng(3);
  const auto x = random_matrix(12, 3, rng);
  for (auto kind : {LearnerKind::featureless, LearnerKind::logistic, LearnerKind::tree, LearnerKind::mock_memorizer}) {
    for (std::uint8_t cls : {0, 1}) {
      const auto model = fit_binary(BaseLearnerSpec(kind), x, BinaryVector(12, cls));
      for (double v : predict_prob(model, random_matrix(5, 3, rng, 5.0))) EXPECT_EQ(v, cls) << to_string(kind);
    }
  }
}

TEST(FitBinary, RecorderRecordsInputWidth) {
  for (std::size_t p : {0u, 1u, 7u}) {
    const auto model = fit_binary(BaseLearnerSpec(LearnerKind::mock_recorder), RealMatrix(3, p), BinaryVector{0, 1, 1});
    EXPECT_EQ(model.input_dimension, p);
  }
}

TEST(FitBinary, RejectsShapeAndValueErrors) {
  EXPECT_THROW(fit_binary(BaseLearnerSpec(), RealMatrix(3, 1), BinaryVector{0, 1}), InvalidArgument);
  EXPECT_THROW(fit_binary(BaseLearnerSpec(), RealMatrix(2, 1), BinaryVector{0, 2}), InvalidArgument);
}

TEST(Logistic, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  for (int problem = 0; problem < 20; ++problem) {
    const std::size_t n = 8 + problem, p = 1 + problem % 5;
    const auto x = random_matrix(n, p, rng);
    const auto y = random_bits(n, rng);
    std::vector<double> w(p);
    for (auto& v : w) v = normal(rng);
    const double b = normal(rng), l2 = 0.01 * problem;
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
      EXPECT_LE(std::abs(fd - analytic), 1e-5 * std::max(1.0, std::abs(analytic))) << "problem " << problem;
    }
  }
}

TEST(Logistic, IgnoresConstantColumns) {
  const RealMatrix x{{5, -2}, {5, -1}, {5, 1}, {5, 2}};
  const auto s = logistic::fit(x, BinaryVector{0, 0, 1, 1}, 0.1, 200, 0.0);
  EXPECT_EQ(s.scale[0], 0.0);
  EXPECT_EQ(s.weights[0], 0.0);
  EXPECT_GT(s.weights[1], 0.0);
}

TEST(Tree, TrainingErrorNonIncreasingInDepth) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 15; ++rep) {
    const auto x = random_matrix(60, 3, rng);
    const auto y = random_bits(60, rng);
    double previous = 0.0;
    for (int depth = 0; depth <= 8; ++depth) {
      const auto model = fit_binary(BaseLearnerSpec(LearnerKind::tree, {{"max_depth", depth}}), x, y);
      const double acc = training_accuracy(model, x, y);
      EXPECT_GE(acc, previous) << "depth " << depth;
      previous = acc;
    }
  }
}

TEST(Passthrough, CopiesColumnCountedFromTheRight) {
  const RealMatrix x{{0.2, 1, 0}, {0.7, 0, 1}};
  const auto last = fit_binary(BaseLearnerSpec(LearnerKind::mock_passthrough), x, BinaryVector{0, 1});
  EXPECT_EQ(predict_prob(last, x), (std::vector<double>{0, 1}));
  const auto second = fit_binary(BaseLearnerSpec(LearnerKind::mock_passthrough, {{"column", 2}}), x, BinaryVector{0, 1});
  EXPECT_EQ(predict_prob(second, x), (std::vector<double>{1, 0}));
  EXPECT_THROW(fit_binary(BaseLearnerSpec(LearnerKind::mock_passthrough, {{"column", 4}}), x, BinaryVector{0, 1}),
               InvalidArgument);
}
