#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "nel/errors.hpp"
#include "nel/metrics.hpp"

namespace nel {
namespace {

Eigen::MatrixXi mat(int r, int c, std::initializer_list<int> v) {
  Eigen::MatrixXi m(r, c);
  int i = 0;
  for (int e : v) m(i / c, i % c) = e, ++i;
  return m;
}

TEST(Confusion, PerfectPredictionIsDiagonal) {
  std::vector<int> truth(10), pred(10);
  for (int i = 0; i < 10; ++i) truth[i] = pred[i] = i / 5;
  const std::vector<int> observed{0, 1};
  const ConfusionMatrix c = build_confusion(truth, pred, observed);
  EXPECT_EQ(c.counts, mat(2, 2, {5, 0, 0, 5}));
  EXPECT_EQ(c.num_observed, 2);
}

TEST(Confusion, NovelColumnsFollowObservedOnes) {
  // Truth {A, A, B}, predicted {A, new, new}, only A observed.
  const std::vector<int> truth{0, 0, 1};
  const std::vector<int> pred{0, 7, 7};
  const std::vector<int> observed{0};
  const ConfusionMatrix c = build_confusion(truth, pred, observed);
  EXPECT_EQ(c.counts, mat(2, 2, {1, 1, 0, 1}));
  EXPECT_EQ(c.col_ids, (std::vector<int>{0, 7}));
  EXPECT_EQ(c.row_ids, (std::vector<int>{0, 1}));
  EXPECT_EQ(c.total(), 3);
}

TEST(Confusion, NovelColumnsSortBySizeThenFirstAppearance) {
  const std::vector<int> truth{0, 1, 1, 1, 2, 2};
  const std::vector<int> pred{9, 5, 5, 4, 4, 9};
  const std::vector<int> observed{};
  const ConfusionMatrix c = build_confusion(truth, pred, observed);
  // Columns 9, 5 and 4 all hold two points; first appearance decides.
  EXPECT_EQ(c.col_ids, (std::vector<int>{9, 5, 4}));
}

TEST(Confusion, PointOrderDoesNotMatter) {
  std::mt19937_64 g(3);
  std::uniform_int_distribution<int> t(0, 3), p(0, 6);
  std::vector<int> truth(200), pred(200);
  for (int i = 0; i < 200; ++i) {
    truth[i] = t(g);
    pred[i] = p(g);
  }
  const std::vector<int> observed{0, 1};
  // Distinct novel sizes keep the column order independent of appearance.
  for (int i = 0; i < 200; ++i) {
    if (pred[i] >= 2) pred[i] = 2 + (i % 15 < 1 ? 0 : i % 15 < 3 ? 1 : i % 15 < 7 ? 2 : 3);
  }
  const ConfusionMatrix a = build_confusion(truth, pred, observed);
  std::vector<int> order(200);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), g);
  std::vector<int> t2, p2;
  for (int i : order) {
    t2.push_back(truth[i]);
    p2.push_back(pred[i]);
  }
  const ConfusionMatrix b = build_confusion(t2, p2, observed);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.col_ids, b.col_ids);
}

TEST(Confusion, EvaluationSubsetAndErrors) {
  const std::vector<int> truth{0, 0, 1, 1};
  const std::vector<int> pred{0, 0, 1, 0};
  const std::vector<int> observed{0, 1};
  const std::vector<int> eval{1, 3};
  EXPECT_EQ(build_confusion(truth, pred, observed, eval).counts, mat(2, 2, {1, 0, 1, 0}));
  EXPECT_THROW(build_confusion(truth, pred, observed, std::vector<int>{}), InvalidArgument);
  const std::vector<int> short_pred{0};
  EXPECT_THROW(build_confusion(truth, short_pred, observed), InvalidArgument);
}

TEST(MeanF1, PerfectCase) {
  EXPECT_DOUBLE_EQ(mean_f1(confusion_from_counts(mat(2, 2, {5, 0, 0, 5}), 2)).mean, 1.0);
}

TEST(MeanF1, WorkedExamples) {
  const F1Result a = mean_f1(confusion_from_counts(mat(2, 3, {4, 1, 0, 0, 0, 6}), 1));
  EXPECT_NEAR(a.per_class[0], 8.0 / 9.0, 1e-15);
  EXPECT_NEAR(a.per_class[1], 1.0, 1e-15);
  EXPECT_NEAR(a.mean, (8.0 / 9.0 + 1.0) / 2.0, 1e-15);
  EXPECT_EQ(a.matched_column[1], 2);

  const F1Result b = mean_f1(confusion_from_counts(mat(2, 2, {3, 0, 2, 0}), 1));
  EXPECT_NEAR(b.per_class[0], 0.75, 1e-15);
  EXPECT_EQ(b.per_class[1], 0.0);
  EXPECT_NEAR(b.mean, 0.375, 1e-15);
}

TEST(MeanF1, UnobservedRowWithoutNovelColumns) {
  const F1Result r = mean_f1(confusion_from_counts(mat(2, 1, {3, 2}), 1));
  EXPECT_EQ(r.matched_column[1], -1);
  EXPECT_EQ(r.per_class[1], 0.0);
  EXPECT_NEAR(r.per_class[0], 6.0 / 8.0, 1e-15);
}

TEST(MeanF1, SharedColumnIsReported) {
  const F1Result r = mean_f1(confusion_from_counts(mat(3, 2, {2, 0, 0, 3, 0, 4}), 1));
  EXPECT_EQ(r.matched_column[1], 1);
  EXPECT_EQ(r.matched_column[2], 1);
  EXPECT_EQ(r.shared_columns, (std::vector<int>{1}));
}

TEST(MeanF1, TiesPickTheLowestColumn) {
  const F1Result r = mean_f1(confusion_from_counts(mat(2, 3, {1, 0, 0, 0, 2, 2}), 1));
  EXPECT_EQ(r.matched_column[1], 1);
}

// Direct evaluation of the metric on a count matrix.
double reference_mean_f1(const Eigen::MatrixXi& c, int m) {
  double total = 0.0;
  for (int k = 0; k < c.rows(); ++k) {
    int col = k;
    if (k >= m) {
      col = -1;
      for (int l = m; l < c.cols(); ++l) {
        if (col < 0 || c(k, l) > c(k, col)) col = l;
      }
    }
    if (col < 0) continue;
    const double denom = c.col(col).sum() + c.row(k).sum();
    if (denom > 0) total += 2.0 * c(k, col) / denom;
  }
  return total / c.rows();
}

TEST(MeanF1, MatchesDirectEvaluationAndIgnoresNovelIds) {
  std::mt19937_64 g(17);
  std::uniform_int_distribution<int> cls(0, 5);
  for (int t = 0; t < 100; ++t) {
    const int m = t % 4;
    std::vector<int> truth(80), pred(80);
    for (int i = 0; i < 80; ++i) {
      truth[i] = cls(g);
      const int p = cls(g) + (i % 3);
      pred[i] = p < m ? p : 100 + p;
    }
    std::vector<int> observed(m);
    std::iota(observed.begin(), observed.end(), 0);
    const ConfusionMatrix c = build_confusion(truth, pred, observed);
    const F1Result r = mean_f1(c);
    EXPECT_NEAR(r.mean, reference_mean_f1(c.counts, m), 1e-12);
    EXPECT_GE(r.mean, 0.0);
    EXPECT_LE(r.mean, 1.0);

    // Renaming novel predictions leaves the score unchanged.
    std::vector<int> renamed = pred;
    for (int& p : renamed) {
      if (p >= m) p = 5000 - 7 * p;
    }
    EXPECT_NEAR(mean_f1(build_confusion(truth, renamed, observed)).mean, r.mean, 1e-12);
  }
}

TEST(MeanF1, OneOnlyForExactRecovery) {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2};
  const std::vector<int> observed{0};
  EXPECT_DOUBLE_EQ(mean_f1(build_confusion(truth, std::vector<int>{0, 0, 8, 8, 3, 3},
                                           observed)).mean, 1.0);
  EXPECT_LT(mean_f1(build_confusion(truth, std::vector<int>{0, 0, 8, 8, 8, 8}, observed)).mean,
            1.0);
  EXPECT_LT(mean_f1(build_confusion(truth, std::vector<int>{0, 8, 8, 8, 3, 3}, observed)).mean,
            1.0);
}

}  // namespace
}  // namespace nel
