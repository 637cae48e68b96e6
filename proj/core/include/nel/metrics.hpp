#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace nel {

/// Truth-by-prediction counts. Rows 0..M-1 and columns 0..M-1 are the
/// observed classes in the same order; the remaining rows are the other truth
/// classes and the remaining columns the novel predicted classes.
struct ConfusionMatrix {
  Eigen::MatrixXi counts;
  int num_observed = 0;
  /// Truth class id of each row.
  std::vector<int> row_ids;
  /// Predicted class id of each column.
  std::vector<int> col_ids;

  int rows() const { return static_cast<int>(counts.rows()); }
  int cols() const { return static_cast<int>(counts.cols()); }
  long total() const { return counts.cast<long>().sum(); }
};

/// Builds the matrix over the points listed in `evaluation`. `observed` lists the observed
/// class ids, which are shared by truth and prediction. Unobserved truth rows
/// follow in ascending id; novel columns by size descending, ties by first
/// appearance. Throws InvalidArgument on an empty evaluation set.
ConfusionMatrix build_confusion(std::span<const int> truth,
                                std::span<const int> predicted,
                                std::span<const int> observed,
                                std::span<const int> evaluation);

/// Convenience overload evaluating every point.
ConfusionMatrix build_confusion(std::span<const int> truth,
                                std::span<const int> predicted,
                                std::span<const int> observed);

/// Builds a matrix directly from counts (rows/cols ids default to indices).
ConfusionMatrix confusion_from_counts(const Eigen::MatrixXi& counts,
                                      int num_observed);

struct F1Result {
  double mean = 0.0;
  std::vector<double> per_class;
  /// Column matched to each row (-1 when an unobserved row has no novel
  /// column to match).
  std::vector<int> matched_column;
  /// Novel columns matched by more than one unobserved class.
  std::vector<int> shared_columns;
};

F1Result mean_f1(const ConfusionMatrix& c);

}  // namespace nel
