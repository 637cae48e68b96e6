#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nel/cholesky.hpp"

namespace nel {

/// Points stored one per column (d x N) with optional ground truth.
struct Dataset {
  Matrix points;
  /// Dense truth class ids, empty when unknown.
  std::vector<int> class_label;
  /// Dense truth component ids (synthetic data only).
  std::vector<int> component_label;
  /// Drawn class covariances and component means (synthetic data only).
  std::vector<Matrix> class_sigma;
  std::vector<Vector> component_mean;

  int dim() const { return static_cast<int>(points.rows()); }
  int size() const { return static_cast<int>(points.cols()); }
};

struct SynthConfig {
  int n_classes = 10;
  int n_components = 70;
  int n_points = 3000;
  int dim = 2;
  double gamma = 1.0;
  double alpha = 1.0;
  Vector mu0;  // empty means zero
  Matrix psi0;  // empty means identity
  double kappa0 = 0.01;
  double m = 4.0;
  double kappa1 = 0.3;
  std::uint64_t seed = 1;
  int max_retries = 100;

  void validate() const;
};

/// Two-layer generator: components are allotted to classes and points to
/// components by Dirichlet-multinomial draws (redrawn until no class or
/// component is empty), class parameters come from the NIW prior and
/// component means from N(mu_k, Sigma_k / kappa1).
Dataset generate_synthetic(const SynthConfig& cfg);

struct ZScore {
  Vector mean;
  Vector stddev;
};

/// Standardizes every feature in place with the population variance.
/// Throws DataError naming the first constant feature.
ZScore normalize_zscore(Matrix& points);

struct SplitSchedule {
  double labeled_fraction = 0.2;
  /// Empty means auto: 0, 2, 4, ... capped at the number of classes.
  std::vector<int> observed_counts;

  static std::vector<int> auto_counts(int num_classes);
  std::vector<int> resolve(int num_classes) const;
};

/// Label visibility for one observed-class count.
struct SplitView {
  int num_observed = 0;
  /// Truth class ids that are observed, largest first; position = dense id.
  std::vector<int> observed_classes;
  /// Dense observed id per point, or -1.
  std::vector<int> labels;
  /// Points outside the labeled-and-observed set.
  std::vector<int> evaluation;
};

struct Split {
  /// Stratified labeled pool, shared by every view.
  std::vector<int> pool;
  /// Truth classes sorted by size descending, ties by lower id.
  std::vector<int> class_order;
  std::vector<SplitView> views;
};

/// Draws one stratified pool of round(fraction * n_k) points per class (at
/// least one) and derives a view per observed count.
Split make_split(std::span<const int> truth, const SplitSchedule& schedule,
                 std::uint64_t seed);

}  // namespace nel
