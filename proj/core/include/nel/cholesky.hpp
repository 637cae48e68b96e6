#pragma once

#include <Eigen/Dense>

namespace nel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Lower Cholesky factor L of a symmetric positive-definite matrix A = L L^T
/// that supports O(d^2) rank-one updates and downdates.
///
/// The dense matrix A is tracked alongside L so the factor can be rebuilt from
/// scratch every `refactor_interval` modifications, which bounds the drift of
/// long update/downdate chains.
class CholeskyFactor {
 public:
  static constexpr int kDefaultRefactorInterval = 256;

  CholeskyFactor() = default;
  explicit CholeskyFactor(const Matrix& a,
                          int refactor_interval = kDefaultRefactorInterval);

  int dim() const { return static_cast<int>(l_.rows()); }
  const Matrix& lower() const { return l_; }
  const Matrix& matrix() const { return a_; }
  double log_det() const { return log_det_; }
  int updates_since_refactor() const { return updates_since_refactor_; }

  /// A <- A + scale * v v^T. Negative `scale` is a downdate; throws
  /// FactorizationError if the result is not positive definite.
  void rank_one_update(const Eigen::Ref<const Vector>& v, double scale);

  /// Replaces A and refactorizes.
  void reset(const Matrix& a);

  /// Recomputes L from the tracked A.
  void refactor();

  /// Solves L y = b in place.
  void solve_lower_in_place(Eigen::Ref<Vector> b) const;

  /// x^T A^{-1} x. `work` must have dim() entries; it is overwritten.
  double inverse_quad_form(const Eigen::Ref<const Vector>& x,
                           Eigen::Ref<Vector> work) const;

  Matrix inverse() const;

 private:
  void update_log_det();

  Matrix l_;
  Matrix a_;
  Vector scratch_;
  double log_det_ = 0.0;
  int updates_since_refactor_ = 0;
  int refactor_interval_ = kDefaultRefactorInterval;
};

/// Dense factorization helper; throws FactorizationError when `a` is not PD.
Matrix cholesky_lower(const Matrix& a);

/// log|A| of a symmetric PD matrix.
double log_det_spd(const Matrix& a);

/// Inverse of a symmetric PD matrix via Cholesky, symmetrized.
Matrix inverse_spd(const Matrix& a);

/// (A + A^T) / 2.
Matrix symmetrize(const Matrix& a);

}  // namespace nel
