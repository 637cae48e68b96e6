#pragma once

#include <utility>

#include "nel/cholesky.hpp"
#include "nel/rng.hpp"

namespace nel {

/// Count, coordinate sum and centered scatter of a point set.
///
/// The scatter S = sum_i (x_i - mean)(x_i - mean)^T is maintained with
/// Welford-style updates so that add/remove never forms raw second moments.
class SuffStats {
 public:
  SuffStats() = default;
  explicit SuffStats(int dim);

  int dim() const { return static_cast<int>(sum_.size()); }
  int n() const { return n_; }
  bool empty() const { return n_ == 0; }
  const Vector& sum() const { return sum_; }
  const Matrix& scatter() const { return scatter_; }
  Vector mean() const;

  void add(const Eigen::Ref<const Vector>& x);
  /// Removes a point previously added. Throws ContractViolation when empty.
  void remove(const Eigen::Ref<const Vector>& x);
  void merge(const SuffStats& other);
  void clear();

  /// Statistics of the columns of `points` selected by `indices`.
  template <typename Indices>
  static SuffStats of(const Matrix& points, const Indices& indices) {
    SuffStats s(static_cast<int>(points.rows()));
    for (auto i : indices) s.add(points.col(i));
    return s;
  }
  static SuffStats of_all(const Matrix& points);

 private:
  int n_ = 0;
  Vector sum_;
  Matrix scatter_;
};

/// Normal-Inverse-Wishart prior NIW(mu, Sigma | mu0, psi0, kappa0, m):
/// Sigma ~ W^{-1}(psi0, m), mu | Sigma ~ N(mu0, Sigma / kappa0).
struct NIWParams {
  Vector mu0;
  Matrix psi0;
  double kappa0 = 1.0;
  double m = 0.0;

  int dim() const { return static_cast<int>(mu0.size()); }
  /// Throws InvalidArgument unless kappa0 > 0, m > d - 1 and psi0 is square.
  void validate() const;
};

/// log of the marginal likelihood of the points summarized by `stats` with
/// (mu, Sigma) integrated against the prior. Zero for empty stats.
double log_niw_marginal(const SuffStats& stats, const NIWParams& prior);

/// Student-t posterior predictive log-density of `x` given `stats`.
double niw_posterior_predictive_logpdf(const Vector& x, const SuffStats& stats,
                                       const NIWParams& prior);

/// (mu, Sigma) ~ NIW(prior).
std::pair<Vector, Matrix> sample_niw(const NIWParams& prior, Rng& rng);

/// Conjugate NIW posterior kept up to date under single-point insertions and
/// removals. The posterior scale matrix is held as a CholeskyFactor so each
/// change costs one rank-one update and each predictive evaluation O(d^2).
class NiwPosterior {
 public:
  NiwPosterior() = default;
  explicit NiwPosterior(const NIWParams& prior);
  NiwPosterior(const NIWParams& prior, const SuffStats& stats);

  int n() const { return n_; }
  int dim() const { return static_cast<int>(mean_.size()); }
  double kappa() const { return kappa_; }
  double dof() const { return dof_; }
  const Vector& mean() const { return mean_; }
  const CholeskyFactor& scale() const { return scale_; }

  void add(const Eigen::Ref<const Vector>& x);
  void remove(const Eigen::Ref<const Vector>& x);

  /// Predictive log-density; `work` must hold dim() entries.
  double predictive_logpdf(const Eigen::Ref<const Vector>& x,
                           Eigen::Ref<Vector> work) const;
  double predictive_logpdf(const Eigen::Ref<const Vector>& x) const;

  /// log marginal likelihood of the absorbed points.
  double log_marginal() const;

 private:
  void refresh_constants();

  int n_ = 0;
  double kappa0_ = 1.0;
  double m0_ = 0.0;
  double prior_log_det_ = 0.0;
  double kappa_ = 1.0;
  double dof_ = 0.0;
  Vector mean_;
  Vector diff_;
  CholeskyFactor scale_;
  // Student-t normalizer pieces that only change when n changes.
  double t_dof_ = 0.0;
  double t_const_ = 0.0;
  double t_scale_factor_ = 0.0;
};

}  // namespace nel
