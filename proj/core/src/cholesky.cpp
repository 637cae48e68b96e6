#include "nel/cholesky.hpp"

#include <cmath>
#include <string>

#include "nel/errors.hpp"

namespace nel {

namespace {

Matrix factor_or_throw(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw InvalidArgument("cholesky: matrix is not square");
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("cholesky: matrix is not positive definite");
  }
  Matrix l = llt.matrixL();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) {
      throw FactorizationError("cholesky: non-positive pivot");
    }
  }
  return l;
}

}  // namespace

CholeskyFactor::CholeskyFactor(const Matrix& a, int refactor_interval)
    : refactor_interval_(refactor_interval) {
  if (refactor_interval <= 0) {
    throw InvalidArgument("cholesky: refactor interval must be positive");
  }
  reset(a);
}

void CholeskyFactor::reset(const Matrix& a) {
  a_ = a;
  l_ = factor_or_throw(a_);
  scratch_.resize(a_.rows());
  updates_since_refactor_ = 0;
  update_log_det();
}

void CholeskyFactor::refactor() {
  l_ = factor_or_throw(a_);
  updates_since_refactor_ = 0;
  update_log_det();
}

void CholeskyFactor::update_log_det() {
  double s = 0.0;
  for (Eigen::Index i = 0; i < l_.rows(); ++i) s += std::log(l_(i, i));
  log_det_ = 2.0 * s;
}

void CholeskyFactor::rank_one_update(const Eigen::Ref<const Vector>& v,
                                     double scale) {
  const Eigen::Index n = l_.rows();
  if (v.size() != n) {
    throw InvalidArgument("cholesky: update vector has wrong dimension");
  }
  if (scale == 0.0) return;

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a_(i, j) += scale * v(i) * v(j);
  }

  if (++updates_since_refactor_ >= refactor_interval_) {
    refactor();
    return;
  }

  const double root = std::sqrt(std::abs(scale));
  const double sign = scale > 0.0 ? 1.0 : -1.0;
  for (Eigen::Index i = 0; i < n; ++i) scratch_(i) = root * v(i);

  for (Eigen::Index k = 0; k < n; ++k) {
    const double lkk = l_(k, k);
    const double xk = scratch_(k);
    const double r2 = lkk * lkk + sign * xk * xk;
    if (!(r2 > 0.0)) {
      // Downdate lost definiteness; the dense copy decides.
      refactor();
      return;
    }
    const double r = std::sqrt(r2);
    const double c = r / lkk;
    const double s = xk / lkk;
    l_(k, k) = r;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      l_(i, k) = (l_(i, k) + sign * s * scratch_(i)) / c;
      scratch_(i) = c * scratch_(i) - s * l_(i, k);
    }
  }
  update_log_det();
}

void CholeskyFactor::solve_lower_in_place(Eigen::Ref<Vector> b) const {
  const Eigen::Index n = l_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = b(i);
    for (Eigen::Index j = 0; j < i; ++j) acc -= l_(i, j) * b(j);
    b(i) = acc / l_(i, i);
  }
}

double CholeskyFactor::inverse_quad_form(const Eigen::Ref<const Vector>& x,
                                         Eigen::Ref<Vector> work) const {
  work = x;
  solve_lower_in_place(work);
  return work.squaredNorm();
}

Matrix CholeskyFactor::inverse() const {
  Eigen::LLT<Matrix> llt(a_);
  return symmetrize(llt.solve(Matrix::Identity(a_.rows(), a_.cols())));
}

Matrix cholesky_lower(const Matrix& a) { return factor_or_throw(a); }

double log_det_spd(const Matrix& a) {
  const Matrix l = factor_or_throw(a);
  return 2.0 * l.diagonal().array().log().sum();
}

Matrix inverse_spd(const Matrix& a) {
  factor_or_throw(a);
  Eigen::LLT<Matrix> llt(a);
  return symmetrize(llt.solve(Matrix::Identity(a.rows(), a.cols())));
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

}  // namespace nel
