#include "nel/stats.hpp"

#include <cmath>

#include "nel/distributions.hpp"
#include "nel/errors.hpp"

namespace nel {

namespace {
constexpr double kLogPi = 1.14472988584940017414;

void check_dim(const NIWParams& prior, int d) {
  if (prior.dim() != d) throw InvalidArgument("niw: dimension mismatch");
}
}  // namespace

SuffStats::SuffStats(int dim)
    : sum_(Vector::Zero(dim)), scatter_(Matrix::Zero(dim, dim)) {}

Vector SuffStats::mean() const {
  if (n_ == 0) return Vector::Zero(dim());
  return sum_ / static_cast<double>(n_);
}

void SuffStats::add(const Eigen::Ref<const Vector>& x) {
  const int d = dim();
  if (x.size() != d) throw InvalidArgument("suffstats: dimension mismatch");
  if (n_ > 0) {
    const double inv_n = 1.0 / n_;
    const double w = static_cast<double>(n_) / (n_ + 1);
    for (int j = 0; j < d; ++j) {
      const double dj = x(j) - sum_(j) * inv_n;
      for (int i = j; i < d; ++i) {
        const double v = scatter_(i, j) + w * (x(i) - sum_(i) * inv_n) * dj;
        scatter_(i, j) = v;
        scatter_(j, i) = v;
      }
    }
  }
  sum_ += x;
  ++n_;
}

void SuffStats::remove(const Eigen::Ref<const Vector>& x) {
  const int d = dim();
  if (x.size() != d) throw InvalidArgument("suffstats: dimension mismatch");
  if (n_ == 0) throw ContractViolation("suffstats: remove from empty set");
  if (n_ == 1) {
    clear();
    return;
  }
  const double inv_n = 1.0 / n_;
  const double w = static_cast<double>(n_) / (n_ - 1);
  for (int j = 0; j < d; ++j) {
    const double dj = x(j) - sum_(j) * inv_n;
    for (int i = j; i < d; ++i) {
      const double v = scatter_(i, j) - w * (x(i) - sum_(i) * inv_n) * dj;
      scatter_(i, j) = v;
      scatter_(j, i) = v;
    }
  }
  sum_ -= x;
  --n_;
}

void SuffStats::merge(const SuffStats& other) {
  if (other.dim() != dim()) throw InvalidArgument("suffstats: dimension mismatch");
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const Vector delta = other.mean() - mean();
  const double w = static_cast<double>(n_) * other.n_ / (n_ + other.n_);
  scatter_ += other.scatter_ + w * delta * delta.transpose();
  sum_ += other.sum_;
  n_ += other.n_;
}

void SuffStats::clear() {
  n_ = 0;
  sum_.setZero();
  scatter_.setZero();
}

SuffStats SuffStats::of_all(const Matrix& points) {
  SuffStats s(static_cast<int>(points.rows()));
  for (Eigen::Index i = 0; i < points.cols(); ++i) s.add(points.col(i));
  return s;
}

void NIWParams::validate() const {
  const int d = dim();
  if (d <= 0) throw InvalidArgument("niw: dimension must be positive");
  if (psi0.rows() != d || psi0.cols() != d) {
    throw InvalidArgument("niw: psi0 dimension mismatch");
  }
  if (!(kappa0 > 0.0)) throw InvalidArgument("niw: kappa0 must be positive");
  if (!(m > d - 1)) throw InvalidArgument("niw: m must exceed d - 1");
}

namespace {

struct PosteriorParams {
  double kappa;
  double dof;
  Vector mean;
  Matrix scale;
};

PosteriorParams posterior(const SuffStats& stats, const NIWParams& prior) {
  const double n = stats.n();
  PosteriorParams p;
  p.kappa = prior.kappa0 + n;
  p.dof = prior.m + n;
  p.mean = (prior.kappa0 * prior.mu0 + stats.sum()) / p.kappa;
  p.scale = prior.psi0 + stats.scatter();
  if (stats.n() > 0) {
    const Vector delta = stats.mean() - prior.mu0;
    p.scale += (prior.kappa0 * n / p.kappa) * delta * delta.transpose();
  }
  p.scale = symmetrize(p.scale);
  return p;
}

}  // namespace

double log_niw_marginal(const SuffStats& stats, const NIWParams& prior) {
  prior.validate();
  check_dim(prior, stats.dim());
  if (stats.n() == 0) return 0.0;
  const int d = prior.dim();
  const double n = stats.n();
  const PosteriorParams post = posterior(stats, prior);
  return -0.5 * n * d * kLogPi + log_multivariate_gamma(d, 0.5 * post.dof) -
         log_multivariate_gamma(d, 0.5 * prior.m) +
         0.5 * prior.m * log_det_spd(prior.psi0) -
         0.5 * post.dof * log_det_spd(post.scale) +
         0.5 * d * std::log(prior.kappa0 / post.kappa);
}

double niw_posterior_predictive_logpdf(const Vector& x, const SuffStats& stats,
                                       const NIWParams& prior) {
  prior.validate();
  check_dim(prior, stats.dim());
  if (x.size() != prior.dim()) {
    throw InvalidArgument("niw predictive: dimension mismatch");
  }
  return NiwPosterior(prior, stats).predictive_logpdf(x);
}

std::pair<Vector, Matrix> sample_niw(const NIWParams& prior, Rng& rng) {
  prior.validate();
  Matrix sigma = sample_inverse_wishart(prior.psi0, prior.m, rng);
  Vector mu = sample_gaussian(prior.mu0, sigma / prior.kappa0, rng);
  return {std::move(mu), std::move(sigma)};
}

NiwPosterior::NiwPosterior(const NIWParams& prior)
    : NiwPosterior(prior, SuffStats(prior.dim())) {}

NiwPosterior::NiwPosterior(const NIWParams& prior, const SuffStats& stats) {
  prior.validate();
  check_dim(prior, stats.dim());
  kappa0_ = prior.kappa0;
  m0_ = prior.m;
  prior_log_det_ = log_det_spd(prior.psi0);
  const PosteriorParams post = posterior(stats, prior);
  n_ = stats.n();
  kappa_ = post.kappa;
  dof_ = post.dof;
  mean_ = post.mean;
  diff_.resize(prior.dim());
  scale_ = CholeskyFactor(post.scale);
  refresh_constants();
}

void NiwPosterior::refresh_constants() {
  const int d = dim();
  t_dof_ = dof_ - d + 1.0;
  // Student-t scale matrix is scale_ * (kappa + 1) / (kappa * t_dof).
  t_scale_factor_ = (kappa_ + 1.0) / (kappa_ * t_dof_);
  t_const_ = std::lgamma(0.5 * (t_dof_ + d)) - std::lgamma(0.5 * t_dof_) -
             0.5 * d * (std::log(t_dof_) + kLogPi) -
             0.5 * d * std::log(t_scale_factor_);
}

void NiwPosterior::add(const Eigen::Ref<const Vector>& x) {
  const double w = kappa_ / (kappa_ + 1.0);
  diff_ = x - mean_;
  scale_.rank_one_update(diff_, w);
  mean_ = (kappa_ * mean_ + x) / (kappa_ + 1.0);
  kappa_ += 1.0;
  dof_ += 1.0;
  ++n_;
  refresh_constants();
}

void NiwPosterior::remove(const Eigen::Ref<const Vector>& x) {
  if (n_ == 0) throw ContractViolation("niw posterior: remove from empty set");
  const double kappa_prev = kappa_ - 1.0;
  mean_ = (kappa_ * mean_ - x) / kappa_prev;
  diff_ = x - mean_;
  scale_.rank_one_update(diff_, -kappa_prev / kappa_);
  kappa_ = kappa_prev;
  dof_ -= 1.0;
  --n_;
  refresh_constants();
}

double NiwPosterior::predictive_logpdf(const Eigen::Ref<const Vector>& x,
                                       Eigen::Ref<Vector> work) const {
  const int d = dim();
  for (int i = 0; i < d; ++i) work(i) = x(i) - mean_(i);
  scale_.solve_lower_in_place(work);
  const double q = work.squaredNorm() / t_scale_factor_;
  return t_const_ - 0.5 * scale_.log_det() -
         0.5 * (t_dof_ + d) * std::log1p(q / t_dof_);
}

double NiwPosterior::predictive_logpdf(const Eigen::Ref<const Vector>& x) const {
  Vector work(dim());
  return predictive_logpdf(x, work);
}

double NiwPosterior::log_marginal() const {
  if (n_ == 0) return 0.0;
  const int d = dim();
  return -0.5 * n_ * d * kLogPi + log_multivariate_gamma(d, 0.5 * dof_) -
         log_multivariate_gamma(d, 0.5 * m0_) + 0.5 * m0_ * prior_log_det_ -
         0.5 * dof_ * scale_.log_det() + 0.5 * d * std::log(kappa0_ / kappa_);
}

}  // namespace nel
