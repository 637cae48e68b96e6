#include "nel/distributions.hpp"

#include <cmath>
#include <algorithm>
#include <numbers>
#include <string>

#include "nel/errors.hpp"

namespace nel {

namespace {
constexpr double kLogPi = 1.14472988584940017414;  // log(pi)
constexpr double kLog2Pi = 1.83787706640934548356;  // log(2 pi)

void check_square(const Matrix& m, Eigen::Index d, const char* what) {
  if (m.rows() != d || m.cols() != d) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch");
  }
}
}  // namespace

double log_multivariate_gamma(int d, double a) {
  double r = 0.25 * d * (d - 1) * kLogPi;
  for (int j = 1; j <= d; ++j) r += std::lgamma(a + 0.5 * (1 - j));
  return r;
}

double log_gaussian_pdf(const Vector& x, const Vector& mean, const Matrix& cov) {
  const Eigen::Index d = x.size();
  if (mean.size() != d) throw InvalidArgument("gaussian: dimension mismatch");
  check_square(cov, d, "gaussian");
  const Matrix l = cholesky_lower(cov);
  Vector z = x - mean;
  l.triangularView<Eigen::Lower>().solveInPlace(z);
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(d) * kLog2Pi + log_det + z.squaredNorm());
}

double log_gaussian_pdf_scaled(const Eigen::Ref<const Vector>& x,
                               const Eigen::Ref<const Vector>& mean,
                               const CholeskyFactor& c, double scale,
                               Eigen::Ref<Vector> work) {
  const int d = c.dim();
  for (int i = 0; i < d; ++i) work(i) = x(i) - mean(i);
  c.solve_lower_in_place(work);
  const double q = work.squaredNorm();
  return -0.5 * (d * (kLog2Pi + std::log(scale)) + c.log_det() + q / scale);
}

double log_wishart_pdf(const Matrix& x, const Matrix& scale, double dof) {
  const auto d = static_cast<int>(x.rows());
  check_square(x, d, "wishart");
  check_square(scale, d, "wishart");
  if (!(dof > d - 1)) throw InvalidArgument("wishart: dof must exceed d-1");
  const Matrix scale_inv = inverse_spd(scale);
  return 0.5 * (dof - d - 1) * log_det_spd(x) -
         0.5 * (scale_inv * x).trace() - 0.5 * dof * d * std::numbers::ln2 -
         0.5 * dof * log_det_spd(scale) - log_multivariate_gamma(d, 0.5 * dof);
}

double log_inverse_wishart_pdf(const Matrix& x, const Matrix& scale,
                               double dof) {
  const auto d = static_cast<int>(x.rows());
  check_square(x, d, "inverse-wishart");
  check_square(scale, d, "inverse-wishart");
  if (!(dof > d - 1)) {
    throw InvalidArgument("inverse-wishart: dof must exceed d-1");
  }
  const Matrix x_inv = inverse_spd(x);
  return 0.5 * dof * log_det_spd(scale) - 0.5 * (dof + d + 1) * log_det_spd(x) -
         0.5 * (scale * x_inv).trace() - 0.5 * dof * d * std::numbers::ln2 -
         log_multivariate_gamma(d, 0.5 * dof);
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw InvalidArgument("gamma pdf: shape and rate must be positive");
  }
  if (!(x > 0.0)) throw InvalidArgument("gamma pdf: x must be positive");
  return shape * std::log(rate) - std::lgamma(shape) +
         (shape - 1.0) * std::log(x) - rate * x;
}

Vector sample_gaussian(const Vector& mean, const Matrix& cov, Rng& rng) {
  const Matrix l = cholesky_lower(cov);
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + l * z;
}

Matrix sample_wishart(const Matrix& scale, double dof, Rng& rng) {
  const auto d = static_cast<int>(scale.rows());
  check_square(scale, d, "wishart sample");
  if (!(dof > d - 1)) throw InvalidArgument("wishart: dof must exceed d-1");
  const Matrix l = cholesky_lower(scale);
  Matrix a = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(dof - i));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Matrix la = l * a;
  return symmetrize(la * la.transpose());
}

Matrix sample_inverse_wishart(const Matrix& scale, double dof, Rng& rng) {
  return inverse_spd(sample_wishart(inverse_spd(scale), dof, rng));
}

std::vector<double> sample_symmetric_dirichlet(std::size_t k,
                                               double concentration, Rng& rng) {
  if (k == 0) throw InvalidArgument("dirichlet: empty support");
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& v : w) {
    v = rng.gamma(concentration);
    total += v;
  }
  for (auto& v : w) v /= total;
  return w;
}

std::vector<int> sample_multinomial(int n, const std::vector<double>& probs,
                                    Rng& rng) {
  std::vector<int> counts(probs.size(), 0);
  double remaining_mass = 1.0;
  int remaining = n;
  for (std::size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
    const double p = std::clamp(probs[i] / remaining_mass, 0.0, 1.0);
    std::binomial_distribution<int> dist(remaining, p);
    counts[i] = dist(rng.engine());
    remaining -= counts[i];
    remaining_mass -= probs[i];
    if (remaining_mass <= 0.0) remaining_mass = 1e-300;
  }
  if (!probs.empty()) counts.back() += remaining;
  return counts;
}

}  // namespace nel
