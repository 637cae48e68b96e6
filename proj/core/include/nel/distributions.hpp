#pragma once

#include "nel/cholesky.hpp"
#include "nel/rng.hpp"

namespace nel {

/// log Gamma_d(a), the multivariate gamma function.
double log_multivariate_gamma(int d, double a);

/// Multivariate normal log-density. Throws FactorizationError if `cov` is not
/// positive definite.
double log_gaussian_pdf(const Vector& x, const Vector& mean, const Matrix& cov);

/// Same density with covariance `scale * C`, where `c` is the Cholesky factor
/// of C. Allocation-free given a `work` buffer of size d.
double log_gaussian_pdf_scaled(const Eigen::Ref<const Vector>& x,
                               const Eigen::Ref<const Vector>& mean,
                               const CholeskyFactor& c, double scale,
                               Eigen::Ref<Vector> work);

/// Wishart W(X | scale, dof) log-density (mean dof * scale). Requires dof > d-1.
double log_wishart_pdf(const Matrix& x, const Matrix& scale, double dof);

/// Inverse-Wishart W^{-1}(X | scale, dof) log-density (mean scale / (dof-d-1)).
double log_inverse_wishart_pdf(const Matrix& x, const Matrix& scale,
                               double dof);

/// Gamma(x | shape, rate) log-density.
double log_gamma_pdf(double x, double shape, double rate);

Vector sample_gaussian(const Vector& mean, const Matrix& cov, Rng& rng);

/// Bartlett-decomposition draw from W(scale, dof).
Matrix sample_wishart(const Matrix& scale, double dof, Rng& rng);

/// Draw from W^{-1}(scale, dof): the inverse of a W(scale^{-1}, dof) draw.
Matrix sample_inverse_wishart(const Matrix& scale, double dof, Rng& rng);

/// Dirichlet draw with every concentration equal to `concentration`.
std::vector<double> sample_symmetric_dirichlet(std::size_t k,
                                               double concentration, Rng& rng);

/// Multinomial counts of `n` trials over `probs`.
std::vector<int> sample_multinomial(int n, const std::vector<double>& probs,
                                    Rng& rng);

}  // namespace nel
