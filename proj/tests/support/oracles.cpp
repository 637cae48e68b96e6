#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace nel::oracle {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double scalar_normal(double x, double mean, double var) {
  const double z = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + z * z / var);
}

// Scalar inverse-Wishart, i.e. an inverse gamma with shape m/2, scale psi/2.
double scalar_inverse_wishart(double s2, double psi, double m) {
  const double a = 0.5 * m;
  const double b = 0.5 * psi;
  return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(s2) - b / s2;
}

double sum_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

double loglik(const std::vector<double>& xs, double mean, double var) {
  double s = 0.0;
  for (double x : xs) s += scalar_normal(x, mean, var);
  return s;
}

// Center and scale of log(sigma2) for the outer integrals.
std::pair<double, double> variance_window(const std::vector<double>& xs,
                                          const ScalarNiw& p) {
  const double n = static_cast<double>(xs.size());
  const double mean = xs.empty() ? p.mu0 : sum_of(xs) / n;
  double ss = p.psi0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  ss += (mean - p.mu0) * (mean - p.mu0);
  return {std::log(ss / (p.m + n + 2.0)), 2.0 / std::sqrt(p.m + n)};
}

}  // namespace

double log_multigamma(int d, double a) {
  double r = 0.25 * d * (d - 1) * std::log(M_PI);
  for (int j = 1; j <= d; ++j) r += std::lgamma(a + 0.5 * (1 - j));
  return r;
}

double gaussian_logpdf(const Vector& x, const Vector& mean, const Matrix& cov) {
  const Vector z = x - mean;
  const double quad = z.dot(cov.inverse() * z);
  return -0.5 * (x.size() * kLog2Pi + std::log(cov.determinant()) + quad);
}

double wishart_logpdf(const Matrix& x, const Matrix& scale, double dof) {
  const int d = static_cast<int>(x.rows());
  return 0.5 * (dof - d - 1) * std::log(x.determinant()) -
         0.5 * (scale.inverse() * x).trace() - 0.5 * dof * d * std::log(2.0) -
         0.5 * dof * std::log(scale.determinant()) - log_multigamma(d, 0.5 * dof);
}

double inverse_wishart_logpdf(const Matrix& x, const Matrix& scale, double dof) {
  const int d = static_cast<int>(x.rows());
  return 0.5 * dof * std::log(scale.determinant()) - 0.5 * dof * d * std::log(2.0) -
         log_multigamma(d, 0.5 * dof) -
         0.5 * (dof + d + 1) * std::log(x.determinant()) -
         0.5 * (scale * x.inverse()).trace();
}

double gamma_logpdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) -
         rate * x;
}

double log_integrate_line(const std::function<double(double)>& logf,
                          double center, double scale, double half_width,
                          double tol) {
  constexpr int kGrid = 201;
  const double a = center - half_width * scale;
  const double b = center + half_width * scale;
  double peak = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    peak = std::max(peak, logf(a + (b - a) * i / (kGrid - 1)));
  }
  auto f = [&](double t) { return std::exp(logf(t) - peak); };
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, tol);
  return peak + std::log(v);
}

double niw_marginal_quadrature(const std::vector<double>& xs, const ScalarNiw& p) {
  const double n = static_cast<double>(xs.size());
  const double kn = p.kappa0 + n;
  const double center = (p.kappa0 * p.mu0 + sum_of(xs)) / kn;
  auto outer = [&](double u) {
    const double s2 = std::exp(u);
    auto inner = [&](double mu) {
      return scalar_normal(mu, p.mu0, s2 / p.kappa0) + loglik(xs, mu, s2);
    };
    return scalar_inverse_wishart(s2, p.psi0, p.m) + u +
           log_integrate_line(inner, center, std::sqrt(s2 / kn));
  };
  const auto [uc, us] = variance_window(xs, p);
  return log_integrate_line(outer, uc, us);
}

double niw_predictive_quadrature(double x, const std::vector<double>& xs,
                                 const ScalarNiw& p) {
  std::vector<double> with = xs;
  with.push_back(x);
  return niw_marginal_quadrature(with, p) - niw_marginal_quadrature(xs, p);
}

double plugin_marginal_quadrature(const std::vector<double>& xs, double mu_k,
                                  double sigma2, double kappa1) {
  const double n = static_cast<double>(xs.size());
  auto f = [&](double mu) {
    return scalar_normal(mu, mu_k, sigma2 / kappa1) + loglik(xs, mu, sigma2);
  };
  return log_integrate_line(f, (kappa1 * mu_k + sum_of(xs)) / (kappa1 + n),
                            std::sqrt(sigma2 / (kappa1 + n)));
}

double two_layer_marginal_quadrature(const std::vector<double>& xs,
                                     const ScalarNiw& p, double kappa1) {
  const double n = static_cast<double>(xs.size());
  const double k0 = p.kappa0;
  const double keff = k0 * kappa1 / (k0 + kappa1);
  auto outer = [&](double u) {
    const double s2 = std::exp(u);
    // The class mean enters only through a Gaussian convolution, so given
    // sigma2 the component mean is N(mu0, sigma2 / k0 + sigma2 / kappa1).
    auto middle = [&](double mu_kl) {
      return loglik(xs, mu_kl, s2) + scalar_normal(mu_kl, p.mu0, s2 / keff);
    };
    return scalar_inverse_wishart(s2, p.psi0, p.m) + u +
           log_integrate_line(middle, (keff * p.mu0 + sum_of(xs)) / (keff + n),
                              std::sqrt(s2 / (keff + n)));
  };
  const auto [uc, us] = variance_window(xs, p);
  return log_integrate_line(outer, uc, us);
}

Vector ToyComponent::mean() const {
  Vector s = Vector::Zero(points.front().size());
  for (const auto& x : points) s += x;
  return s / static_cast<double>(points.size());
}

Matrix ToyComponent::scatter() const {
  const Vector mu = mean();
  Matrix s = Matrix::Zero(mu.size(), mu.size());
  for (const auto& x : points) s += (x - mu) * (x - mu).transpose();
  return s;
}

int ToyClass::n() const {
  int s = 0;
  for (const auto& c : components) s += c.n();
  return s;
}

int ToyState::n_total() const {
  int s = 0;
  for (const auto& c : classes) s += c.n();
  return s;
}

Matrix random_spd(int d, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> z;
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = z(rng);
  return scale * (a * a.transpose() / d + 0.5 * Matrix::Identity(d, d));
}

namespace {

Vector random_vector(int d, std::mt19937_64& rng, double sd, const Vector* around) {
  std::normal_distribution<double> z(0.0, sd);
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = z(rng);
  if (around) v += *around;
  return v;
}

}  // namespace

ToyProblem random_problem(std::mt19937_64& rng, int dim, int n_classes,
                          int max_components) {
  std::uniform_int_distribution<int> n_comp(1, max_components);
  std::uniform_int_distribution<int> n_pts(1, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ToyProblem p;
  p.state.dim = dim;
  for (int k = 0; k < n_classes; ++k) {
    ToyClass cls;
    const Vector centre = random_vector(dim, rng, 2.0, nullptr);
    const int comps = n_comp(rng);
    for (int l = 0; l < comps; ++l) {
      ToyComponent c;
      const Vector cm = random_vector(dim, rng, 1.0, &centre);
      const int n = n_pts(rng);
      for (int i = 0; i < n; ++i) c.points.push_back(random_vector(dim, rng, 0.7, &cm));
      c.mu_hat = random_vector(dim, rng, 0.3, &cm);
      cls.components.push_back(std::move(c));
    }
    cls.mu_hat = random_vector(dim, rng, 0.5, &centre);
    cls.sigma_hat = random_spd(dim, rng, 0.5 + u(rng));
    p.state.classes.push_back(std::move(cls));
  }
  p.hypers.mu0 = random_vector(dim, rng, 0.5, nullptr);
  p.hypers.psi0 = random_spd(dim, rng, 0.5 + u(rng));
  p.hypers.kappa0 = 0.05 + 2.0 * u(rng);
  p.hypers.kappa1 = 0.1 + 2.0 * u(rng);
  p.hypers.m = dim + 2.0 + 3.0 * u(rng);
  p.prior.mu_p = random_vector(dim, rng, 0.5, nullptr);
  p.prior.c1 = 0.05 + u(rng);
  p.prior.sigma0 = random_spd(dim, rng, 0.5 + u(rng));
  p.prior.c2 = dim + 1.0 + 4.0 * u(rng);
  p.prior.alpha0 = 1.1 + 3.0 * u(rng);
  p.prior.beta0 = 0.5 + 4.0 * u(rng);
  p.prior.alpha1 = 1.1 + 3.0 * u(rng);
  p.prior.beta1 = 0.5 + 4.0 * u(rng);
  return p;
}

Hierarchy to_hierarchy(const ToyState& s) {
  Hierarchy h;
  for (const auto& c : s.classes) {
    ClassView v;
    v.mu_hat = c.mu_hat;
    v.sigma_hat = c.sigma_hat;
    for (const auto& comp : c.components) {
      SuffStats st(s.dim);
      for (const auto& x : comp.points) st.add(x);
      v.components.push_back({st, comp.mu_hat});
    }
    h.classes.push_back(std::move(v));
  }
  return h;
}

double log_post_mu0(const ToyProblem& p, const Vector& mu0) {
  const double n = p.state.n_total();
  double lp = gaussian_logpdf(mu0, p.prior.mu_p, (p.hypers.psi0 * p.prior.c1).inverse());
  for (const auto& c : p.state.classes) {
    lp += c.n() / n * gaussian_logpdf(c.mu_hat, mu0, c.sigma_hat / p.hypers.kappa0);
  }
  return lp;
}

double log_post_psi0(const ToyProblem& p, const Matrix& psi0) {
  const double n = p.state.n_total();
  double lp = wishart_logpdf(psi0, p.prior.sigma0, p.prior.c2) +
              gaussian_logpdf(p.hypers.mu0, p.prior.mu_p, (psi0 * p.prior.c1).inverse());
  for (const auto& c : p.state.classes) {
    lp += c.n() / n * inverse_wishart_logpdf(c.sigma_hat, psi0, p.hypers.m);
  }
  return lp;
}

double log_post_kappa0(const ToyProblem& p, double kappa0) {
  const double n = p.state.n_total();
  double lp = gamma_logpdf(kappa0, p.prior.alpha0, p.prior.beta0);
  for (const auto& c : p.state.classes) {
    lp += c.n() / n * gaussian_logpdf(c.mu_hat, p.hypers.mu0, c.sigma_hat / kappa0);
  }
  return lp;
}

double log_post_kappa1(const ToyProblem& p, double kappa1) {
  const double n = p.state.n_total();
  double lp = gamma_logpdf(kappa1, p.prior.alpha1, p.prior.beta1);
  for (const auto& c : p.state.classes) {
    for (const auto& comp : c.components) {
      lp += comp.n() / n * gaussian_logpdf(comp.mu_hat, c.mu_hat, c.sigma_hat / kappa1);
    }
  }
  return lp;
}

double log_post_sigma_k(const ToyProblem& p, int k, const Matrix& sigma) {
  const ToyClass& c = p.state.classes[k];
  const double w = static_cast<double>(c.n()) / p.state.n_total();
  const Matrix inv = sigma.inverse();
  const double logdet = std::log(sigma.determinant());
  double lp = inverse_wishart_logpdf(sigma, p.hypers.psi0, p.hypers.m) +
              gaussian_logpdf(c.mu_hat, p.hypers.mu0, sigma / p.hypers.kappa0);
  for (const auto& comp : c.components) {
    // Wishart factor of the scatter as a function of sigma; its normalizer
    // does not involve sigma and is undefined when N_kl - 1 < d.
    const double wishart = -0.5 * (comp.n() - 1.0) * logdet -
                           0.5 * (inv * comp.scatter()).trace();
    lp += w * (gaussian_logpdf(comp.mu_hat, c.mu_hat, sigma / p.hypers.kappa1) + wishart);
  }
  return lp;
}

double log_post_mu_k(const ToyProblem& p, int k, const Vector& mu) {
  const ToyClass& c = p.state.classes[k];
  double lp = gaussian_logpdf(mu, p.hypers.mu0, c.sigma_hat / p.hypers.kappa0);
  for (const auto& comp : c.components) {
    lp += static_cast<double>(comp.n()) / c.n() *
          gaussian_logpdf(comp.mu_hat, mu, c.sigma_hat / p.hypers.kappa1);
  }
  return lp;
}

double log_post_mu_kl(const ToyProblem& p, int k, int l, const Vector& mu) {
  const ToyClass& c = p.state.classes[k];
  double lp = gaussian_logpdf(mu, c.mu_hat, c.sigma_hat / p.hypers.kappa1);
  for (const auto& x : c.components[l].points) lp += gaussian_logpdf(x, mu, c.sigma_hat);
  return lp;
}

}  // namespace nel::oracle
