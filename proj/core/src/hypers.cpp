#include "nel/hypers.hpp"

#include <cmath>
#include <string>

#include "nel/distributions.hpp"
#include "nel/errors.hpp"

namespace nel {

HyperPriorConfig HyperPriorConfig::defaults(int d) {
  HyperPriorConfig c;
  c.mu_p = Vector::Zero(d);
  c.c1 = 0.1;
  c.sigma0 = Matrix::Identity(d, d);
  c.c2 = d + 2.0;
  c.alpha0 = 0.2 * d + 1.0;
  c.beta0 = 2.0 * d;
  c.alpha1 = d + 1.0;
  c.beta1 = 2.0 * d;
  return c;
}

void HyperPriorConfig::validate() const {
  const int d = dim();
  if (d <= 0) throw InvalidArgument("hyper prior: empty mu_p");
  if (sigma0.rows() != d || sigma0.cols() != d) {
    throw InvalidArgument("hyper prior: sigma0 dimension mismatch");
  }
  if (!(c1 > 0.0)) throw InvalidArgument("hyper prior: c1 must be positive");
  if (!(c2 > d - 1)) throw InvalidArgument("hyper prior: c2 must exceed d - 1");
  if (!(alpha0 > 0.0) || !(beta0 > 0.0) || !(alpha1 > 0.0) || !(beta1 > 0.0)) {
    throw InvalidArgument("hyper prior: gamma parameters must be positive");
  }
  cholesky_lower(sigma0);
}

HyperState HyperState::vague(int d) {
  HyperState h;
  h.mu0 = Vector::Zero(d);
  h.psi0 = Matrix::Identity(d, d);
  h.kappa0 = 0.1;
  h.kappa1 = 0.5;
  h.m = d + 2.0;
  return h;
}

void HyperState::validate() const {
  class_prior().validate();
  if (!(kappa1 > 0.0)) throw InvalidArgument("hypers: kappa1 must be positive");
  cholesky_lower(psi0);
}

NIWParams HyperState::class_prior() const {
  return NIWParams{mu0, psi0, kappa0, m};
}

NIWParams HyperState::new_class_component_prior() const {
  return NIWParams{mu0, psi0, kappa0 * kappa1 / (kappa0 + kappa1), m};
}

ClassEstimate::ClassEstimate(Vector mu_hat, Matrix sigma_hat)
    : mu(std::move(mu_hat)), sigma(symmetrize(sigma_hat)), chol(sigma) {
  precision = chol.inverse();
}

void HiddenEstimates::set_class(int k, Vector mu, Matrix sigma) {
  if (k >= static_cast<int>(classes.size())) classes.resize(k + 1);
  classes[k].emplace(std::move(mu), std::move(sigma));
}

int ClassView::n() const {
  int n = 0;
  for (const auto& c : components) n += c.stats.n();
  return n;
}

int Hierarchy::n_total() const {
  int n = 0;
  for (const auto& c : classes) n += c.n();
  return n;
}

Hierarchy make_hierarchy(const PartitionState& state,
                         const HiddenEstimates& hidden) {
  Hierarchy h;
  h.classes.reserve(state.active_classes().size());
  for (int k : state.active_classes()) {
    if (!hidden.has_class(k)) {
      throw ContractViolation("hierarchy: class " + std::to_string(k) +
                              " has no estimate");
    }
    ClassView view;
    view.mu_hat = hidden.at(k).mu;
    view.sigma_hat = hidden.at(k).sigma;
    for (int l : state.class_info(k).components) {
      if (l >= static_cast<int>(hidden.component_mu.size()) ||
          hidden.component_mu[l].size() == 0) {
        throw ContractViolation("hierarchy: component without estimate");
      }
      view.components.push_back({state.component(l).stats, hidden.component_mu[l]});
    }
    h.classes.push_back(std::move(view));
  }
  return h;
}

Vector estimate_mu_kl(const SuffStats& component, const Vector& mu_k,
                      double kappa1) {
  if (!(kappa1 > 0.0)) throw InvalidArgument("mu_kl: kappa1 must be positive");
  return (kappa1 * mu_k + component.sum()) / (kappa1 + component.n());
}

Vector estimate_mu_k(const ClassView& cls, const HyperState& hypers) {
  const int nk = cls.n();
  if (nk == 0) throw ContractViolation("mu_k: empty class");
  Vector acc = Vector::Zero(hypers.dim());
  for (const auto& c : cls.components) acc += c.stats.n() * c.mu_hat;
  return (hypers.kappa0 * hypers.mu0 + (hypers.kappa1 / nk) * acc) /
         (hypers.kappa0 + hypers.kappa1);
}

Matrix estimate_sigma_k(const ClassView& cls, const HyperState& hypers,
                        int n_total, SigmaForm form) {
  const int nk = cls.n();
  if (nk == 0) throw ContractViolation("sigma_k: empty class");
  const int d = hypers.dim();
  const Vector d0 = cls.mu_hat - hypers.mu0;
  Matrix numer = hypers.psi0 + hypers.kappa0 * d0 * d0.transpose();
  Matrix comp_sum = Matrix::Zero(d, d);
  double denom = hypers.m + d + 2.0;
  if (form == SigmaForm::PosteriorMaximizer) {
    if (n_total < nk) throw InvalidArgument("sigma_k: n_total below class size");
    const double w = static_cast<double>(nk) / n_total;
    for (const auto& c : cls.components) {
      const Vector dl = c.mu_hat - cls.mu_hat;
      comp_sum += hypers.kappa1 * dl * dl.transpose() + c.stats.scatter();
    }
    numer += w * comp_sum;
    denom += w * nk;
  } else {
    double sq = 0.0;
    for (const auto& c : cls.components) {
      const Vector dl = c.mu_hat - cls.mu_hat;
      const double nl = c.stats.n();
      comp_sum += nl * (hypers.kappa1 * dl * dl.transpose() + c.stats.scatter());
      sq += nl * nl;
    }
    numer += comp_sum / nk;
    denom += sq / nk;
  }
  Matrix sigma = symmetrize(numer / denom);
  cholesky_lower(sigma);  // PD check
  return sigma;
}

namespace {

void require_classes(const Hierarchy& h, const char* what) {
  if (h.classes.empty()) {
    throw ContractViolation(std::string(what) + ": no classes");
  }
}

}  // namespace

Vector estimate_mu0(const Hierarchy& h, const HyperState& hypers,
                    const HyperPriorConfig& config) {
  require_classes(h, "mu0");
  const int n = h.n_total();
  Matrix a = config.c1 * hypers.psi0;
  Vector b = a * config.mu_p;
  for (const auto& c : h.classes) {
    const Matrix prec = inverse_spd(c.sigma_hat);
    const double w = hypers.kappa0 * c.n() / n;
    a += w * prec;
    b += w * prec * c.mu_hat;
  }
  Eigen::LLT<Matrix> llt(symmetrize(a));
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("mu0: precision matrix is singular");
  }
  return llt.solve(b);
}

Matrix estimate_psi0(const Hierarchy& h, const HyperState& hypers,
                     const HyperPriorConfig& config) {
  require_classes(h, "psi0");
  const int d = hypers.dim();
  const int n = h.n_total();
  const Vector dp = hypers.mu0 - config.mu_p;
  Matrix b = inverse_spd(config.sigma0) + config.c1 * dp * dp.transpose();
  for (const auto& c : h.classes) {
    b += (static_cast<double>(c.n()) / n) * inverse_spd(c.sigma_hat);
  }
  return symmetrize((config.c2 - d + hypers.m) * inverse_spd(symmetrize(b)));
}

namespace {

KappaEstimate clamp_kappa(double numer, double denom) {
  const double v = numer / denom;
  if (!(v >= kKappaFloor)) return {kKappaFloor, true};
  return {v, false};
}

double mahalanobis(const Vector& a, const Vector& b, const Matrix& cov) {
  const Matrix l = cholesky_lower(cov);
  Vector z = a - b;
  l.triangularView<Eigen::Lower>().solveInPlace(z);
  return z.squaredNorm();
}

}  // namespace

KappaEstimate estimate_kappa0(const Hierarchy& h, const HyperState& hypers,
                              const HyperPriorConfig& config) {
  require_classes(h, "kappa0");
  const int d = hypers.dim();
  const int n = h.n_total();
  double s = 0.0;
  for (const auto& c : h.classes) {
    s += c.n() * mahalanobis(c.mu_hat, hypers.mu0, c.sigma_hat);
  }
  return clamp_kappa(2.0 * (config.alpha0 - 1.0) + d, 2.0 * config.beta0 + s / n);
}

KappaEstimate estimate_kappa1(const Hierarchy& h, const HyperState& hypers,
                              const HyperPriorConfig& config) {
  require_classes(h, "kappa1");
  const int d = hypers.dim();
  const int n = h.n_total();
  double s = 0.0;
  for (const auto& c : h.classes) {
    const Matrix l = cholesky_lower(c.sigma_hat);
    for (const auto& comp : c.components) {
      Vector z = comp.mu_hat - c.mu_hat;
      l.triangularView<Eigen::Lower>().solveInPlace(z);
      s += comp.stats.n() * z.squaredNorm();
    }
  }
  return clamp_kappa(2.0 * (config.alpha1 - 1.0) + d, 2.0 * config.beta1 + s / n);
}

HyperUpdate update_hypers(const Hierarchy& h, const HyperState& hypers,
                          const HyperPriorConfig& config) {
  HyperUpdate out{hypers, 0};
  HyperState& s = out.hypers;
  s.mu0 = estimate_mu0(h, s, config);
  s.psi0 = estimate_psi0(h, s, config);
  const KappaEstimate k0 = estimate_kappa0(h, s, config);
  s.kappa0 = k0.value;
  const KappaEstimate k1 = estimate_kappa1(h, s, config);
  s.kappa1 = k1.value;
  out.clamped = static_cast<int>(k0.clamped) + static_cast<int>(k1.clamped);
  return out;
}

ClassFit fit_class(std::span<const SuffStats> components,
                   const HyperState& hypers, int n_total, SigmaForm form) {
  int nk = 0;
  for (const auto& c : components) nk += c.n();
  if (nk == 0) throw ContractViolation("fit_class: empty class");
  const double k0 = hypers.kappa0;
  const double k1 = hypers.kappa1;
  // mu_k (k0 + k1) = k0 mu0 + k1 sum_l w_l (k1 mu_k + N_l xbar_l)/(k1 + N_l)
  double denom = k0 + k1;
  Vector numer = k0 * hypers.mu0;
  for (const auto& c : components) {
    const double w = static_cast<double>(c.n()) / nk;
    denom -= k1 * k1 * w / (k1 + c.n());
    numer += (k1 * w / (k1 + c.n())) * c.sum();
  }
  ClassFit fit;
  fit.mu_k = numer / denom;
  ClassView view;
  view.mu_hat = fit.mu_k;
  for (const auto& c : components) {
    fit.mu_kl.push_back(estimate_mu_kl(c, fit.mu_k, k1));
    view.components.push_back({c, fit.mu_kl.back()});
  }
  fit.sigma_k = estimate_sigma_k(view, hypers, n_total, form);
  return fit;
}

HiddenEstimates refresh_hidden_estimates(const PartitionState& state,
                                         const HyperState& hypers,
                                         SigmaForm form) {
  HiddenEstimates out;
  out.classes.resize(static_cast<std::size_t>(state.class_capacity()));
  out.component_mu.resize(static_cast<std::size_t>(state.component_capacity()));
  const int n_total = state.num_assigned();
  std::vector<SuffStats> comps;
  for (int k : state.active_classes()) {
    const auto& ids = state.class_info(k).components;
    comps.clear();
    for (int l : ids) comps.push_back(state.component(l).stats);
    ClassFit fit = fit_class(comps, hypers, n_total, form);
    for (std::size_t j = 0; j < ids.size(); ++j) {
      out.component_mu[ids[j]] = std::move(fit.mu_kl[j]);
    }
    out.set_class(k, std::move(fit.mu_k), std::move(fit.sigma_k));
  }
  return out;
}

namespace {

template <typename T>
const T& value_as(const TargetValue& v, const char* what) {
  if (const T* p = std::get_if<T>(&v)) return *p;
  throw InvalidArgument(std::string("weighted posterior: wrong value type for ") +
                        what);
}

const ClassView& class_at(const Hierarchy& h, int index) {
  if (index < 0 || index >= static_cast<int>(h.classes.size())) {
    throw InvalidArgument("weighted posterior: class index out of range");
  }
  return h.classes[index];
}

void require_spd(const Matrix& a, int d, const char* what) {
  if (a.rows() != d || a.cols() != d || !a.isApprox(a.transpose()) ||
      Eigen::LLT<Matrix>(a).info() != Eigen::Success) {
    throw InvalidArgument(std::string("weighted posterior: ") + what +
                          " is not symmetric positive definite");
  }
}

// Sigma-dependent part of W(S | sigma, dof): -(dof/2) log|sigma| - tr(sigma^-1 S)/2.
double wishart_scatter_kernel(const Matrix& scatter, const Matrix& sigma,
                              double dof) {
  return -0.5 * dof * log_det_spd(sigma) -
         0.5 * (inverse_spd(sigma) * scatter).trace();
}

}  // namespace

double log_weighted_posterior(const TargetRef& ref, const TargetValue& value,
                              const Hierarchy& h, const HyperState& hypers,
                              const HyperPriorConfig& config) {
  const double n = h.n_total();
  if (n <= 0) throw ContractViolation("weighted posterior: empty hierarchy");
  switch (ref.target) {
    case Target::Mu0: {
      const Vector& mu0 = value_as<Vector>(value, "mu0");
      double lp = log_gaussian_pdf(mu0, config.mu_p,
                                   inverse_spd(config.c1 * hypers.psi0));
      for (const auto& c : h.classes) {
        lp += (c.n() / n) *
              log_gaussian_pdf(c.mu_hat, mu0, c.sigma_hat / hypers.kappa0);
      }
      return lp;
    }
    case Target::Psi0: {
      const Matrix& psi0 = value_as<Matrix>(value, "psi0");
      require_spd(psi0, hypers.dim(), "psi0");
      double lp = log_wishart_pdf(psi0, config.sigma0, config.c2) +
                  log_gaussian_pdf(hypers.mu0, config.mu_p,
                                   inverse_spd(config.c1 * psi0));
      for (const auto& c : h.classes) {
        lp += (c.n() / n) * log_inverse_wishart_pdf(c.sigma_hat, psi0, hypers.m);
      }
      return lp;
    }
    case Target::Kappa0: {
      const double k = value_as<double>(value, "kappa0");
      if (!(k > 0.0)) throw InvalidArgument("weighted posterior: kappa0 <= 0");
      double lp = log_gamma_pdf(k, config.alpha0, config.beta0);
      for (const auto& c : h.classes) {
        lp += (c.n() / n) * log_gaussian_pdf(c.mu_hat, hypers.mu0, c.sigma_hat / k);
      }
      return lp;
    }
    case Target::Kappa1: {
      const double k = value_as<double>(value, "kappa1");
      if (!(k > 0.0)) throw InvalidArgument("weighted posterior: kappa1 <= 0");
      double lp = log_gamma_pdf(k, config.alpha1, config.beta1);
      for (const auto& c : h.classes) {
        for (const auto& comp : c.components) {
          lp += (comp.stats.n() / n) *
                log_gaussian_pdf(comp.mu_hat, c.mu_hat, c.sigma_hat / k);
        }
      }
      return lp;
    }
    case Target::SigmaK: {
      const Matrix& sigma = value_as<Matrix>(value, "sigma_k");
      require_spd(sigma, hypers.dim(), "sigma_k");
      const ClassView& c = class_at(h, ref.class_index);
      const double w = c.n() / n;
      double lp = log_inverse_wishart_pdf(sigma, hypers.psi0, hypers.m) +
                  log_gaussian_pdf(c.mu_hat, hypers.mu0, sigma / hypers.kappa0);
      for (const auto& comp : c.components) {
        lp += w * (log_gaussian_pdf(comp.mu_hat, c.mu_hat, sigma / hypers.kappa1) +
                   wishart_scatter_kernel(comp.stats.scatter(), sigma,
                                          comp.stats.n() - 1.0));
      }
      return lp;
    }
    case Target::MuK: {
      const Vector& mu = value_as<Vector>(value, "mu_k");
      const ClassView& c = class_at(h, ref.class_index);
      const double nk = c.n();
      double lp = log_gaussian_pdf(mu, hypers.mu0, c.sigma_hat / hypers.kappa0);
      for (const auto& comp : c.components) {
        lp += (comp.stats.n() / nk) *
              log_gaussian_pdf(comp.mu_hat, mu, c.sigma_hat / hypers.kappa1);
      }
      return lp;
    }
    case Target::MuKl: {
      const Vector& mu = value_as<Vector>(value, "mu_kl");
      const ClassView& c = class_at(h, ref.class_index);
      if (ref.component_index < 0 ||
          ref.component_index >= static_cast<int>(c.components.size())) {
        throw InvalidArgument("weighted posterior: component index out of range");
      }
      const ComponentView& comp = c.components[ref.component_index];
      return log_gaussian_pdf(mu, c.mu_hat, c.sigma_hat / hypers.kappa1) +
             log_gaussian_pdf(comp.stats.mean(), mu,
                              c.sigma_hat / static_cast<double>(comp.stats.n()));
    }
  }
  throw InvalidArgument("weighted posterior: unknown target");
}

}  // namespace nel
