#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "nel/partition.hpp"
#include "nel/stats.hpp"

namespace nel {

/// Hyper-priors over the adaptive hyperparameters:
///   mu0 ~ N(mu_p, (psi0 c1)^{-1}),  psi0 ~ W(sigma0, c2),
///   kappa0 ~ Gamma(alpha0, rate beta0),  kappa1 ~ Gamma(alpha1, rate beta1).
struct HyperPriorConfig {
  Vector mu_p;
  double c1 = 0.1;
  Matrix sigma0;
  double c2 = 0.0;
  double alpha0 = 0.0;
  double beta0 = 0.0;
  double alpha1 = 0.0;
  double beta1 = 0.0;

  /// Vague defaults for d features: mu_p = 0, sigma0 = I, c1 = 0.1,
  /// c2 = d + 2, alpha0 = 0.2 d + 1, beta0 = 2 d, alpha1 = d + 1, beta1 = 2 d.
  static HyperPriorConfig defaults(int d);
  int dim() const { return static_cast<int>(mu_p.size()); }
  void validate() const;
};

/// Current hyperparameters of the two-layer model. m stays fixed.
struct HyperState {
  Vector mu0;
  Matrix psi0;
  double kappa0 = 0.1;
  double kappa1 = 0.5;
  double m = 0.0;

  /// mu0 = 0, psi0 = I, kappa0 = 0.1, kappa1 = 0.5, m = d + 2.
  static HyperState vague(int d);
  int dim() const { return static_cast<int>(mu0.size()); }
  void validate() const;

  /// Base measure H = NIW(mu0, psi0, kappa0, m) over class parameters.
  NIWParams class_prior() const;
  /// Prior of a single component of a fresh class: integrating the class
  /// mean out of mu_kl ~ N(mu_k, Sigma/kappa1) leaves an NIW whose mean
  /// precision is kappa0 kappa1 / (kappa0 + kappa1).
  NIWParams new_class_component_prior() const;
};

/// Closed-form Sigma_k estimator in use.
enum class SigmaForm {
  /// Maximizer of the class-covariance posterior with component factors
  /// raised to N_k/N (the default).
  PosteriorMaximizer,
  /// Compatibility form weighting component l by N_kl/N_k.
  Verbatim,
};

/// Point estimate of one class's parameters with cached factorization.
struct ClassEstimate {
  Vector mu;
  Matrix sigma;
  Matrix precision;
  CholeskyFactor chol;

  ClassEstimate() = default;
  ClassEstimate(Vector mu_hat, Matrix sigma_hat);
};

/// Point estimates of class means/covariances and component means, stored by
/// class and component id of a PartitionState.
struct HiddenEstimates {
  std::vector<std::optional<ClassEstimate>> classes;
  std::vector<Vector> component_mu;

  bool has_class(int k) const {
    return k >= 0 && k < static_cast<int>(classes.size()) && classes[k];
  }
  const ClassEstimate& at(int k) const { return *classes[k]; }
  void set_class(int k, Vector mu, Matrix sigma);
};

struct ComponentView {
  SuffStats stats;
  Vector mu_hat;
};

struct ClassView {
  std::vector<ComponentView> components;
  Vector mu_hat;
  Matrix sigma_hat;
  int n() const;
};

/// Snapshot of the class/component hierarchy with its current estimates;
/// the input to every hyperparameter estimator.
struct Hierarchy {
  std::vector<ClassView> classes;
  int n_total() const;
};

Hierarchy make_hierarchy(const PartitionState& state,
                         const HiddenEstimates& hidden);

Vector estimate_mu_kl(const SuffStats& component, const Vector& mu_k,
                      double kappa1);
/// Class mean given the component means already stored in `cls`.
Vector estimate_mu_k(const ClassView& cls, const HyperState& hypers);
/// Class covariance given mu_hat of the class and its components.
Matrix estimate_sigma_k(const ClassView& cls, const HyperState& hypers,
                        int n_total, SigmaForm form = SigmaForm::PosteriorMaximizer);

Vector estimate_mu0(const Hierarchy& h, const HyperState& hypers,
                    const HyperPriorConfig& config);
Matrix estimate_psi0(const Hierarchy& h, const HyperState& hypers,
                     const HyperPriorConfig& config);

inline constexpr double kKappaFloor = 1e-8;

struct KappaEstimate {
  double value = 0.0;
  bool clamped = false;
};
KappaEstimate estimate_kappa0(const Hierarchy& h, const HyperState& hypers,
                              const HyperPriorConfig& config);
KappaEstimate estimate_kappa1(const Hierarchy& h, const HyperState& hypers,
                              const HyperPriorConfig& config);

struct HyperUpdate {
  HyperState hypers;
  int clamped = 0;
};
/// One sequential pass mu0 -> psi0 -> kappa0 -> kappa1, each step using the
/// most recent values of the others.
HyperUpdate update_hypers(const Hierarchy& h, const HyperState& hypers,
                          const HyperPriorConfig& config);

struct ClassFit {
  Vector mu_k;
  Matrix sigma_k;
  std::vector<Vector> mu_kl;
};

/// Joint maximizer of the class and component means (their estimators are
/// mutually dependent and linear, so the fixed point has a closed form),
/// followed by the class covariance.
ClassFit fit_class(std::span<const SuffStats> components,
                   const HyperState& hypers, int n_total,
                   SigmaForm form = SigmaForm::PosteriorMaximizer);

/// Recomputes estimates for every live class and component of `state`.
/// A pure function of (state, hypers, form).
HiddenEstimates refresh_hidden_estimates(
    const PartitionState& state, const HyperState& hypers,
    SigmaForm form = SigmaForm::PosteriorMaximizer);

/// Variables whose weighted posterior can be evaluated.
enum class Target { Mu0, Psi0, Kappa0, Kappa1, SigmaK, MuK, MuKl };

struct TargetRef {
  Target target;
  int class_index = -1;      // index into Hierarchy::classes
  int component_index = -1;  // index into ClassView::components
};

using TargetValue = std::variant<double, Vector, Matrix>;

/// Unnormalized log-density of the weighted posterior of one variable with
/// everything else held at the values in (h, hypers). Class likelihood
/// factors carry exponent N_k/N; component factors carry N_kl/N for kappa1,
/// N_kl/N_k for mu_k and N_k/N for Sigma_k. Terms that do not depend on the
/// target (and the Wishart normalizer of the scatter factor) are dropped.
double log_weighted_posterior(const TargetRef& ref, const TargetValue& value,
                              const Hierarchy& h, const HyperState& hypers,
                              const HyperPriorConfig& config);

}  // namespace nel
