#pragma once

#include <vector>

#include "nel/hypers.hpp"
#include "nel/partition.hpp"
#include "nel/rng.hpp"

namespace nel {

/// Sampler kernel family. AI2GMM runs the I2GMM kernel with adaptive hypers.
enum class ModelKind { IGMM, I2GMM };

/// `Flat` replaces every likelihood term by a constant, leaving only the
/// CRP priors; used for prior-fidelity diagnostics.
enum class LikelihoodMode { Model, Flat };

/// Sentinel class id meaning "a class that does not exist yet".
inline constexpr int kNewClass = -1;

struct ComponentCandidate {
  enum class Kind { Existing, NewComponent, NewClass };
  Kind kind = Kind::Existing;
  int component = -1;  // Existing only
  int class_id = kNewClass;
  double logw = 0.0;
};

struct ClassCandidate {
  int class_id = kNewClass;
  double logw = 0.0;
};

/// Everything the kernels read besides the partition: hyperparameters, class
/// point estimates (I2GMM) and cached predictive pieces.
struct SamplerContext {
  ModelKind kind = ModelKind::I2GMM;
  HyperState hypers;
  HiddenEstimates hidden;
  LikelihoodMode likelihood = LikelihoodMode::Model;
  SigmaForm sigma_form = SigmaForm::PosteriorMaximizer;

  SamplerContext() = default;
  SamplerContext(ModelKind kind, HyperState hypers,
                 LikelihoodMode likelihood = LikelihoodMode::Model);

  /// Rebuilds caches derived from `hypers`. Call after changing them.
  void prepare();
  /// Recomputes class/component estimates from the state, then prepare().
  void refresh(const PartitionState& state);

  /// Predictive of a point opening a brand-new class (one new component).
  const NiwPosterior& new_class_predictive() const { return new_class_predictive_; }
  /// Initial estimate for a class created by sampling: mean `mu`, covariance
  /// at the inverse-Wishart mode psi0 / (m + d + 1).
  void init_class_estimate(int class_id, const Vector& mu);

  // Scratch buffers reused across calls; not part of the logical state.
  Vector work;
  Vector mean_work;
  std::vector<ComponentCandidate> candidates;
  std::vector<double> logw;

 private:
  NiwPosterior new_class_predictive_;
};

/// The IGMM partition tracks an NIW posterior per component.
PartitionState make_igmm_partition(const Matrix& points, const HyperState& hypers,
                                   double alpha, int reserved_classes);

/// Unnormalized seating log-weights of `x` within class `cls`: one entry per
/// existing component (log N_kl + predictive) and, for I2GMM, one entry for a
/// new component (log alpha + predictive under the class base measure). For
/// cls == kNewClass a single new-class entry with log alpha. The point must
/// not currently be assigned in the scored components. Throws
/// InvalidArgument for unknown class ids.
std::vector<ComponentCandidate> crp_component_logweights(
    const Eigen::Ref<const Vector>& x, int cls, const PartitionState& state,
    SamplerContext& ctx);

/// Removes the point, scores every admissible destination and re-seats it.
/// Restricted points only see their own class; unlabeled and outlier points
/// see every class plus a new class. Across classes, new-component mass alpha
/// is split by the class CRP: alpha m_k/(L + gamma) per existing class and
/// alpha gamma/(L + gamma) for a new class. In the IGMM kernel labeled points
/// are never moved. Returns the new component id.
int sample_component_indicator(int point, PartitionState& state,
                               const LabelInfo& labels, SamplerContext& ctx,
                               Rng& rng);

/// Log-weights for re-classing an unforced component (I2GMM): for each other
/// class log(#components) + marginal of the component's points under that
/// class's point estimates; for kNewClass log gamma + marginal under the base
/// measure. The component itself is excluded from its current class count.
/// Throws ContractViolation on a forced component.
std::vector<ClassCandidate> class_logweights_for_component(
    int component, const PartitionState& state, const SamplerContext& ctx);

/// Samples a class for the component; forced components keep their class.
int sample_class_indicator(int component, PartitionState& state,
                           SamplerContext& ctx, Rng& rng);

/// One Gibbs scan: component indicators for all points in a fresh random
/// order, then (I2GMM) class indicators for all unforced components.
void gibbs_sweep(PartitionState& state, const LabelInfo& labels,
                 SamplerContext& ctx, Rng& rng);

/// log p(partition, class estimates, data) up to a constant.
double joint_log_posterior(const PartitionState& state, const SamplerContext& ctx);

/// log marginal of a component's points under N(mu_kl, Sigma) with
/// mu_kl ~ N(mu, Sigma / kappa1) and (mu, Sigma) fixed at a class estimate.
double plugin_component_log_marginal(const SuffStats& stats,
                                     const ClassEstimate& est, double kappa1);

/// Gaussian predictive of `x` for an I2GMM component holding `n` points with
/// coordinate sum `sum`, under class estimate `est`.
double component_predictive_logpdf(const Eigen::Ref<const Vector>& x, int n,
                                   const Vector& sum, const ClassEstimate& est,
                                   double kappa1);

/// log of the exchangeable partition probability of a CRP with the given
/// block sizes.
double crp_log_prior(const std::vector<int>& block_sizes, double concentration);

}  // namespace nel
