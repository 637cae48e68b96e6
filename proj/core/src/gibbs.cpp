#include "nel/gibbs.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "nel/distributions.hpp"
#include "nel/errors.hpp"

namespace nel {

namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

using Kind = ComponentCandidate::Kind;

void shuffle(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.index(i);
    std::swap(v[i - 1], v[j]);
  }
}

const ClassEstimate& estimate_or_throw(const SamplerContext& ctx, int k) {
  if (!ctx.hidden.has_class(k)) {
    throw ContractViolation("sampler: class " + std::to_string(k) +
                            " has no point estimate");
  }
  return ctx.hidden.at(k);
}

double existing_component_logpdf(const Eigen::Ref<const Vector>& x,
                                 const Component& c, const ClassEstimate& e,
                                 SamplerContext& ctx) {
  const double k1 = ctx.hypers.kappa1;
  const double n = c.stats.n();
  const double inv = 1.0 / (k1 + n);
  const Vector& sum = c.stats.sum();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    ctx.mean_work(i) = (k1 * e.mu(i) + sum(i)) * inv;
  }
  return log_gaussian_pdf_scaled(x, ctx.mean_work, e.chol, 1.0 + inv, ctx.work);
}

double new_component_logpdf(const Eigen::Ref<const Vector>& x,
                            const ClassEstimate& e, SamplerContext& ctx) {
  return log_gaussian_pdf_scaled(x, e.mu, e.chol, 1.0 + 1.0 / ctx.hypers.kappa1,
                                 ctx.work);
}

bool flat(const SamplerContext& ctx) {
  return ctx.likelihood == LikelihoodMode::Flat;
}

// Appends the I2GMM candidates of class k; `new_comp_prior` is the log prior
// mass of opening a new component there.
void append_class_candidates(const Eigen::Ref<const Vector>& x, int k,
                             double new_comp_prior, const PartitionState& state,
                             SamplerContext& ctx) {
  const ClassEstimate& e = estimate_or_throw(ctx, k);
  for (int l : state.class_info(k).components) {
    const Component& c = state.component(l);
    const double lik = flat(ctx) ? 0.0 : existing_component_logpdf(x, c, e, ctx);
    ctx.candidates.push_back(
        {Kind::Existing, l, k, std::log(static_cast<double>(c.stats.n())) + lik});
  }
  const double lik = flat(ctx) ? 0.0 : new_component_logpdf(x, e, ctx);
  ctx.candidates.push_back({Kind::NewComponent, -1, k, new_comp_prior + lik});
}

double new_class_loglik(const Eigen::Ref<const Vector>& x, SamplerContext& ctx) {
  return flat(ctx) ? 0.0 : ctx.new_class_predictive().predictive_logpdf(x, ctx.work);
}

int draw_and_apply(int point, PartitionState& state, const LabelInfo& labels,
                   SamplerContext& ctx, Rng& rng) {
  ctx.logw.clear();
  for (const auto& c : ctx.candidates) ctx.logw.push_back(c.logw);
  const ComponentCandidate chosen = ctx.candidates[sample_log_categorical(ctx.logw, rng)];
  int comp = chosen.component;
  switch (chosen.kind) {
    case Kind::Existing:
      break;
    case Kind::NewComponent:
      comp = state.create_component(chosen.class_id);
      break;
    case Kind::NewClass: {
      const int k = state.create_class();
      if (ctx.kind == ModelKind::I2GMM) ctx.init_class_estimate(k, state.point(point));
      comp = state.create_component(k);
      break;
    }
  }
  state.assign(point, comp, labels);
  return comp;
}

int sample_igmm(int point, PartitionState& state, const LabelInfo& labels,
                SamplerContext& ctx, Rng& rng) {
  if (labels.is_labeled(point)) return state.component_of(point);
  state.unassign(point, labels);
  const auto x = state.point(point);
  ctx.candidates.clear();
  for (int k : state.active_classes()) {
    const int l = state.class_info(k).components.front();
    const Component& c = state.component(l);
    const double lik = flat(ctx) ? 0.0 : c.niw->predictive_logpdf(x, ctx.work);
    ctx.candidates.push_back(
        {Kind::Existing, l, k, std::log(static_cast<double>(c.stats.n())) + lik});
  }
  ctx.candidates.push_back(
      {Kind::NewClass, -1, kNewClass, std::log(state.alpha()) + new_class_loglik(x, ctx)});
  return draw_and_apply(point, state, labels, ctx, rng);
}

int sample_i2gmm(int point, PartitionState& state, const LabelInfo& labels,
                 SamplerContext& ctx, Rng& rng) {
  state.unassign(point, labels);
  const auto x = state.point(point);
  const double log_alpha = std::log(state.alpha());
  const double log_gamma = std::log(state.gamma());
  const double log_norm = std::log(state.num_components() + state.gamma());
  auto new_comp_prior = [&](int k) {
    const auto m = state.class_info(k).components.size();
    return log_alpha + (m > 0 ? std::log(static_cast<double>(m)) : log_gamma) -
           log_norm;
  };
  ctx.candidates.clear();
  if (labels.is_restricted(point)) {
    const int k = labels.label[point];
    if (!state.class_alive(k)) {
      state.ensure_observed_class(k);
      if (!ctx.hidden.has_class(k)) ctx.init_class_estimate(k, x);
    }
    append_class_candidates(x, k, new_comp_prior(k), state, ctx);
  } else {
    for (int k : state.active_classes()) {
      append_class_candidates(x, k, new_comp_prior(k), state, ctx);
    }
    ctx.candidates.push_back({Kind::NewClass, -1, kNewClass,
                              log_alpha + log_gamma - log_norm + new_class_loglik(x, ctx)});
  }
  return draw_and_apply(point, state, labels, ctx, rng);
}

void require_estimates(const PartitionState& state, const SamplerContext& ctx) {
  if (ctx.kind != ModelKind::I2GMM) return;
  for (int k : state.active_classes()) estimate_or_throw(ctx, k);
}

}  // namespace

SamplerContext::SamplerContext(ModelKind kind_, HyperState hypers_,
                               LikelihoodMode likelihood_)
    : kind(kind_), hypers(std::move(hypers_)), likelihood(likelihood_) {
  prepare();
}

void SamplerContext::prepare() {
  hypers.validate();
  const int d = hypers.dim();
  work.resize(d);
  mean_work.resize(d);
  new_class_predictive_ = NiwPosterior(kind == ModelKind::IGMM
                                           ? hypers.class_prior()
                                           : hypers.new_class_component_prior());
}

void SamplerContext::refresh(const PartitionState& state) {
  if (kind == ModelKind::I2GMM) {
    hidden = refresh_hidden_estimates(state, hypers, sigma_form);
  }
  prepare();
}

void SamplerContext::init_class_estimate(int class_id, const Vector& mu) {
  const int d = hypers.dim();
  hidden.set_class(class_id, mu, hypers.psi0 / (hypers.m + d + 1.0));
}

PartitionState make_igmm_partition(const Matrix& points, const HyperState& hypers,
                                   double alpha, int reserved_classes) {
  return PartitionState(points, alpha, 1.0, reserved_classes, hypers.class_prior());
}

std::vector<ComponentCandidate> crp_component_logweights(
    const Eigen::Ref<const Vector>& x, int cls, const PartitionState& state,
    SamplerContext& ctx) {
  if (x.size() != state.dim()) {
    throw InvalidArgument("component weights: dimension mismatch");
  }
  const double log_alpha = std::log(state.alpha());
  std::vector<ComponentCandidate> out;
  if (cls == kNewClass) {
    out.push_back({Kind::NewClass, -1, kNewClass, log_alpha + new_class_loglik(x, ctx)});
    return out;
  }
  if (!state.class_alive(cls)) {
    throw InvalidArgument("component weights: unknown class " + std::to_string(cls));
  }
  if (ctx.kind == ModelKind::IGMM) {
    for (int l : state.class_info(cls).components) {
      const Component& c = state.component(l);
      const double lik = flat(ctx) ? 0.0 : c.niw->predictive_logpdf(x, ctx.work);
      out.push_back({Kind::Existing, l, cls,
                     std::log(static_cast<double>(c.stats.n())) + lik});
    }
    return out;
  }
  ctx.candidates.clear();
  append_class_candidates(x, cls, log_alpha, state, ctx);
  out = ctx.candidates;
  return out;
}

int sample_component_indicator(int point, PartitionState& state,
                               const LabelInfo& labels, SamplerContext& ctx,
                               Rng& rng) {
  if (point < 0 || point >= state.num_points()) {
    throw InvalidArgument("component sampler: point index out of range");
  }
  return ctx.kind == ModelKind::IGMM ? sample_igmm(point, state, labels, ctx, rng)
                                     : sample_i2gmm(point, state, labels, ctx, rng);
}

double plugin_component_log_marginal(const SuffStats& stats,
                                     const ClassEstimate& est, double kappa1) {
  const int d = stats.dim();
  const double n = stats.n();
  if (n == 0) return 0.0;
  const Vector delta = stats.mean() - est.mu;
  const double trace = (est.precision.cwiseProduct(stats.scatter())).sum();
  const double q = delta.dot(est.precision * delta);
  return -0.5 * n * d * kLog2Pi - 0.5 * n * est.chol.log_det() - 0.5 * trace +
         0.5 * d * std::log(kappa1 / (kappa1 + n)) -
         0.5 * (kappa1 * n / (kappa1 + n)) * q;
}

double component_predictive_logpdf(const Eigen::Ref<const Vector>& x, int n,
                                   const Vector& sum, const ClassEstimate& est,
                                   double kappa1) {
  const double inv = 1.0 / (kappa1 + n);
  const Vector mean = (kappa1 * est.mu + sum) * inv;
  Vector work(x.size());
  return log_gaussian_pdf_scaled(x, mean, est.chol, 1.0 + inv, work);
}

std::vector<ClassCandidate> class_logweights_for_component(
    int component, const PartitionState& state, const SamplerContext& ctx) {
  if (ctx.kind != ModelKind::I2GMM) {
    throw ContractViolation("class weights: IGMM has no class layer");
  }
  if (!state.component_alive(component)) {
    throw InvalidArgument("class weights: unknown component");
  }
  const Component& c = state.component(component);
  if (c.restricted_count > 0) {
    throw ContractViolation("class weights: component is forced to class " +
                            std::to_string(c.class_id));
  }
  std::vector<ClassCandidate> out;
  for (int k : state.active_classes()) {
    const auto m = static_cast<double>(state.class_info(k).components.size()) -
                   (k == c.class_id ? 1.0 : 0.0);
    if (m <= 0.0) continue;
    double lik = 0.0;
    if (!flat(ctx)) {
      lik = plugin_component_log_marginal(c.stats, estimate_or_throw(ctx, k),
                                          ctx.hypers.kappa1);
    }
    out.push_back({k, std::log(m) + lik});
  }
  const double lik =
      flat(ctx) ? 0.0 : log_niw_marginal(c.stats, ctx.hypers.new_class_component_prior());
  out.push_back({kNewClass, std::log(state.gamma()) + lik});
  return out;
}

int sample_class_indicator(int component, PartitionState& state,
                           SamplerContext& ctx, Rng& rng) {
  const Component& c = state.component(component);
  const int own = c.class_id;
  if (c.restricted_count > 0) return own;
  const auto cands = class_logweights_for_component(component, state, ctx);
  ctx.logw.clear();
  for (const auto& cc : cands) ctx.logw.push_back(cc.logw);
  const int chosen = cands[sample_log_categorical(ctx.logw, rng)].class_id;
  if (chosen == own) return own;
  if (chosen == kNewClass) {
    // A sole component re-drawing a fresh class keeps its current one.
    if (state.class_info(own).components.size() == 1) return own;
    const int k = state.create_class();
    ctx.init_class_estimate(k, state.component(component).stats.mean());
    state.move_component(component, k);
    return k;
  }
  state.move_component(component, chosen);
  return chosen;
}

void gibbs_sweep(PartitionState& state, const LabelInfo& labels,
                 SamplerContext& ctx, Rng& rng) {
  if (static_cast<int>(labels.size()) != state.num_points()) {
    throw ContractViolation("gibbs sweep: label count mismatch");
  }
  if (state.num_assigned() != state.num_points()) {
    throw ContractViolation("gibbs sweep: unassigned points in state");
  }
  require_estimates(state, ctx);

  std::vector<int> order(static_cast<std::size_t>(state.num_points()));
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  for (int i : order) sample_component_indicator(i, state, labels, ctx, rng);

  if (ctx.kind == ModelKind::I2GMM) {
    std::vector<int> comps = state.active_components();
    shuffle(comps, rng);
    for (int l : comps) {
      if (state.component_alive(l)) sample_class_indicator(l, state, ctx, rng);
    }
  }
}

double crp_log_prior(const std::vector<int>& block_sizes, double concentration) {
  double n = 0.0;
  double lp = std::lgamma(concentration);
  for (int s : block_sizes) {
    if (s <= 0) continue;
    n += s;
    lp += std::log(concentration) + std::lgamma(static_cast<double>(s));
  }
  return lp - std::lgamma(n + concentration);
}

double joint_log_posterior(const PartitionState& state, const SamplerContext& ctx) {
  std::vector<int> sizes;
  double lp = 0.0;
  if (ctx.kind == ModelKind::IGMM) {
    for (int l : state.active_components()) {
      const Component& c = state.component(l);
      sizes.push_back(c.stats.n());
      if (!flat(ctx)) lp += c.niw->log_marginal();
    }
    return lp + crp_log_prior(sizes, state.alpha());
  }
  require_estimates(state, ctx);
  for (int l : state.active_components()) sizes.push_back(state.component(l).stats.n());
  lp += crp_log_prior(sizes, state.alpha());
  sizes.clear();
  for (int k : state.active_classes()) {
    sizes.push_back(static_cast<int>(state.class_info(k).components.size()));
  }
  lp += crp_log_prior(sizes, state.gamma());
  if (flat(ctx)) return lp;
  for (int k : state.active_classes()) {
    const ClassEstimate& e = ctx.hidden.at(k);
    lp += log_gaussian_pdf(e.mu, ctx.hypers.mu0, e.sigma / ctx.hypers.kappa0) +
          log_inverse_wishart_pdf(e.sigma, ctx.hypers.psi0, ctx.hypers.m);
    for (int l : state.class_info(k).components) {
      lp += plugin_component_log_marginal(state.component(l).stats, e,
                                          ctx.hypers.kappa1);
    }
  }
  return lp;
}

}  // namespace nel
