#include "nel/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "nel/distributions.hpp"
#include "nel/errors.hpp"

namespace nel {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::IGMM: return "igmm";
    case Variant::I2GMM: return "i2gmm";
    case Variant::AI2GMM: return "ai2gmm";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "igmm") return Variant::IGMM;
  if (s == "i2gmm") return Variant::I2GMM;
  if (s == "ai2gmm") return Variant::AI2GMM;
  throw InvalidArgument("unknown model variant '" + name + "'");
}

std::string to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::StandardClassification: return "standard";
    case OutcomeKind::ComponentDiscovery: return "component_discovery";
    case OutcomeKind::NewClassDiscovery: return "new_class";
  }
  return "unknown";
}

HyperState NELConfig::initial_hypers(int d) const {
  return hypers.value_or(HyperState::vague(d));
}

HyperPriorConfig NELConfig::prior_config(int d) const {
  return hyper_prior.value_or(HyperPriorConfig::defaults(d));
}

void NELConfig::validate(int d) const {
  if (sweeps <= 0) throw InvalidArgument("config: sweeps must be positive");
  if (preinference_sweeps < 0) {
    throw InvalidArgument("config: preinference sweeps must be >= 0");
  }
  const int b = effective_burn_in();
  if (b < 0 || b >= sweeps) {
    throw InvalidArgument("config: burn-in must satisfy 0 <= burn_in < sweeps");
  }
  if (!(outlier_fraction >= 0.0) || !(outlier_fraction < 1.0)) {
    throw InvalidArgument("config: outlier fraction must lie in [0, 1)");
  }
  if (!(alpha > 0.0) || !(gamma > 0.0)) {
    throw InvalidArgument("config: concentrations must be positive");
  }
  const HyperState h = initial_hypers(d);
  if (h.dim() != d) throw InvalidArgument("config: hyperparameter dimension mismatch");
  h.validate();
  if (variant == Variant::AI2GMM) {
    const HyperPriorConfig p = prior_config(d);
    if (p.dim() != d) throw InvalidArgument("config: hyper-prior dimension mismatch");
    p.validate();
  }
}

namespace {

ModelKind kernel_of(Variant v) {
  return v == Variant::IGMM ? ModelKind::IGMM : ModelKind::I2GMM;
}

void shuffle(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.index(i)]);
}

}  // namespace

Preinference preinference(const Matrix& points, const LabelInfo& labels,
                          const NELConfig& config, Rng& rng) {
  const int d = static_cast<int>(points.rows());
  Preinference pre{PartitionState(points, config.alpha, config.gamma, labels.num_observed),
                   SamplerContext(ModelKind::I2GMM, config.initial_hypers(d)), false};
  pre.ctx.sigma_form = config.sigma_form;

  LabelInfo frozen = labels;
  std::fill(frozen.outlier.begin(), frozen.outlier.end(), 0);

  std::vector<int> labeled;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels.is_labeled(i)) labeled.push_back(static_cast<int>(i));
  }
  if (labeled.empty()) return pre;

  std::vector<int> seed_component(static_cast<std::size_t>(labels.num_observed), -1);
  for (int i : labeled) {
    const int k = labels.label[i];
    if (seed_component[k] < 0) {
      pre.state.ensure_observed_class(k);
      seed_component[k] = pre.state.create_component(k);
    }
    pre.state.assign(i, seed_component[k], frozen);
  }
  pre.ctx.refresh(pre.state);
  for (int s = 0; s < config.preinference_sweeps; ++s) {
    shuffle(labeled, rng);
    for (int i : labeled) sample_component_indicator(i, pre.state, frozen, pre.ctx, rng);
    pre.ctx.refresh(pre.state);
  }
  pre.ran = true;
  return pre;
}

std::vector<char> flag_outliers(const Preinference& pre, const LabelInfo& labels,
                                double fraction) {
  if (!(fraction >= 0.0) || !(fraction < 1.0)) {
    throw InvalidArgument("outliers: fraction must lie in [0, 1)");
  }
  std::vector<char> flags(labels.size(), 0);
  if (!pre.ran || fraction == 0.0) return flags;

  const PartitionState& state = pre.state;
  const double k1 = pre.ctx.hypers.kappa1;
  const double alpha = state.alpha();
  Vector work(state.dim());

  std::vector<std::vector<std::pair<double, int>>> per_class(
      static_cast<std::size_t>(labels.num_observed));
  for (std::size_t idx = 0; idx < labels.size(); ++idx) {
    if (!labels.is_labeled(idx)) continue;
    const int i = static_cast<int>(idx);
    const int own = state.component_of(i);
    const int k = state.component(own).class_id;
    const ClassEstimate& est = pre.ctx.hidden.at(k);
    const auto x = state.point(i);
    const double n_rest = state.class_info(k).n_points - 1.0;
    const double norm = std::log(n_rest + alpha);

    std::vector<double> terms;
    for (int l : state.class_info(k).components) {
      const SuffStats& s = state.component(l).stats;
      int n = s.n();
      Vector sum = s.sum();
      if (l == own) {
        --n;
        sum -= x;
      }
      if (n == 0) continue;
      terms.push_back(std::log(static_cast<double>(n)) - norm +
                      component_predictive_logpdf(x, n, sum, est, k1));
    }
    terms.push_back(std::log(alpha) - norm +
                    log_gaussian_pdf_scaled(x, est.mu, est.chol, 1.0 + 1.0 / k1, work));
    per_class[k].emplace_back(log_sum_exp(terms), i);
  }
  for (auto& members : per_class) {
    std::stable_sort(members.begin(), members.end(),
                     [](const auto& a, const auto& b) {
                       if (a.first != b.first) return a.first < b.first;
                       return a.second < b.second;
                     });
    const auto count = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(members.size())));
    for (std::size_t j = 0; j < count; ++j) flags[members[j].second] = 1;
  }
  return flags;
}

int count_restriction_violations(const PartitionState& state,
                                 const LabelInfo& labels) {
  int bad = 0;
  for (int i = 0; i < state.num_points(); ++i) {
    if (labels.is_restricted(i) && state.class_of_point(i) != labels.label[i]) ++bad;
  }
  return bad;
}

std::vector<std::optional<OutcomeKind>> classify_outcomes(
    std::span<const int> point_class, std::span<const int> point_component,
    const LabelInfo& labels) {
  const std::size_t n = labels.size();
  if (point_class.size() != n || point_component.size() != n) {
    throw InvalidArgument("outcomes: size mismatch");
  }
  std::unordered_map<int, bool> comp_labeled;
  std::unordered_map<int, bool> class_labeled;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels.is_labeled(i) && labels.label[i] == point_class[i]) {
      comp_labeled[point_component[i]] = true;
      class_labeled[point_class[i]] = true;
    }
  }
  std::vector<std::optional<OutcomeKind>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels.is_labeled(i)) continue;
    if (comp_labeled.count(point_component[i])) {
      out[i] = OutcomeKind::StandardClassification;
    } else if (class_labeled.count(point_class[i])) {
      out[i] = OutcomeKind::ComponentDiscovery;
    } else {
      out[i] = OutcomeKind::NewClassDiscovery;
    }
  }
  return out;
}

std::size_t select_map_sweep(std::span<const double> trace, int burn_in) {
  if (burn_in < 0 || static_cast<std::size_t>(burn_in) >= trace.size()) {
    throw InvalidArgument("final labels: burn-in leaves no recorded sweep");
  }
  std::size_t best = static_cast<std::size_t>(burn_in);
  for (std::size_t s = best + 1; s < trace.size(); ++s) {
    if (trace[s] > trace[best]) best = s;
  }
  return best;
}

const ChainRecord& final_labels(std::span<const ChainRecord> records, int burn_in) {
  std::vector<double> trace;
  trace.reserve(records.size());
  for (const auto& r : records) trace.push_back(r.log_posterior);
  return records[select_map_sweep(trace, burn_in)];
}

namespace {

void validate_inputs(const Matrix& points, const std::vector<int>& labels) {
  if (points.cols() == 0) throw InvalidArgument("run: empty dataset");
  if (points.rows() == 0) throw InvalidArgument("run: zero-dimensional data");
  if (static_cast<Eigen::Index>(labels.size()) != points.cols()) {
    throw InvalidArgument("run: label count does not match point count");
  }
  if (!points.allFinite()) throw InvalidArgument("run: non-finite coordinates");
}

// Observed ids stay; other classes and all components are renumbered densely
// in order of first appearance.
void densify(const std::vector<int>& raw_class, const std::vector<int>& raw_comp,
             int num_observed, RunResult& out) {
  std::unordered_map<int, int> class_map;
  std::unordered_map<int, int> comp_map;
  int next_class = num_observed;
  const std::size_t n = raw_class.size();
  out.point_class.resize(n);
  out.point_component.resize(n);
  std::vector<char> observed_seen(static_cast<std::size_t>(num_observed), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = raw_class[i];
    if (k < num_observed) {
      out.point_class[i] = k;
      observed_seen[k] = 1;
    } else {
      auto [it, inserted] = class_map.try_emplace(k, next_class);
      if (inserted) ++next_class;
      out.point_class[i] = it->second;
    }
    auto [it, inserted] =
        comp_map.try_emplace(raw_comp[i], static_cast<int>(comp_map.size()));
    out.point_component[i] = it->second;
  }
  out.num_classes = static_cast<int>(class_map.size()) +
                    static_cast<int>(std::count(observed_seen.begin(), observed_seen.end(), 1));
  out.num_components = static_cast<int>(comp_map.size());
}

}  // namespace

RunResult run_nel(const Matrix& points, const std::vector<int>& labels,
                  const NELConfig& config, const SweepObserver& observer) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_inputs(points, labels);
  const int d = static_cast<int>(points.rows());
  const int n = static_cast<int>(points.cols());
  config.validate(d);

  RunResult out;
  LabelInfo info(labels);
  const int num_observed = info.num_observed;
  Rng rng(config.seed);
  const ModelKind kind = kernel_of(config.variant);
  const HyperPriorConfig prior = config.prior_config(d);

  SamplerContext ctx(kind, config.initial_hypers(d));
  ctx.sigma_form = config.sigma_form;

  const bool any_labeled = num_observed > 0;
  std::optional<Preinference> pre;
  if (config.variant != Variant::IGMM) {
    if (any_labeled) {
      pre.emplace(preinference(points, info, config, rng));
      info.outlier = flag_outliers(*pre, info, config.outlier_fraction);
    } else {
      out.notes.emplace_back("no labeled points: pre-inference skipped");
    }
  }
  out.outlier = info.outlier;

  PartitionState state =
      kind == ModelKind::IGMM
          ? make_igmm_partition(points, ctx.hypers, config.alpha, num_observed)
          : PartitionState(points, config.alpha, config.gamma, num_observed);

  // Labeled points: one component per class, or the pre-inference layout.
  std::unordered_map<int, int> comp_map;
  std::vector<int> class_seed(static_cast<std::size_t>(num_observed), -1);
  for (int i = 0; i < n; ++i) {
    if (!info.is_labeled(i)) continue;
    const int k = info.label[i];
    state.ensure_observed_class(k);
    int comp;
    if (pre) {
      const int src = pre->state.component_of(i);
      auto it = comp_map.find(src);
      if (it == comp_map.end()) {
        it = comp_map.emplace(src, state.create_component(k)).first;
      }
      comp = it->second;
    } else {
      if (class_seed[k] < 0) class_seed[k] = state.create_component(k);
      comp = class_seed[k];
    }
    state.assign(i, comp, info);
  }
  // Unlabeled points start together in one provisional class.
  int provisional = -1;
  for (int i = 0; i < n; ++i) {
    if (info.is_labeled(i)) continue;
    if (provisional < 0) provisional = state.create_component(state.create_class());
    state.assign(i, provisional, info);
  }

  ctx.refresh(state);
  const int burn_in = config.effective_burn_in();
  double best_lp = -INFINITY;
  std::vector<int> best_class;
  std::vector<int> best_comp;
  HyperState best_hypers = ctx.hypers;
  out.log_posterior_trace.reserve(static_cast<std::size_t>(config.sweeps));

  for (int s = 0; s < config.sweeps; ++s) {
    if (config.variant == Variant::AI2GMM) {
      const HyperUpdate upd = update_hypers(make_hierarchy(state, ctx.hidden), ctx.hypers, prior);
      ctx.hypers = upd.hypers;
      out.kappa_clamps += upd.clamped;
      ctx.refresh(state);
    }
    gibbs_sweep(state, info, ctx, rng);
    ctx.refresh(state);

    const double lp = joint_log_posterior(state, ctx);
    out.log_posterior_trace.push_back(lp);
    out.restriction_violations += count_restriction_violations(state, info);
    if (s >= burn_in && (best_class.empty() || lp > best_lp)) {
      best_lp = lp;
      out.map_sweep = s;
      best_class.resize(static_cast<std::size_t>(n));
      best_comp.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        best_comp[i] = state.component_of(i);
        best_class[i] = state.class_of_point(i);
      }
      best_hypers = ctx.hypers;
    }
    if (observer) observer(s, state, info);
  }

  densify(best_class, best_comp, num_observed, out);
  out.outcome = classify_outcomes(out.point_class, out.point_component, info);
  out.final_hypers = best_hypers;
  out.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace nel
