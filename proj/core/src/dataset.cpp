#include "nel/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nel/distributions.hpp"
#include "nel/errors.hpp"
#include "nel/rng.hpp"

namespace nel {

void SynthConfig::validate() const {
  if (n_classes < 1 || n_components < n_classes || n_points < n_components) {
    throw InvalidArgument(
        "synthetic: need 1 <= classes <= components <= points");
  }
  if (dim < 1) throw InvalidArgument("synthetic: dimension must be positive");
  if (!(gamma > 0.0) || !(alpha > 0.0) || !(kappa0 > 0.0) || !(kappa1 > 0.0)) {
    throw InvalidArgument("synthetic: concentrations and kappas must be positive");
  }
  if (!(m > dim - 1.0)) throw InvalidArgument("synthetic: m must exceed d - 1");
  if (mu0.size() != 0 && mu0.size() != dim) {
    throw InvalidArgument("synthetic: mu0 has the wrong dimension");
  }
  if (psi0.size() != 0 && (psi0.rows() != dim || psi0.cols() != dim)) {
    throw InvalidArgument("synthetic: psi0 has the wrong shape");
  }
  if (max_retries < 1) throw InvalidArgument("synthetic: max_retries must be >= 1");
}

namespace {

std::vector<int> nonempty_allocation(int n, std::size_t bins, double concentration,
                                     int max_retries, Rng& rng, const char* what) {
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    const auto w = sample_symmetric_dirichlet(bins, concentration, rng);
    auto counts = sample_multinomial(n, w, rng);
    if (std::all_of(counts.begin(), counts.end(), [](int c) { return c > 0; })) {
      return counts;
    }
  }
  throw Error(std::string("synthetic: could not allocate ") + what +
              " without empty bins after " + std::to_string(max_retries) +
              " tries");
}

}  // namespace

Dataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const int d = cfg.dim;
  Rng rng(cfg.seed);
  const Vector mu0 = cfg.mu0.size() ? cfg.mu0 : Vector::Zero(d);
  const Matrix psi0 = cfg.psi0.size() ? cfg.psi0 : Matrix::Identity(d, d);

  const auto comps_per_class =
      nonempty_allocation(cfg.n_components, static_cast<std::size_t>(cfg.n_classes),
                          cfg.gamma, cfg.max_retries, rng, "components");
  const auto points_per_comp =
      nonempty_allocation(cfg.n_points, static_cast<std::size_t>(cfg.n_components),
                          cfg.alpha, cfg.max_retries, rng, "points");

  Dataset out;
  out.points.resize(d, cfg.n_points);
  out.class_label.reserve(static_cast<std::size_t>(cfg.n_points));
  out.component_label.reserve(static_cast<std::size_t>(cfg.n_points));

  int comp = 0;
  int col = 0;
  for (int k = 0; k < cfg.n_classes; ++k) {
    const Matrix sigma = sample_inverse_wishart(psi0, cfg.m, rng);
    const Vector mu_k = sample_gaussian(mu0, sigma / cfg.kappa0, rng);
    const Matrix chol = cholesky_lower(sigma);
    out.class_sigma.push_back(sigma);
    for (int l = 0; l < comps_per_class[k]; ++l, ++comp) {
      const Vector mu_kl = sample_gaussian(mu_k, sigma / cfg.kappa1, rng);
      out.component_mean.push_back(mu_kl);
      for (int i = 0; i < points_per_comp[comp]; ++i, ++col) {
        Vector z(d);
        for (int j = 0; j < d; ++j) z[j] = rng.normal();
        out.points.col(col) = mu_kl + chol * z;
        out.class_label.push_back(k);
        out.component_label.push_back(comp);
      }
    }
  }
  return out;
}

ZScore normalize_zscore(Matrix& points) {
  const auto n = points.cols();
  if (n < 2) throw DataError("normalize: need at least two points");
  ZScore z;
  z.mean = points.rowwise().mean();
  points.colwise() -= z.mean;
  z.stddev.resize(points.rows());
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    const double var = points.row(j).squaredNorm() / static_cast<double>(n);
    if (!(var > 0.0)) {
      throw DataError("normalize: feature f" + std::to_string(j) + " is constant");
    }
    z.stddev[j] = std::sqrt(var);
    points.row(j) /= z.stddev[j];
  }
  return z;
}

std::vector<int> SplitSchedule::auto_counts(int num_classes) {
  std::vector<int> out;
  for (int m = 0; m < num_classes; m += 2) out.push_back(m);
  out.push_back(num_classes);
  return out;
}

std::vector<int> SplitSchedule::resolve(int num_classes) const {
  if (!(labeled_fraction >= 0.0) || labeled_fraction > 1.0) {
    throw InvalidArgument("split: labeled fraction must lie in [0, 1]");
  }
  if (observed_counts.empty()) return auto_counts(num_classes);
  for (std::size_t i = 0; i < observed_counts.size(); ++i) {
    const int m = observed_counts[i];
    if (m < 0 || m > num_classes) {
      throw InvalidArgument("split: observed count " + std::to_string(m) +
                            " outside [0, " + std::to_string(num_classes) + "]");
    }
    if (i > 0 && m <= observed_counts[i - 1]) {
      throw InvalidArgument("split: observed counts must be strictly increasing");
    }
  }
  return observed_counts;
}

Split make_split(std::span<const int> truth, const SplitSchedule& schedule,
                 std::uint64_t seed) {
  if (truth.empty()) throw InvalidArgument("split: empty label array");
  int num_classes = 0;
  for (int t : truth) {
    if (t < 0) throw InvalidArgument("split: every point needs a truth label");
    num_classes = std::max(num_classes, t + 1);
  }
  std::vector<std::vector<int>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    members[truth[i]].push_back(static_cast<int>(i));
  }
  const auto counts = schedule.resolve(num_classes);

  Split split;
  split.class_order.resize(static_cast<std::size_t>(num_classes));
  std::iota(split.class_order.begin(), split.class_order.end(), 0);
  std::stable_sort(split.class_order.begin(), split.class_order.end(),
                   [&](int a, int b) { return members[a].size() > members[b].size(); });

  Rng rng(seed);
  std::vector<char> in_pool(truth.size(), 0);
  for (auto& idx : members) {
    if (idx.empty()) continue;
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
    auto take = static_cast<std::size_t>(
        std::llround(schedule.labeled_fraction * static_cast<double>(idx.size())));
    if (schedule.labeled_fraction > 0.0) take = std::max<std::size_t>(take, 1);
    for (std::size_t j = 0; j < take; ++j) in_pool[idx[j]] = 1;
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (in_pool[i]) split.pool.push_back(static_cast<int>(i));
  }

  for (int m : counts) {
    SplitView v;
    v.num_observed = m;
    v.observed_classes.assign(split.class_order.begin(), split.class_order.begin() + m);
    std::vector<int> dense(static_cast<std::size_t>(num_classes), -1);
    for (int j = 0; j < m; ++j) dense[v.observed_classes[j]] = j;
    v.labels.assign(truth.size(), -1);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (in_pool[i] && dense[truth[i]] >= 0) {
        v.labels[i] = dense[truth[i]];
      } else {
        v.evaluation.push_back(static_cast<int>(i));
      }
    }
    split.views.push_back(std::move(v));
  }
  return split;
}

}  // namespace nel
