#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nel/gibbs.hpp"
#include "nel/hypers.hpp"
#include "nel/partition.hpp"

namespace nel {

enum class Variant { IGMM, I2GMM, AI2GMM };

std::string to_string(Variant v);
/// Accepts "igmm", "i2gmm", "ai2gmm" (case-insensitive).
Variant parse_variant(const std::string& name);

struct NELConfig {
  Variant variant = Variant::AI2GMM;
  int sweeps = 1000;
  int preinference_sweeps = 100;
  double outlier_fraction = 0.20;
  /// Defaults to sweeps / 2.
  std::optional<int> burn_in;
  std::uint64_t seed = 1;
  double alpha = 1.0;
  double gamma = 1.0;
  /// Initial (and, except for AI2GMM, fixed) hyperparameters; defaults to
  /// HyperState::vague(d).
  std::optional<HyperState> hypers;
  /// AI2GMM hyper-priors; defaults to HyperPriorConfig::defaults(d).
  std::optional<HyperPriorConfig> hyper_prior;
  SigmaForm sigma_form = SigmaForm::PosteriorMaximizer;

  int effective_burn_in() const { return burn_in.value_or(sweeps / 2); }
  HyperState initial_hypers(int d) const;
  HyperPriorConfig prior_config(int d) const;
  /// Throws InvalidArgument.
  void validate(int d) const;
};

enum class OutcomeKind { StandardClassification, ComponentDiscovery, NewClassDiscovery };

std::string to_string(OutcomeKind k);

struct RunResult {
  /// Observed classes keep their ids 0..M-1; discovered classes are numbered
  /// M, M+1, ... in order of first appearance.
  std::vector<int> point_class;
  /// Dense component ids in order of first appearance.
  std::vector<int> point_component;
  /// Set for unlabeled points only.
  std::vector<std::optional<OutcomeKind>> outcome;
  std::vector<char> outlier;
  std::vector<double> log_posterior_trace;
  int map_sweep = -1;
  HyperState final_hypers;
  int num_classes = 0;
  int num_components = 0;
  /// Sweeps x restricted points whose class differed from their label.
  long restriction_violations = 0;
  int kappa_clamps = 0;
  std::vector<std::string> notes;
  double runtime_seconds = 0.0;
};

/// Labeled-only component structure produced before the main run.
struct Preinference {
  PartitionState state;
  SamplerContext ctx;
  bool ran = false;
};

/// Fits components to the labeled points of each observed class with class
/// indicators frozen to the labels. Unlabeled points stay unassigned.
Preinference preinference(const Matrix& points, const LabelInfo& labels,
                          const NELConfig& config, Rng& rng);

/// Flags, per observed class, the floor(fraction * class size) labeled points
/// with the lowest leave-one-out class-conditional log-likelihood (the
/// size-weighted mixture of the class's component predictives plus a new
/// component). Ties go to the lower point index.
std::vector<char> flag_outliers(const Preinference& pre, const LabelInfo& labels,
                                double fraction);

/// Per-sweep callback for diagnostics and invariant checks.
using SweepObserver =
    std::function<void(int sweep, const PartitionState&, const LabelInfo&)>;

/// Runs one NEL chain. `labels` holds dense observed ids or kUnlabeled.
RunResult run_nel(const Matrix& points, const std::vector<int>& labels,
                  const NELConfig& config, const SweepObserver& observer = {});

/// Outcome of every unlabeled point given final class/component ids. A
/// component or class "has labeled points" when it holds a labeled point
/// whose label equals that class.
std::vector<std::optional<OutcomeKind>> classify_outcomes(
    std::span<const int> point_class, std::span<const int> point_component,
    const LabelInfo& labels);

struct ChainRecord {
  double log_posterior = 0.0;
  std::vector<int> point_class;
  std::vector<int> point_component;
};

/// Index of the post-burn-in entry with the largest value (first on ties).
/// Throws InvalidArgument when burn_in >= trace.size().
std::size_t select_map_sweep(std::span<const double> trace, int burn_in);

const ChainRecord& final_labels(std::span<const ChainRecord> records, int burn_in);

/// Restricted points whose current class differs from their label.
int count_restriction_violations(const PartitionState& state,
                                 const LabelInfo& labels);

}  // namespace nel
