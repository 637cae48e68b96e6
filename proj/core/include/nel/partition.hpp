#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nel/stats.hpp"

namespace nel {

inline constexpr int kUnlabeled = -1;

/// Per-point observed labels plus the outlier flags set after pre-inference.
///
/// Observed class ids are dense: 0 .. num_observed-1. A labeled point that is
/// not flagged as an outlier is "restricted": its class never changes.
struct LabelInfo {
  std::vector<int> label;
  std::vector<char> outlier;
  int num_observed = 0;

  LabelInfo() = default;
  /// Validates ids and derives num_observed; throws InvalidArgument.
  explicit LabelInfo(std::vector<int> labels);

  std::size_t size() const { return label.size(); }
  bool is_labeled(std::size_t i) const { return label[i] != kUnlabeled; }
  bool is_restricted(std::size_t i) const {
    return label[i] != kUnlabeled && !outlier[i];
  }
};

struct Component {
  SuffStats stats;
  int class_id = -1;
  /// Number of restricted (non-outlier labeled) points currently assigned.
  int restricted_count = 0;
  /// Label shared by those points; meaningful when restricted_count > 0.
  int restricted_label = kUnlabeled;
  /// Incremental NIW posterior, present when the state tracks a prior.
  std::optional<NiwPosterior> niw;
  int pos_in_class = -1;
};

struct ClassInfo {
  std::vector<int> components;
  int n_points = 0;
};

/// Markov-chain state of the two-layer mixture: a component indicator per
/// point, a class indicator per component, and the concentrations.
///
/// Component and class ids are slot indices and are recycled after the slot
/// empties. Class ids below `reserved_classes` belong to observed classes and
/// are never handed out to newly discovered classes.
///
/// The state keeps a non-owning pointer to the data matrix (d x N, one point
/// per column); the matrix must outlive the state and every copy of it.
class PartitionState {
 public:
  PartitionState() = default;
  PartitionState(const Matrix& points, double alpha, double gamma,
                 int reserved_classes = 0,
                 std::optional<NIWParams> tracked_prior = std::nullopt);

  int num_points() const { return static_cast<int>(point_component_.size()); }
  int dim() const { return static_cast<int>(points_->rows()); }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  int reserved_classes() const { return reserved_classes_; }
  const Matrix& points() const { return *points_; }
  auto point(int i) const { return points_->col(i); }

  /// -1 when the point is currently unassigned.
  int component_of(int i) const { return point_component_[i]; }
  int class_of_point(int i) const;
  int num_assigned() const { return num_assigned_; }

  bool component_alive(int id) const {
    return id >= 0 && id < static_cast<int>(components_.size()) &&
           component_alive_[id];
  }
  bool class_alive(int id) const {
    return id >= 0 && id < static_cast<int>(classes_.size()) &&
           class_alive_[id];
  }
  const Component& component(int id) const { return components_[id]; }
  const ClassInfo& class_info(int id) const { return classes_[id]; }
  const std::vector<int>& active_components() const { return active_components_; }
  const std::vector<int>& active_classes() const { return active_classes_; }
  int num_components() const { return static_cast<int>(active_components_.size()); }
  int num_classes() const { return static_cast<int>(active_classes_.size()); }
  /// Upper bound on ids ever issued; sizes per-id side tables.
  int component_capacity() const { return static_cast<int>(components_.size()); }
  int class_capacity() const { return static_cast<int>(classes_.size()); }
  bool tracks_niw() const { return tracked_prior_.has_value(); }
  const std::optional<NIWParams>& tracked_prior() const { return tracked_prior_; }

  /// Creates an empty class (id >= reserved_classes).
  int create_class();
  /// Revives reserved observed class `id` if it is not alive.
  void ensure_observed_class(int id);
  /// Creates an empty component in `class_id`.
  int create_component(int class_id);

  void assign(int point, int component, const LabelInfo& labels);

  struct Removal {
    int component = -1;
    int class_id = -1;
    bool component_removed = false;
    bool class_removed = false;
  };
  /// Takes the point out of its component; empty components and classes are
  /// released immediately.
  Removal unassign(int point, const LabelInfo& labels);

  /// Moves a whole component to another live class; the old class is
  /// released if left without components. Returns true in that case.
  bool move_component(int component, int new_class);

  /// Throws ContractViolation describing the first broken invariant:
  /// counts, class links, restriction rule, and SuffStats vs. raw points
  /// (relative tolerance `tol`).
  void check_consistency(const LabelInfo& labels, double tol = 1e-9) const;

  /// Largest relative deviation between maintained SuffStats and statistics
  /// recomputed from the raw assignments.
  double max_stats_drift() const;

 private:
  void release_component(int id);
  void release_class(int id);
  int allocate_class_slot(int id_hint);

  const Matrix* points_ = nullptr;
  double alpha_ = 1.0;
  double gamma_ = 1.0;
  int reserved_classes_ = 0;
  std::optional<NIWParams> tracked_prior_;

  std::vector<int> point_component_;
  int num_assigned_ = 0;

  std::vector<Component> components_;
  std::vector<char> component_alive_;
  std::vector<int> free_components_;
  std::vector<int> active_components_;
  std::vector<int> component_active_pos_;

  std::vector<ClassInfo> classes_;
  std::vector<char> class_alive_;
  std::vector<int> free_classes_;
  std::vector<int> active_classes_;
  std::vector<int> class_active_pos_;
};

}  // namespace nel
