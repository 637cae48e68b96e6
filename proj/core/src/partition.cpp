#include "nel/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nel/errors.hpp"

namespace nel {

LabelInfo::LabelInfo(std::vector<int> labels)
    : label(std::move(labels)), outlier(label.size(), 0) {
  int max_label = kUnlabeled;
  for (int l : label) {
    if (l < kUnlabeled) throw InvalidArgument("labels: negative class id");
    max_label = std::max(max_label, l);
  }
  num_observed = max_label + 1;
  std::vector<char> seen(static_cast<std::size_t>(num_observed), 0);
  for (int l : label) {
    if (l != kUnlabeled) seen[l] = 1;
  }
  for (int k = 0; k < num_observed; ++k) {
    if (!seen[k]) {
      throw InvalidArgument("labels: observed class ids must be dense, missing " +
                            std::to_string(k));
    }
  }
}

PartitionState::PartitionState(const Matrix& points, double alpha, double gamma,
                               int reserved_classes,
                               std::optional<NIWParams> tracked_prior)
    : points_(&points),
      alpha_(alpha),
      gamma_(gamma),
      reserved_classes_(reserved_classes),
      tracked_prior_(std::move(tracked_prior)),
      point_component_(static_cast<std::size_t>(points.cols()), -1) {
  if (!(alpha > 0.0) || !(gamma > 0.0)) {
    throw InvalidArgument("partition: concentrations must be positive");
  }
  if (reserved_classes < 0) {
    throw InvalidArgument("partition: negative reserved class count");
  }
  if (tracked_prior_) {
    tracked_prior_->validate();
    if (tracked_prior_->dim() != points.rows()) {
      throw InvalidArgument("partition: prior dimension mismatch");
    }
  }
  classes_.resize(static_cast<std::size_t>(reserved_classes));
  class_alive_.assign(static_cast<std::size_t>(reserved_classes), 0);
  class_active_pos_.assign(static_cast<std::size_t>(reserved_classes), -1);
}

int PartitionState::class_of_point(int i) const {
  const int c = point_component_[i];
  return c < 0 ? -1 : components_[c].class_id;
}

int PartitionState::allocate_class_slot(int id_hint) {
  int id = id_hint;
  if (id < 0) {
    if (!free_classes_.empty()) {
      id = free_classes_.back();
      free_classes_.pop_back();
    } else {
      id = static_cast<int>(classes_.size());
      classes_.emplace_back();
      class_alive_.push_back(0);
      class_active_pos_.push_back(-1);
    }
  }
  classes_[id] = ClassInfo{};
  class_alive_[id] = 1;
  class_active_pos_[id] = static_cast<int>(active_classes_.size());
  active_classes_.push_back(id);
  return id;
}

int PartitionState::create_class() { return allocate_class_slot(-1); }

void PartitionState::ensure_observed_class(int id) {
  if (id < 0 || id >= reserved_classes_) {
    throw InvalidArgument("partition: not an observed class id");
  }
  if (!class_alive_[id]) allocate_class_slot(id);
}

int PartitionState::create_component(int class_id) {
  if (!class_alive(class_id)) {
    throw ContractViolation("partition: component created in a dead class");
  }
  int id;
  if (!free_components_.empty()) {
    id = free_components_.back();
    free_components_.pop_back();
  } else {
    id = static_cast<int>(components_.size());
    components_.emplace_back();
    component_alive_.push_back(0);
    component_active_pos_.push_back(-1);
  }
  Component& c = components_[id];
  c = Component{};
  c.stats = SuffStats(dim());
  c.class_id = class_id;
  if (tracked_prior_) c.niw.emplace(*tracked_prior_);
  ClassInfo& k = classes_[class_id];
  c.pos_in_class = static_cast<int>(k.components.size());
  k.components.push_back(id);
  component_alive_[id] = 1;
  component_active_pos_[id] = static_cast<int>(active_components_.size());
  active_components_.push_back(id);
  return id;
}

void PartitionState::assign(int point, int component, const LabelInfo& labels) {
  if (point_component_[point] >= 0) {
    throw ContractViolation("partition: point already assigned");
  }
  if (!component_alive(component)) {
    throw ContractViolation("partition: assignment to a dead component");
  }
  Component& c = components_[component];
  if (labels.is_restricted(point)) {
    const int lab = labels.label[point];
    if (c.class_id != lab) {
      throw ContractViolation(
          "partition: restricted point assigned outside its class");
    }
    ++c.restricted_count;
    c.restricted_label = lab;
  }
  const auto x = points_->col(point);
  c.stats.add(x);
  if (c.niw) c.niw->add(x);
  ++classes_[c.class_id].n_points;
  point_component_[point] = component;
  ++num_assigned_;
}

PartitionState::Removal PartitionState::unassign(int point,
                                                 const LabelInfo& labels) {
  Removal r;
  const int id = point_component_[point];
  if (id < 0) throw ContractViolation("partition: point is not assigned");
  Component& c = components_[id];
  r.component = id;
  r.class_id = c.class_id;
  if (labels.is_restricted(point)) {
    if (--c.restricted_count == 0) c.restricted_label = kUnlabeled;
  }
  const auto x = points_->col(point);
  c.stats.remove(x);
  if (c.niw) {
    if (c.stats.n() == 0) {
      c.niw.emplace(*tracked_prior_);
    } else {
      c.niw->remove(x);
    }
  }
  --classes_[c.class_id].n_points;
  point_component_[point] = -1;
  --num_assigned_;
  if (c.stats.n() == 0) {
    const int k = c.class_id;
    release_component(id);
    r.component_removed = true;
    if (classes_[k].components.empty()) {
      release_class(k);
      r.class_removed = true;
    }
  }
  return r;
}

bool PartitionState::move_component(int component, int new_class) {
  if (!component_alive(component)) {
    throw ContractViolation("partition: moving a dead component");
  }
  if (!class_alive(new_class)) {
    throw ContractViolation("partition: moving into a dead class");
  }
  Component& c = components_[component];
  const int old_class = c.class_id;
  if (old_class == new_class) return false;
  if (c.restricted_count > 0) {
    throw ContractViolation("partition: forced component cannot change class");
  }
  ClassInfo& from = classes_[old_class];
  const int last = from.components.back();
  from.components[c.pos_in_class] = last;
  components_[last].pos_in_class = c.pos_in_class;
  from.components.pop_back();
  from.n_points -= c.stats.n();

  ClassInfo& to = classes_[new_class];
  c.pos_in_class = static_cast<int>(to.components.size());
  to.components.push_back(component);
  to.n_points += c.stats.n();
  c.class_id = new_class;

  if (from.components.empty()) {
    release_class(old_class);
    return true;
  }
  return false;
}

void PartitionState::release_component(int id) {
  Component& c = components_[id];
  ClassInfo& k = classes_[c.class_id];
  const int last = k.components.back();
  k.components[c.pos_in_class] = last;
  components_[last].pos_in_class = c.pos_in_class;
  k.components.pop_back();

  const int pos = component_active_pos_[id];
  const int tail = active_components_.back();
  active_components_[pos] = tail;
  component_active_pos_[tail] = pos;
  active_components_.pop_back();
  component_active_pos_[id] = -1;

  component_alive_[id] = 0;
  c.class_id = -1;
  c.niw.reset();
  free_components_.push_back(id);
}

void PartitionState::release_class(int id) {
  const int pos = class_active_pos_[id];
  const int tail = active_classes_.back();
  active_classes_[pos] = tail;
  class_active_pos_[tail] = pos;
  active_classes_.pop_back();
  class_active_pos_[id] = -1;
  class_alive_[id] = 0;
  classes_[id] = ClassInfo{};
  if (id >= reserved_classes_) free_classes_.push_back(id);
}

namespace {

double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

double PartitionState::max_stats_drift() const {
  std::vector<SuffStats> fresh(components_.size(), SuffStats(dim()));
  for (int i = 0; i < num_points(); ++i) {
    const int c = point_component_[i];
    if (c >= 0) fresh[c].add(points_->col(i));
  }
  double worst = 0.0;
  for (int id : active_components_) {
    const SuffStats& s = components_[id].stats;
    if (s.n() != fresh[id].n()) return INFINITY;
    worst = std::max(worst, rel_diff(s.sum(), fresh[id].sum()));
    worst = std::max(worst, rel_diff(s.scatter(), fresh[id].scatter()));
  }
  return worst;
}

void PartitionState::check_consistency(const LabelInfo& labels,
                                       double tol) const {
  auto fail = [](const std::string& what) {
    throw ContractViolation("partition inconsistent: " + what);
  };
  if (labels.size() != point_component_.size()) fail("label count mismatch");

  std::vector<int> comp_n(components_.size(), 0);
  std::vector<int> comp_restricted(components_.size(), 0);
  for (int i = 0; i < num_points(); ++i) {
    const int c = point_component_[i];
    if (c < 0) continue;
    if (!component_alive(c)) fail("point in dead component");
    ++comp_n[c];
    if (labels.is_restricted(i)) {
      ++comp_restricted[c];
      if (components_[c].class_id != labels.label[i]) {
        std::ostringstream os;
        os << "restricted point " << i << " has class "
           << components_[c].class_id << " but label " << labels.label[i];
        fail(os.str());
      }
    }
  }
  int total = 0;
  for (int id : active_components_) {
    const Component& c = components_[id];
    if (comp_n[id] == 0) fail("empty component " + std::to_string(id));
    if (comp_n[id] != c.stats.n()) fail("component count mismatch");
    if (comp_restricted[id] != c.restricted_count) {
      fail("restricted count mismatch");
    }
    if (!class_alive(c.class_id)) fail("component in dead class");
    const ClassInfo& k = classes_[c.class_id];
    if (c.pos_in_class < 0 ||
        c.pos_in_class >= static_cast<int>(k.components.size()) ||
        k.components[c.pos_in_class] != id) {
      fail("class membership link broken");
    }
    total += comp_n[id];
  }
  if (total != num_assigned_) fail("assigned count mismatch");
  int class_total = 0;
  for (int k : active_classes_) {
    const ClassInfo& info = classes_[k];
    if (info.components.empty()) fail("class without components");
    int n = 0;
    for (int id : info.components) n += components_[id].stats.n();
    if (n != info.n_points) fail("class point count mismatch");
    class_total += n;
  }
  if (class_total != num_assigned_) fail("class totals mismatch");
  if (max_stats_drift() > tol) fail("sufficient statistics drifted");
}

}  // namespace nel
