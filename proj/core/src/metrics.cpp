#include "nel/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "nel/errors.hpp"

namespace nel {

ConfusionMatrix build_confusion(std::span<const int> truth,
                                std::span<const int> predicted,
                                std::span<const int> observed,
                                std::span<const int> evaluation) {
  if (truth.size() != predicted.size()) {
    throw InvalidArgument("confusion: truth and prediction lengths differ");
  }
  if (evaluation.empty()) throw InvalidArgument("confusion: empty evaluation set");
  std::set<int> observed_set(observed.begin(), observed.end());
  if (observed_set.size() != observed.size()) {
    throw InvalidArgument("confusion: duplicate observed class");
  }

  ConfusionMatrix c;
  c.num_observed = static_cast<int>(observed.size());
  c.row_ids.assign(observed.begin(), observed.end());
  c.col_ids.assign(observed.begin(), observed.end());

  std::set<int> other_truth;
  std::unordered_map<int, long> novel_size;
  std::unordered_map<int, std::size_t> novel_first;
  for (std::size_t pos = 0; pos < evaluation.size(); ++pos) {
    const int i = evaluation[pos];
    if (i < 0 || static_cast<std::size_t>(i) >= truth.size()) {
      throw InvalidArgument("confusion: evaluation index out of range");
    }
    if (!observed_set.count(truth[i])) other_truth.insert(truth[i]);
    const int p = predicted[i];
    if (!observed_set.count(p)) {
      ++novel_size[p];
      novel_first.try_emplace(p, pos);
    }
  }
  c.row_ids.insert(c.row_ids.end(), other_truth.begin(), other_truth.end());
  std::vector<int> novel;
  novel.reserve(novel_size.size());
  for (const auto& [id, n] : novel_size) novel.push_back(id);
  std::sort(novel.begin(), novel.end(), [&](int a, int b) {
    if (novel_size[a] != novel_size[b]) return novel_size[a] > novel_size[b];
    return novel_first[a] < novel_first[b];
  });
  c.col_ids.insert(c.col_ids.end(), novel.begin(), novel.end());

  std::unordered_map<int, int> row_of;
  std::unordered_map<int, int> col_of;
  for (std::size_t r = 0; r < c.row_ids.size(); ++r) row_of[c.row_ids[r]] = static_cast<int>(r);
  for (std::size_t j = 0; j < c.col_ids.size(); ++j) col_of[c.col_ids[j]] = static_cast<int>(j);

  c.counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(c.row_ids.size()),
                                   static_cast<Eigen::Index>(c.col_ids.size()));
  for (int i : evaluation) ++c.counts(row_of[truth[i]], col_of[predicted[i]]);
  return c;
}

ConfusionMatrix build_confusion(std::span<const int> truth,
                                std::span<const int> predicted,
                                std::span<const int> observed) {
  std::vector<int> all(truth.size());
  std::iota(all.begin(), all.end(), 0);
  return build_confusion(truth, predicted, observed, all);
}

ConfusionMatrix confusion_from_counts(const Eigen::MatrixXi& counts, int num_observed) {
  if (num_observed < 0 || num_observed > counts.rows() || num_observed > counts.cols()) {
    throw InvalidArgument("confusion: observed count exceeds matrix shape");
  }
  if ((counts.array() < 0).any()) throw InvalidArgument("confusion: negative count");
  ConfusionMatrix c;
  c.counts = counts;
  c.num_observed = num_observed;
  c.row_ids.resize(static_cast<std::size_t>(counts.rows()));
  c.col_ids.resize(static_cast<std::size_t>(counts.cols()));
  std::iota(c.row_ids.begin(), c.row_ids.end(), 0);
  std::iota(c.col_ids.begin(), c.col_ids.end(), 0);
  return c;
}

F1Result mean_f1(const ConfusionMatrix& c) {
  const int K = c.rows();
  const int L = c.cols();
  const int M = c.num_observed;
  F1Result r;
  if (K == 0) return r;
  const Eigen::VectorXd row_sum = c.counts.cast<double>().rowwise().sum();
  const Eigen::VectorXd col_sum = c.counts.cast<double>().colwise().sum().transpose();

  std::map<int, int> uses;
  for (int k = 0; k < K; ++k) {
    int col = -1;
    if (k < M) {
      col = k;
    } else {
      for (int j = M; j < L; ++j) {
        if (col < 0 || c.counts(k, j) > c.counts(k, col)) col = j;
      }
      if (col >= 0) ++uses[col];
    }
    double f1 = 0.0;
    if (col >= 0) {
      const double denom = col_sum[col] + row_sum[k];
      if (denom > 0.0) f1 = 2.0 * c.counts(k, col) / denom;
    }
    r.per_class.push_back(f1);
    r.matched_column.push_back(col);
  }
  for (const auto& [col, n] : uses) {
    if (n > 1) r.shared_columns.push_back(col);
  }
  r.mean = std::accumulate(r.per_class.begin(), r.per_class.end(), 0.0) / K;
  return r;
}

}  // namespace nel
