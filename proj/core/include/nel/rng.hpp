#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace nel {

/// Seeded pseudo-random source shared by all samplers. One chain owns one Rng.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }
  /// Gamma(shape, scale = 1).
  double gamma(double shape);
  /// Chi-squared with `dof` degrees of freedom.
  double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Child seed for stream `index` of a run seeded with `seed` (splitmix64 of
/// seed combined with index). Used to give repetitions independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

double log_sum_exp(std::span<const double> values);

/// Draws an index with probability proportional to exp(logw[i]).
std::size_t sample_log_categorical(std::span<const double> logw, Rng& rng);

/// Normalized probabilities exp(logw - logsumexp(logw)).
std::vector<double> normalize_log_weights(std::span<const double> logw);

}  // namespace nel
