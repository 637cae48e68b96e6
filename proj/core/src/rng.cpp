#include "nel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "nel/errors.hpp"

namespace nel {

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw InvalidArgument("gamma: shape must be positive");
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

std::size_t Rng::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double mx = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double v : values) s += std::exp(v - mx);
  return mx + std::log(s);
}

std::size_t sample_log_categorical(std::span<const double> logw, Rng& rng) {
  if (logw.empty()) throw InvalidArgument("categorical: no candidates");
  const double mx = *std::max_element(logw.begin(), logw.end());
  if (!std::isfinite(mx)) {
    throw InvalidArgument("categorical: no finite log-weight");
  }
  double total = 0.0;
  for (double v : logw) total += std::exp(v - mx);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    u -= std::exp(logw[i] - mx);
    if (u < 0.0) return i;
  }
  // Rounding left a sliver; return the last candidate with nonzero mass.
  for (std::size_t i = logw.size(); i-- > 0;) {
    if (std::isfinite(logw[i])) return i;
  }
  return logw.size() - 1;
}

std::vector<double> normalize_log_weights(std::span<const double> logw) {
  const double z = log_sum_exp(logw);
  std::vector<double> p(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) p[i] = std::exp(logw[i] - z);
  return p;
}

}  // namespace nel
