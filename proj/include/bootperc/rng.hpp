#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace bootperc {

/// Identifier recorded in run manifests and RunRecords. Bump when any draw changes.
inline constexpr std::string_view kRngAlgorithm = "splitmix64-keyed/v1";

/// SplitMix64 output finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derive an independent stream key from a master seed and a path of integer labels.
///
/// Used so that every consumer of randomness (graph blocks, seed sampling, frontier picks,
/// per-source neighbourhoods of the implicit graph, replica k of grid point j) owns a
/// separate, reproducible stream.
constexpr std::uint64_t derive_key(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t k = mix64(seed ^ 0x6a09e667f3bcc909ull);
  for (std::uint64_t label : path) {
    k = mix64(k + 0x9e3779b97f4a7c15ull + mix64(label + 0x3c6ef372fe94f82bull));
  }
  return k;
}

/// SplitMix64 engine. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1].
  double uniform_open_zero() noexcept { return 1.0 - uniform(); }

  /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) noexcept {
    if (bound == 0) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t state_;
};

/// Skip lengths for Bernoulli(p) trials: number of failures before the next success.
///
/// Drawn by inversion, floor(log U / log(1 - p)), so a run of independent Bernoulli(p)
/// trials over a long index range costs O(successes) instead of O(trials).
class GeometricSkipper {
 public:
  explicit GeometricSkipper(double p) noexcept
      : p_(p), inv_log_q_(p > 0.0 && p < 1.0 ? 1.0 / std::log1p(-p) : 0.0) {}

  /// Returns the number of failures before the next success; max() when p == 0.
  std::uint64_t next(SplitMix64& rng) const noexcept {
    if (p_ <= 0.0) return std::numeric_limits<std::uint64_t>::max();
    if (p_ >= 1.0) return 0;
    const double skip = std::floor(std::log(rng.uniform_open_zero()) * inv_log_q_);
    if (!(skip < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(skip);
  }

  double probability() const noexcept { return p_; }

 private:
  double p_;
  double inv_log_q_;
};

}  // namespace bootperc
