#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace fdvae::num {

// SplitMix64 finaliser; used to expand seeds and to hash seed components.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Order-sensitive combination of two 64-bit words into a fresh seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t component) noexcept;

// FNV-1a of a tag string, so streams can be named ("coefficients", "rows").
std::uint64_t tag_hash(std::string_view tag) noexcept;

// PCG XSL-RR 128/64 generator.
//
// Stream splitting: Pcg64::derive(seed, tag) seeds the state with
// mix_seed(seed, tag) and selects the PCG increment from tag, so two derived
// generators with different tags never share a stream. Normal variates come
// from the Box-Muller transform with the second value cached; every consumer
// in this project goes through these members so sequences are identical
// across standard libraries.
class Pcg64 {
 public:
  using result_type = std::uint64_t;

  explicit Pcg64(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept;

  static Pcg64 derive(std::uint64_t seed, std::uint64_t tag) noexcept;
  static Pcg64 derive(std::uint64_t seed, std::string_view tag) noexcept {
    return derive(seed, tag_hash(tag));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Unbiased integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;
  double normal() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  unsigned __int128 state_;
  unsigned __int128 inc_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;

  void step() noexcept;
};

}  // namespace fdvae::num
