#include "fdvae/numerics/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace fdvae::num {

namespace {
constexpr unsigned __int128 kMultiplier =
    (static_cast<unsigned __int128>(0x2360ED051FC65DA4ULL) << 64) | 0x4385DF649FCCF645ULL;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t component) noexcept {
  return splitmix64(splitmix64(seed) ^ (component + 0x632BE59BD9B4E019ULL + (seed << 6) + (seed >> 2)));
}

std::uint64_t tag_hash(std::string_view tag) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

Pcg64::Pcg64(std::uint64_t seed, std::uint64_t stream) noexcept {
  const unsigned __int128 s =
      (static_cast<unsigned __int128>(splitmix64(seed)) << 64) | splitmix64(seed ^ 0xA5A5A5A5A5A5A5A5ULL);
  const unsigned __int128 st =
      (static_cast<unsigned __int128>(splitmix64(stream)) << 64) | stream;
  state_ = 0;
  inc_ = (st << 1) | 1u;
  step();
  state_ += s;
  step();
}

Pcg64 Pcg64::derive(std::uint64_t seed, std::uint64_t tag) noexcept {
  return Pcg64(mix_seed(seed, tag), tag);
}

void Pcg64::step() noexcept { state_ = state_ * kMultiplier + inc_; }

Pcg64::result_type Pcg64::operator()() noexcept {
  step();
  const auto hi = static_cast<std::uint64_t>(state_ >> 64);
  const auto lo = static_cast<std::uint64_t>(state_);
  return std::rotr(hi ^ lo, static_cast<int>(hi >> 58));
}

double Pcg64::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t Pcg64::below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = (*this)();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<unsigned __int128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Pcg64::normal() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

}  // namespace fdvae::num
