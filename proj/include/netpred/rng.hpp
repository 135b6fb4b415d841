#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace netpred {

// Deterministic random stream used everywhere randomness is needed.
//
// The generator is the splitmix64 construction: output i of seed s is
// mix64(s + (i+1) * 0x9e3779b97f4a7c15), so the stream is a pure function of
// (seed, counter) and seeds are portable across platforms and bindings.
// Uniform doubles take the top 53 bits; normals come from the Box-Muller
// transform consuming two uniforms per pair.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  // Standard normal; the Box-Muller pair is consumed cosine first.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Independent child seed for sub-streams (per-node CV, parallel chains).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    Rng r(seed ^ (0x9e3779b97f4a7c15ULL * (tag + 1)));
    return r.next_u64();
  }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Seeded Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace netpred
