#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>

namespace lf {

// Deterministic, allocation-free PRNG (xoshiro256++ seeded via splitmix64).
// Randomized components draw from a named sub-stream derived from the
// scenario seed so that reordering one consumer never perturbs another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed0_(seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Stable stream derivation: FNV-1a over the label folded into the seed.
  static std::uint64_t derive(std::uint64_t seed, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    std::uint64_t x = h;
    return splitmix64(x);
  }

  std::uint64_t seed() const { return seed0_; }
  Rng stream(std::string_view label) const { return Rng(derive(seed0_, label)); }
  Rng stream(std::string_view label, std::uint64_t index) const {
    std::uint64_t x = derive(seed0_, label) + 0x9e3779b97f4a7c15ULL * (index + 1);
    return Rng(splitmix64(x));
  }

  std::uint64_t next_u64() {
    std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0,n).
  std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  // Standard normal via Box-Muller (deterministic, no cached spare).
  double gauss() {
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double gauss(double sigma) { return sigma * gauss(); }

  template <typename It>
  void shuffle(It first, It last) {
    auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      auto j = static_cast<decltype(i)>(below(static_cast<std::uint64_t>(i) + 1));
      std::swap(first[i], first[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t s_[4] = {};
  std::uint64_t seed0_ = 0;
};

}  // namespace lf
