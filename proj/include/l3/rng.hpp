#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

namespace l3 {

// PCG32 generator with hand-rolled distributions. std::mt19937 is portable
// but the standard distributions are not; everything that must reproduce
// bit-for-bit across toolchains goes through this class instead.
class Rng {
 public:
  Rng() : Rng(0x853c49e6748fea9bULL, 0) {}
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) { reseed(seed, stream); }

  void reseed(std::uint64_t seed, std::uint64_t stream) {
    inc_ = (stream << 1u) | 1u;
    state_ = 0;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on [0, 1), 24 bits of mantissa.
  float uniform() { return static_cast<float>(next_u32() >> 8) * 0x1.0p-24f; }
  float uniform(float a, float b) { return a + (b - a) * uniform(); }

  double uniform_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer on [0, n). Unbiased via rejection.
  int uniform_int(int n) {
    auto bound = static_cast<std::uint32_t>(n);
    std::uint32_t threshold = (-bound) % bound;
    for (;;) {
      std::uint32_t r = next_u32();
      if (r >= threshold) return static_cast<int>(r % bound);
    }
  }

  bool bernoulli(float p) { return uniform() < p; }

  // Box-Muller; draws two uniforms per call, no cached second value.
  float normal() {
    double u1 = uniform_double();
    double u2 = uniform_double();
    while (u1 <= 0.0) u1 = uniform_double();
    return static_cast<float>(std::sqrt(-2.0 * std::log(u1)) *
                              std::cos(2.0 * 3.14159265358979323846 * u2));
  }

  std::array<std::uint64_t, 2> state_words() const { return {state_, inc_}; }
  void set_state_words(const std::array<std::uint64_t, 2>& w) { state_ = w[0]; inc_ = w[1]; }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent child stream keyed off a base seed. Workers, per-purpose
// samplers and per-tensor initializers all derive their streams this way so
// the draw order of one stream never shifts another.
inline Rng derive_rng(std::uint64_t base_seed, std::uint64_t key1, std::uint64_t key2 = 0) {
  std::uint64_t s = splitmix64(base_seed ^ splitmix64(key1));
  std::uint64_t t = splitmix64(s ^ splitmix64(key2 + 0x632be59bd9b4e019ULL));
  return Rng(s, t >> 1);
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace l3
