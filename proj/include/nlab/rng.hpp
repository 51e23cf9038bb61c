#pragma once

#include <cstdint>

namespace nlab {

// xoshiro256++, seeded via splitmix64. Named, versioned generator
// ("xoshiro256++/v1") so stored baselines survive toolchain changes.
struct Rng {
  uint64_t s[4];

  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& si : s) {
      x += 0x9e3779b97f4a7c15ull;
      uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      si = z ^ (z >> 31);
    }
  }

  static constexpr const char* name() { return "xoshiro256++/v1"; }

  uint64_t next() {
    auto rotl = [](uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
    uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  // uniform in [0, 1) from the top 53 bits
  double uniform() { return (next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int uniform_int(int n) { return (int)(next() % (uint64_t)n); }
};

}  // namespace nlab
