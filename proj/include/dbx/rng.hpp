#pragma once
// Counter-based random streams. Every (seed, stream) pair opens an
// independent, platform-stable sequence, so work items can be re-partitioned
// across workers without changing any drawn value. No std:: distributions
// (their output is implementation-defined).

#include <cstdint>

#include "dbx/common.hpp"

namespace dbx {

struct SplitMix64 {
  uint64_t state;
  explicit SplitMix64(uint64_t s) : state(s) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

// Derive a child seed from (seed, stream index).
inline uint64_t derive_stream(uint64_t seed, uint64_t stream) {
  SplitMix64 s(seed ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL));
  s.next();
  return s.next();
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : sm_(seed) {}
  Rng(uint64_t seed, uint64_t stream) : sm_(derive_stream(seed, stream)) {}

  uint64_t next_u64() { return sm_.next(); }

  // Uniform in [0,1) with 53 random bits.
  double u01() { return static_cast<double>(sm_.next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  double exponential() { return -std::log1p(-u01()); }

  int uniform_int(int n) { return static_cast<int>(sm_.next() % static_cast<uint64_t>(n)); }

  // Flat Dirichlet via normalized unit exponentials.
  Vec dirichlet(int n) {
    Vec v(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      v[i] = exponential();
      s += v[i];
    }
    for (int i = 0; i < n; ++i) v[i] /= s;
    return v;
  }

  // Dirichlet draw with every entry at least floor_val (then renormalized).
  Vec dirichlet_floored(int n, double floor_val) {
    Vec v = dirichlet(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      if (v[i] < floor_val) v[i] = floor_val;
      s += v[i];
    }
    for (int i = 0; i < n; ++i) v[i] /= s;
    return v;
  }

 private:
  SplitMix64 sm_;
};

}  // namespace dbx
