// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#ifndef STRUCTAUG_COMMON_HPP
#define STRUCTAUG_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace structaug {

/// Flattened image plane (or stacked planes), always double precision.
using GridVector = std::vector<double>;

// Error categories map onto CLI exit codes: config=2, numerical=3, io=4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  NumericalError(const std::string& what, double residual = 0.0, long iterations = 0)
      : std::runtime_error(what), residual(residual), iterations(iterations) {}
  double residual;
  long iterations;
};

// Splittable PRNG (splitmix64). Per-item streams derive from (seed, index),
// so batch decisions do not depend on thread scheduling.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller from two fresh uniforms; draws two words per call.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  static SplitMix64 substream(uint64_t seed, uint64_t index) {
    SplitMix64 g(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
    g.next();
    return g;
  }
};

/// 64-bit FNV-1a over a byte buffer; used to key per-image cache entries.
uint64_t fnv1a64(const void* bytes, size_t len, uint64_t h = 0xCBF29CE484222325ULL);

namespace par {

int max_threads();
void set_threads(int n);

// Dot product with fixed-size block partials accumulated in block order;
// bit-identical result for any thread count.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace par

}  // namespace structaug

#endif  // STRUCTAUG_COMMON_HPP
