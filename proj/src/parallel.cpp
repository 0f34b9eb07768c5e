// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#include <omp.h>

#include <cassert>
#include <cmath>

#include "structaug/common.hpp"

namespace structaug {

uint64_t fnv1a64(const void* bytes, size_t len, uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

namespace par {

namespace {
constexpr size_t kBlock = 4096;
}

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  const size_t n = a.size();
  if (n <= kBlock) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  const size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
  for (long bi = 0; bi < static_cast<long>(nblocks); ++bi) {
    const size_t lo = static_cast<size_t>(bi) * kBlock;
    const size_t hi = std::min(lo + kBlock, n);
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    partial[static_cast<size_t>(bi)] = s;
  }
  double s = 0.0;
  for (size_t bi = 0; bi < nblocks; ++bi) s += partial[bi];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace par
}  // namespace structaug
