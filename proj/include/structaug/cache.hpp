// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

/**
 * cache.hpp - persisted operator cache.
 *
 * Geoflow entries are keyed by (grid dims, gamma) and hold the factorization-
 * free operator set; recolor entries are keyed by (image content hash, eps, k)
 * and hold the eigen-subspace. Values are stored as raw 64-bit doubles, so a
 * cache hit reproduces fresh computation bit-for-bit.
 */

#ifndef STRUCTAUG_CACHE_HPP
#define STRUCTAUG_CACHE_HPP

#include <optional>
#include <string>

#include "structaug/diffops.hpp"
#include "structaug/sparse.hpp"

namespace structaug {

class OperatorCache {
 public:
  explicit OperatorCache(std::string directory);

  const std::string& directory() const { return dir_; }

  bool has_flow_ops(int m, int n, double gamma) const;
  std::optional<GridOperatorSet> load_flow_ops(int m, int n, double gamma) const;
  void store_flow_ops(const GridOperatorSet& ops, double gamma) const;
  /// Load on hit, otherwise build and persist.
  GridOperatorSet get_flow_ops(int m, int n, double gamma) const;

  bool has_subspace(uint64_t image_id, double eps, size_t k) const;
  std::optional<EigenSubspace> load_subspace(uint64_t image_id, double eps, size_t k) const;
  void store_subspace(uint64_t image_id, double eps, size_t k,
                      const EigenSubspace& sub) const;

  static std::string flow_entry_name(int m, int n, double gamma);
  static std::string recolor_entry_name(uint64_t image_id, double eps, size_t k);

 private:
  std::string dir_;
};

}  // namespace structaug

#endif  // STRUCTAUG_CACHE_HPP
