// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#include "structaug/diffops.hpp"

namespace structaug {

GridOperatorSet build_diff_ops(int m, int n) {
  if (m < 2 || n < 2) throw ConfigError("build_diff_ops: grid must be at least 2x2");
  const size_t N = static_cast<size_t>(m) * n;

  std::vector<Triplet> tx, ty;
  tx.reserve(2 * N);
  ty.reserve(2 * N);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const size_t r = static_cast<size_t>(i) * n + j;
      if (j < n - 1) {
        tx.push_back({r, r, -1.0});
        tx.push_back({r, r + 1, 1.0});
      }
      if (i < m - 1) {
        ty.push_back({r, r, -1.0});
        ty.push_back({r, r + static_cast<size_t>(n), 1.0});
      }
    }

  GridOperatorSet ops;
  ops.m = m;
  ops.n = n;
  ops.dx = CsrMatrix::from_triplets(N, N, std::move(tx));
  ops.dy = CsrMatrix::from_triplets(N, N, std::move(ty));
  ops.p = add(multiply(ops.dx.transposed(), ops.dx), multiply(ops.dy.transposed(), ops.dy));
  return ops;
}

GridVector apply_regularized_inverse(const GridOperatorSet& ops, double gamma,
                                     const GridVector& d) {
  if (gamma < 0.0) throw ConfigError("apply_regularized_inverse: gamma must be >= 0");
  if (d.size() != ops.p.rows)
    throw ConfigError("apply_regularized_inverse: vector length mismatch");
  if (gamma == 0.0) return d;

  CsrMatrix system = ops.p;
  for (double& v : system.values) v *= gamma;
  system = add_scaled_identity(system, 1.0);
  return cg_solve(system, d).x;
}

double dirichlet_energy(const GridOperatorSet& ops, const GridVector& v) {
  const GridVector gx = ops.dx.apply(v);
  const GridVector gy = ops.dy.apply(v);
  return par::dot(gx, gx) + par::dot(gy, gy);
}

}  // namespace structaug
