// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

/**
 * diffops.hpp - discrete differential operators on the pixel grid.
 *
 * Dx and Dy encode the forward-difference stencil of spatial_gradients
 * (zero rows at the trailing column/row), and P = Dx'Dx + Dy'Dy is the
 * grid Laplacian used as smoothness penalty. P annihilates constants.
 */

#ifndef STRUCTAUG_DIFFOPS_HPP
#define STRUCTAUG_DIFFOPS_HPP

#include "structaug/sparse.hpp"

namespace structaug {

struct GridOperatorSet {
  int m = 0;
  int n = 0;
  CsrMatrix dx;  // N x N
  CsrMatrix dy;  // N x N
  CsrMatrix p;   // N x N, symmetric PSD
};

/// Assemble Dx, Dy, and P for an m x n grid (m, n >= 2).
GridOperatorSet build_diff_ops(int m, int n);

// Solve (I + gamma*P) x = d by conjugate gradient. gamma = 0 returns d.
// The operator set is dimension-keyed and reusable across images.
GridVector apply_regularized_inverse(const GridOperatorSet& ops, double gamma,
                                     const GridVector& d);

/// ||Dx v||^2 + ||Dy v||^2, the smoothness energy induced by P.
double dirichlet_energy(const GridOperatorSet& ops, const GridVector& v);

}  // namespace structaug

#endif  // STRUCTAUG_DIFFOPS_HPP
