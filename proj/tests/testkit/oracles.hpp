// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

/**
 * oracles.hpp - independent brute-force references for the main paths.
 *
 * Dense assemblies and scalar loops only; none of the sparse or parallel
 * implementation code is reused here (the Image type is the one shared
 * piece). Size caps keep full runs fast.
 */

#ifndef STRUCTAUG_TESTKIT_ORACLES_HPP
#define STRUCTAUG_TESTKIT_ORACLES_HPP

#include "structaug/gradsource.hpp"
#include "structaug/image.hpp"
#include "testkit/dense.hpp"

namespace structaug {
namespace testkit {

// Dense forward-difference operators built directly from the stencil
// definition (zero rows along the trailing column/row).
DenseMatrix dense_dx(int m, int n);
DenseMatrix dense_dy(int m, int n);
/// P = Dx'Dx + Dy'Dy assembled by dense products.
DenseMatrix dense_grid_penalty(int m, int n);

struct DenseFlow {
  std::vector<double> xdot;
  std::vector<double> ydot;
};

// Closed-form flow by dense factorization: solves (I + gamma P) against the
// loop-computed data terms, scaled by -1/alpha. Capped at N <= 256.
DenseFlow dense_flow_oracle(const Image& img, const GridVector& g, double alpha, double gamma);

/// Scalar-loop backward-mapping warp with the same bilinear contract.
Image serial_warp(const Image& img, const DenseFlow& flow, double delta);
Image serial_warp(const Image& img, const std::vector<double>& xdot,
                  const std::vector<double>& ydot, double delta);

/// Per-pixel loop edginess (row norm of six stacked gradients, plus eps).
std::vector<double> serial_edginess(const Image& img, double eps);

/// Dense per-channel recolor operators [MA, MB, MC].
std::vector<DenseMatrix> dense_channel_operators(const Image& img, double eps);
/// Dense 3N x 3N block Gram matrix M. Capped at 3N <= 768.
DenseMatrix dense_recolor_matrix(const Image& img, double eps);

std::vector<double> dense_recolor_solve(const Image& img, const GridVector& g, double lambda,
                                        double mu, double eps);

// Projection of g onto the bottom-k eigenspace of M via full Jacobi
// eigendecomposition. When the k-th eigenvalue sits inside the null cluster,
// the basis inside the cluster is canonicalized by Gram-Schmidt of the
// provided start vectors projected onto the cluster (matching what inverse
// power iteration converges to from the same starts).
std::vector<double> dense_recolor_project(const Image& img, const GridVector& g, size_t k,
                                          double eps, double scale,
                                          const std::vector<GridVector>& starts);

/// Penalty by direct evaluation: ||MA za + MB zb + MC zc||^2, dense.
double dense_penalty(const Image& img, const std::vector<double>& zdot, double eps);

struct ProbeRow {
  double delta;
  double observed;
  double predicted;
};

// Finite-difference table for additive perturbations: observed loss change
// L(z + delta p) - L(z) next to the first-order prediction delta * <grad, p>.
std::vector<ProbeRow> fd_loss_probe(const TinyClassifier& clf, const Image& img, int label,
                                    const GridVector& perturbation,
                                    const std::vector<double>& deltas);

}  // namespace testkit
}  // namespace structaug

#endif  // STRUCTAUG_TESTKIT_ORACLES_HPP
