// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

/**
 * photometric.hpp - edge-preserving recolorization.
 *
 * Per-channel operators Ma = diag(zax ./ e) Dx + diag(zay ./ e) Dy weight
 * intensity changes by inverse edginess; the 3N x 3N block Gram matrix
 * M = B'B with B = [MA MB MC] penalizes edge structure changes. M is
 * singular (per-channel constant shifts are null vectors, and rank(B) <= N),
 * so two realizations of the inverse are provided: a Tikhonov-guarded solve
 * and a projection onto the bottom-k eigen-subspace.
 */

#ifndef STRUCTAUG_PHOTOMETRIC_HPP
#define STRUCTAUG_PHOTOMETRIC_HPP

#include "structaug/diffops.hpp"
#include "structaug/gradsource.hpp"
#include "structaug/image.hpp"

namespace structaug {

struct EdginessField {
  GridVector e;        // length N, entries >= eps
  double eps = 1e-3;   // guard added to every entry
};

struct RecolorOperator {
  int m = 0;
  int n = 0;
  CsrMatrix ma, mb, mc;  // N x N channel operators
  CsrMatrix gram;        // 3N x 3N block matrix of Ma'Mb products
  uint64_t image_id = 0; // content hash binding the operator to its image
  double eps = 0.0;
};

struct RecolorConfig {
  bool project = true;   // default realization; false = Tikhonov solve
  double lambda = 1.0;   // solve-mode penalty weight
  double mu = 1e-4;      // Tikhonov guard / eigen shift
  size_t k = 2;          // projection subspace size
  double eps = 1e-3;     // edginess guard
  double scale = 0.1;    // projection-mode max-norm budget for the perturbation
  uint64_t eig_seed = 0x5EED5EED5EEDULL;
  size_t max_pixels = 65536;  // assembly cap on N
};

/// Row-wise norm of the six stacked channel gradients, plus eps. RGB only.
EdginessField edginess(const Image& img, double eps);

RecolorOperator build_recolor_operator(const Image& img, double eps,
                                       size_t max_pixels = 65536);

// Tikhonov-guarded solve (M + mu I) zdot = g / lambda.
GridVector recolor_solve(const RecolorOperator& op, const AdvGradient& g, double lambda,
                         double mu);

// Projection onto the bottom-k eigen-subspace of M (computed by
// smallest_eigs, or supplied precomputed): zdot = scale * sum <v_i, g> v_i.
GridVector recolor_project(const RecolorOperator& op, const AdvGradient& g, size_t k,
                           double mu, double scale,
                           uint64_t eig_seed = 0x5EED5EED5EEDULL,
                           const EigenSubspace* precomputed = nullptr);

/// Edge-change penalty ||MA za + MB zb + MC zc||^2 (unit grid spacing).
double penalty(const RecolorOperator& op, const GridVector& zdot);

// img + unvec(zdot) per channel, clamped. Projection mode rescales zdot to
// the max-norm budget cfg.scale (a zero projection leaves the image alone).
Image photometric_augment(const Image& img, const AdvGradient& g, const RecolorConfig& cfg,
                          const EigenSubspace* precomputed = nullptr);

}  // namespace structaug

#endif  // STRUCTAUG_PHOTOMETRIC_HPP
