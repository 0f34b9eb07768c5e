// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#include "structaug/photometric.hpp"

#include <algorithm>
#include <cmath>

namespace structaug {

EdginessField edginess(const Image& img, double eps) {
  if (img.channels != 3) throw ConfigError("edginess: RGB image required");
  if (!(eps > 0.0)) throw ConfigError("edginess: eps must be positive");
  const size_t N = img.pixel_count();

  EdginessField field;
  field.eps = eps;
  field.e.assign(N, 0.0);
  for (int c = 0; c < 3; ++c) {
    auto [zx, zy] = spatial_gradients(img, c);
    for (size_t i = 0; i < N; ++i) field.e[i] += zx[i] * zx[i] + zy[i] * zy[i];
  }
  const long NN = static_cast<long>(N);
#pragma omp parallel for schedule(static) if (NN > 16384)
  for (long i = 0; i < NN; ++i)
    field.e[static_cast<size_t>(i)] = std::sqrt(field.e[static_cast<size_t>(i)]) + eps;
  return field;
}

RecolorOperator build_recolor_operator(const Image& img, double eps, size_t max_pixels) {
  if (img.channels != 3) throw ConfigError("build_recolor_operator: RGB image required");
  const size_t N = img.pixel_count();
  if (N > max_pixels)
    throw ConfigError("build_recolor_operator: image has " + std::to_string(N) +
                      " pixels, above the assembly cap of " + std::to_string(max_pixels));

  const GridOperatorSet ops = build_diff_ops(img.height, img.width);
  const EdginessField field = edginess(img, eps);

  RecolorOperator op;
  op.m = img.height;
  op.n = img.width;
  op.eps = eps;
  op.image_id = img.content_hash();

  CsrMatrix* blocks[3] = {&op.ma, &op.mb, &op.mc};
  for (int c = 0; c < 3; ++c) {
    auto [zx, zy] = spatial_gradients(img, c);
    GridVector wx(N), wy(N);
    for (size_t i = 0; i < N; ++i) {
      wx[i] = zx[i] / field.e[i];
      wy[i] = zy[i] / field.e[i];
    }
    *blocks[c] = add(scale_rows(wx, ops.dx), scale_rows(wy, ops.dy));
  }

  // 3x3 block Gram matrix. Upper blocks are computed; lower blocks reuse the
  // transpose so the assembled matrix is symmetric bit-for-bit.
  CsrMatrix products[3][3];
  for (int a = 0; a < 3; ++a) {
    const CsrMatrix at = blocks[a]->transposed();
    for (int b = a; b < 3; ++b) products[a][b] = multiply(at, *blocks[b]);
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < a; ++b) products[a][b] = products[b][a].transposed();

  std::vector<Triplet> entries;
  size_t total = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) total += products[a][b].nnz();
  entries.reserve(total);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const CsrMatrix& blk = products[a][b];
      for (size_t r = 0; r < blk.rows; ++r)
        for (size_t k = blk.row_offsets[r]; k < blk.row_offsets[r + 1]; ++k)
          entries.push_back({static_cast<size_t>(a) * N + r,
                             static_cast<size_t>(b) * N + blk.col_indices[k],
                             blk.values[k]});
    }
  op.gram = CsrMatrix::from_triplets(3 * N, 3 * N, std::move(entries));
  if (!op.gram.is_symmetric(0.0))
    throw NumericalError("build_recolor_operator: assembled block matrix not symmetric");
  return op;
}

GridVector recolor_solve(const RecolorOperator& op, const AdvGradient& g, double lambda,
                         double mu) {
  if (!(lambda > 0.0) || !(mu > 0.0))
    throw ConfigError("recolor_solve: lambda and mu must be positive");
  if (g.data.size() != op.gram.rows)
    throw ConfigError("recolor_solve: gradient length does not match operator");
  for (double v : g.data)
    if (!std::isfinite(v)) throw ConfigError("recolor_solve: gradient has non-finite entries");

  GridVector rhs(g.data.size());
  for (size_t i = 0; i < rhs.size(); ++i) rhs[i] = g.data[i] / lambda;
  return cg_solve(add_scaled_identity(op.gram, mu), rhs).x;
}

GridVector recolor_project(const RecolorOperator& op, const AdvGradient& g, size_t k,
                           double mu, double scale, uint64_t eig_seed,
                           const EigenSubspace* precomputed) {
  if (k < 1) throw ConfigError("recolor_project: k must be >= 1");
  if (g.data.size() != op.gram.rows)
    throw ConfigError("recolor_project: gradient length does not match operator");

  EigenSubspace local;
  const EigenSubspace* sub = precomputed;
  if (!sub) {
    EigOptions eopts;
    eopts.seed = eig_seed;
    local = smallest_eigs(op.gram, k, mu, eopts);
    sub = &local;
  }
  if (sub->vectors.size() < k)
    throw NumericalError("recolor_project: subspace smaller than requested k");

  GridVector z(g.data.size(), 0.0);
  for (size_t j = 0; j < k; ++j) {
    const double c = scale * par::dot(sub->vectors[j], g.data);
    for (size_t i = 0; i < z.size(); ++i) z[i] += c * sub->vectors[j][i];
  }
  return z;
}

double penalty(const RecolorOperator& op, const GridVector& zdot) {
  const size_t N = static_cast<size_t>(op.m) * op.n;
  if (zdot.size() != 3 * N) throw ConfigError("penalty: vector length must be 3N");

  const std::span<const double> za(zdot.data(), N);
  const std::span<const double> zb(zdot.data() + N, N);
  const std::span<const double> zc(zdot.data() + 2 * N, N);
  GridVector sum(N), tmp(N);
  op.ma.multiply(za, sum);
  op.mb.multiply(zb, tmp);
  for (size_t i = 0; i < N; ++i) sum[i] += tmp[i];
  op.mc.multiply(zc, tmp);
  for (size_t i = 0; i < N; ++i) sum[i] += tmp[i];
  return par::dot(sum, sum);
}

Image photometric_augment(const Image& img, const AdvGradient& g, const RecolorConfig& cfg,
                          const EigenSubspace* precomputed) {
  RecolorOperator op = build_recolor_operator(img, cfg.eps, cfg.max_pixels);

  GridVector z;
  if (cfg.project) {
    z = recolor_project(op, g, cfg.k, cfg.mu, 1.0, cfg.eig_seed, precomputed);
    double maxabs = 0.0;
    for (double v : z) maxabs = std::max(maxabs, std::abs(v));
    if (maxabs > 0.0) {
      const double s = cfg.scale / maxabs;
      for (double& v : z) v *= s;
    }
  } else {
    z = recolor_solve(op, g, cfg.lambda, cfg.mu);
  }

  Image out = img;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += z[i];
  clamp01(out);
  return out;
}

}  // namespace structaug
