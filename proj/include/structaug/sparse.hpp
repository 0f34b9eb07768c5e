// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

/**
 * sparse.hpp - CSR matrices, conjugate gradient, and inverse power iteration.
 *
 * Matvecs accumulate per row in ascending column order, so results are
 * bit-identical across thread counts and match a dense reference that sums
 * in the same order.
 */

#ifndef STRUCTAUG_SPARSE_HPP
#define STRUCTAUG_SPARSE_HPP

#include <functional>
#include <optional>

#include "structaug/common.hpp"

namespace structaug {

struct Triplet {
  size_t row;
  size_t col;
  double value;
};

struct CsrMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<size_t> row_offsets;  // rows + 1
  std::vector<size_t> col_indices;  // sorted, unique within each row
  std::vector<double> values;

  CsrMatrix() : row_offsets(1, 0) {}
  CsrMatrix(size_t r, size_t c) : rows(r), cols(c), row_offsets(r + 1, 0) {}

  size_t nnz() const { return values.size(); }

  /// Duplicate (row, col) entries are summed; explicit zeros are kept.
  static CsrMatrix from_triplets(size_t rows, size_t cols, std::vector<Triplet> entries);
  static CsrMatrix identity(size_t n);

  void multiply(std::span<const double> x, std::span<double> y) const;  // y = A x
  GridVector apply(const GridVector& x) const;

  CsrMatrix transposed() const;

  /// Structural validator: offsets consistent, columns sorted and unique.
  bool valid() const;
  /// Entry-for-entry comparison of A and its transpose.
  bool is_symmetric(double tol = 0.0) const;

  double at(size_t i, size_t j) const;  // 0 when outside the pattern
};

// C = A * B (row-merge with per-row accumulator; deterministic order).
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);
// C = alpha*A + beta*B
CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha = 1.0, double beta = 1.0);
// A + mu*I with the diagonal inserted into the pattern if absent.
CsrMatrix add_scaled_identity(const CsrMatrix& a, double mu);
/// diag(w) * A  (scales row i by w[i])
CsrMatrix scale_rows(const GridVector& w, const CsrMatrix& a);

// --- conjugate gradient -------------------------------------------------

struct CgOptions {
  double rel_tol = 1e-10;
  long max_iter = 0;  // 0 means 10 * dimension
  // When set, receives a copy of the iterate after every CG step.
  std::vector<GridVector>* trace = nullptr;
};

struct CgResult {
  GridVector x;
  long iterations = 0;
  double residual = 0.0;  // ||Ax - b|| / ||b||, true residual
};

// Solve A x = b for SPD A. b = 0 returns x = 0 in zero iterations.
// Throws NumericalError (carrying the last residual) on non-convergence.
CgResult cg_solve(const CsrMatrix& a, const GridVector& b, const CgOptions& opts = {});

// --- smallest eigenpairs --------------------------------------------------

struct EigenSubspace {
  std::vector<GridVector> vectors;  // k orthonormal vectors
  std::vector<double> values;       // ascending Rayleigh quotients
  uint64_t seed = 0;                // start-vector stream, recorded for replay
};

struct EigOptions {
  uint64_t seed = 0x5EED5EED5EEDULL;
  double tol = 1e-8;     // accept when ||A v - lambda v|| <= tol * (|lambda| + shift)
  long max_iter = 5000;  // per eigenvector
  // Residuals below null_tol * ||A||_inf also accept: such vectors are null
  // to working precision, and chasing a tighter eigen-residual inside a
  // numerically degenerate cluster makes no progress.
  double null_tol = 1e-9;
  // Explicit start vectors (overrides seed-derived ones when provided).
  std::optional<std::vector<GridVector>> starts;
};

/// Deterministic start vectors for inverse iteration: unit-normalized
/// Gaussian draws from per-index substreams of `seed`.
std::vector<GridVector> eig_start_vectors(uint64_t seed, size_t k, size_t dim);

// Bottom-k eigenpairs of symmetric PSD A by inverse power iteration on
// (A + shift*I) with Gram-Schmidt deflation. Values ascend. Throws
// NumericalError on stagnation (message carries the partial subspace size).
EigenSubspace smallest_eigs(const CsrMatrix& a, size_t k, double shift,
                            const EigOptions& opts = {});

}  // namespace structaug

#endif  // STRUCTAUG_SPARSE_HPP
