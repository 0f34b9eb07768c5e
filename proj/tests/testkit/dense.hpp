// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

/**
 * dense.hpp - dense reference linear algebra for the test suites.
 *
 * Everything here is deliberately written as plain loops over dense arrays,
 * independent of the sparse solver paths it validates.
 */

#ifndef STRUCTAUG_TESTKIT_DENSE_HPP
#define STRUCTAUG_TESTKIT_DENSE_HPP

#include <vector>

#include "structaug/common.hpp"

namespace structaug {
namespace testkit {

struct DenseMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> a;

  DenseMatrix() = default;
  DenseMatrix(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& at(size_t i, size_t j) { return a[i * cols + j]; }
  double at(size_t i, size_t j) const { return a[i * cols + j]; }

  static DenseMatrix identity(size_t n);
};

// y = A x, accumulating in ascending column order and skipping exact zeros
// (the same summation order the CSR path uses).
std::vector<double> matvec(const DenseMatrix& m, const std::vector<double>& x);

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& m);

// Direct LU solve with partial pivoting. Throws NumericalError when a pivot
// vanishes or the diagonal-growth condition estimate exceeds 1e12.
std::vector<double> dense_oracle_solve(DenseMatrix a, std::vector<double> b);

struct DenseEig {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // eigenvectors in columns, matching order
};

/// Cyclic Jacobi eigendecomposition for symmetric matrices.
DenseEig jacobi_eigensym(DenseMatrix a, double tol = 1e-13, int max_sweeps = 100);

}  // namespace testkit
}  // namespace structaug

#endif  // STRUCTAUG_TESTKIT_DENSE_HPP
