// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#include "structaug/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace structaug {

CsrMatrix CsrMatrix::from_triplets(size_t rows, size_t cols, std::vector<Triplet> entries) {
  for (const Triplet& t : entries)
    if (t.row >= rows || t.col >= cols)
      throw ConfigError("from_triplets: entry outside matrix dimensions");
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  CsrMatrix m(rows, cols);
  m.col_indices.reserve(entries.size());
  m.values.reserve(entries.size());
  size_t at = 0;
  for (size_t r = 0; r < rows; ++r) {
    while (at < entries.size() && entries[at].row == r) {
      const size_t c = entries[at].col;
      double v = entries[at].value;
      ++at;
      while (at < entries.size() && entries[at].row == r && entries[at].col == c) {
        v += entries[at].value;
        ++at;
      }
      m.col_indices.push_back(c);
      m.values.push_back(v);
    }
    m.row_offsets[r + 1] = m.col_indices.size();
  }
  return m;
}

CsrMatrix CsrMatrix::identity(size_t n) {
  CsrMatrix m(n, n);
  m.col_indices.resize(n);
  m.values.assign(n, 1.0);
  for (size_t i = 0; i < n; ++i) {
    m.col_indices[i] = i;
    m.row_offsets[i + 1] = i + 1;
  }
  return m;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols || y.size() != rows)
    throw ConfigError("matvec: dimension mismatch");
  const long r = static_cast<long>(rows);
#pragma omp parallel for schedule(static) if (nnz() > 8192)
  for (long i = 0; i < r; ++i) {
    double s = 0.0;
    const size_t end = row_offsets[static_cast<size_t>(i) + 1];
    for (size_t k = row_offsets[static_cast<size_t>(i)]; k < end; ++k)
      s += values[k] * x[col_indices[k]];
    y[static_cast<size_t>(i)] = s;
  }
}

GridVector CsrMatrix::apply(const GridVector& x) const {
  GridVector y(rows);
  multiply(x, y);
  return y;
}

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix t(cols, rows);
  std::vector<size_t> count(cols, 0);
  for (size_t c : col_indices) ++count[c];
  for (size_t c = 0; c < cols; ++c) t.row_offsets[c + 1] = t.row_offsets[c] + count[c];
  t.col_indices.resize(nnz());
  t.values.resize(nnz());
  std::vector<size_t> cursor(t.row_offsets.begin(), t.row_offsets.end() - 1);
  for (size_t r = 0; r < rows; ++r)
    for (size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
      const size_t pos = cursor[col_indices[k]]++;
      t.col_indices[pos] = r;
      t.values[pos] = values[k];
    }
  return t;
}

bool CsrMatrix::valid() const {
  if (row_offsets.size() != rows + 1 || row_offsets.front() != 0 ||
      row_offsets.back() != nnz() || col_indices.size() != values.size())
    return false;
  for (size_t r = 0; r < rows; ++r) {
    if (row_offsets[r] > row_offsets[r + 1]) return false;
    for (size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
      if (col_indices[k] >= cols) return false;
      if (k > row_offsets[r] && col_indices[k] <= col_indices[k - 1]) return false;
    }
  }
  return true;
}

bool CsrMatrix::is_symmetric(double tol) const {
  if (rows != cols) return false;
  const CsrMatrix t = transposed();
  if (t.row_offsets != row_offsets || t.col_indices != col_indices) return false;
  for (size_t k = 0; k < values.size(); ++k)
    if (std::abs(values[k] - t.values[k]) > tol) return false;
  return true;
}

double CsrMatrix::at(size_t i, size_t j) const {
  const auto begin = col_indices.begin() + static_cast<long>(row_offsets[i]);
  const auto end = col_indices.begin() + static_cast<long>(row_offsets[i + 1]);
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values[static_cast<size_t>(it - col_indices.begin())];
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols != b.rows) throw ConfigError("multiply: inner dimensions differ");
  CsrMatrix c(a.rows, b.cols);

  // two passes: count nnz per row, then fill
  std::vector<size_t> rownnz(a.rows, 0);
  const long r = static_cast<long>(a.rows);
#pragma omp parallel
  {
    std::vector<char> mark(b.cols, 0);
    std::vector<size_t> touched;
#pragma omp for schedule(static)
    for (long i = 0; i < r; ++i) {
      touched.clear();
      for (size_t ak = a.row_offsets[static_cast<size_t>(i)];
           ak < a.row_offsets[static_cast<size_t>(i) + 1]; ++ak) {
        const size_t k = a.col_indices[ak];
        for (size_t bk = b.row_offsets[k]; bk < b.row_offsets[k + 1]; ++bk) {
          const size_t j = b.col_indices[bk];
          if (!mark[j]) {
            mark[j] = 1;
            touched.push_back(j);
          }
        }
      }
      rownnz[static_cast<size_t>(i)] = touched.size();
      for (size_t j : touched) mark[j] = 0;
    }
  }
  for (size_t i = 0; i < a.rows; ++i) c.row_offsets[i + 1] = c.row_offsets[i] + rownnz[i];
  c.col_indices.resize(c.row_offsets.back());
  c.values.resize(c.row_offsets.back());

#pragma omp parallel
  {
    std::vector<double> acc(b.cols, 0.0);
    std::vector<char> mark(b.cols, 0);
    std::vector<size_t> touched;
#pragma omp for schedule(static)
    for (long i = 0; i < r; ++i) {
      touched.clear();
      for (size_t ak = a.row_offsets[static_cast<size_t>(i)];
           ak < a.row_offsets[static_cast<size_t>(i) + 1]; ++ak) {
        const size_t k = a.col_indices[ak];
        const double av = a.values[ak];
        for (size_t bk = b.row_offsets[k]; bk < b.row_offsets[k + 1]; ++bk) {
          const size_t j = b.col_indices[bk];
          if (!mark[j]) {
            mark[j] = 1;
            touched.push_back(j);
            acc[j] = 0.0;
          }
          acc[j] += av * b.values[bk];
        }
      }
      std::sort(touched.begin(), touched.end());
      size_t pos = c.row_offsets[static_cast<size_t>(i)];
      for (size_t j : touched) {
        c.col_indices[pos] = j;
        c.values[pos] = acc[j];
        ++pos;
        mark[j] = 0;
      }
    }
  }
  return c;
}

CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha, double beta) {
  if (a.rows != b.rows || a.cols != b.cols) throw ConfigError("add: dimensions differ");
  CsrMatrix c(a.rows, a.cols);
  c.col_indices.reserve(a.nnz() + b.nnz());
  c.values.reserve(a.nnz() + b.nnz());
  for (size_t r = 0; r < a.rows; ++r) {
    size_t ka = a.row_offsets[r], kb = b.row_offsets[r];
    const size_t ea = a.row_offsets[r + 1], eb = b.row_offsets[r + 1];
    while (ka < ea || kb < eb) {
      size_t col;
      double v;
      if (kb >= eb || (ka < ea && a.col_indices[ka] < b.col_indices[kb])) {
        col = a.col_indices[ka];
        v = alpha * a.values[ka++];
      } else if (ka >= ea || b.col_indices[kb] < a.col_indices[ka]) {
        col = b.col_indices[kb];
        v = beta * b.values[kb++];
      } else {
        col = a.col_indices[ka];
        v = alpha * a.values[ka++] + beta * b.values[kb++];
      }
      c.col_indices.push_back(col);
      c.values.push_back(v);
    }
    c.row_offsets[r + 1] = c.col_indices.size();
  }
  return c;
}

CsrMatrix add_scaled_identity(const CsrMatrix& a, double mu) {
  if (a.rows != a.cols) throw ConfigError("add_scaled_identity: matrix not square");
  return add(a, CsrMatrix::identity(a.rows), 1.0, mu);
}

CsrMatrix scale_rows(const GridVector& w, const CsrMatrix& a) {
  if (w.size() != a.rows) throw ConfigError("scale_rows: diagonal length mismatch");
  CsrMatrix c = a;
  for (size_t r = 0; r < a.rows; ++r)
    for (size_t k = c.row_offsets[r]; k < c.row_offsets[r + 1]; ++k) c.values[k] *= w[r];
  return c;
}

// --- conjugate gradient ---------------------------------------------------

CgResult cg_solve(const CsrMatrix& a, const GridVector& b, const CgOptions& opts) {
  if (a.rows != a.cols || b.size() != a.rows)
    throw ConfigError("cg_solve: dimension mismatch");
  if (opts.rel_tol <= 0.0) throw ConfigError("cg_solve: rel_tol must be positive");

  const size_t n = a.rows;
  const long budget = opts.max_iter > 0 ? opts.max_iter : static_cast<long>(10 * n);

  CgResult out;
  out.x.assign(n, 0.0);
  const double bnorm = par::norm2(b);
  if (bnorm == 0.0) return out;

  GridVector r = b;  // residual of x = 0
  GridVector p, q(n);
  long iters = 0;
  double true_rel = 1.0;

  // Outer loop restarts from the true residual; the recurrence residual can
  // drift below what Ax - b actually is.
  while (iters < budget) {
    a.multiply(out.x, q);
    for (size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    double rr = par::dot(r, r);
    true_rel = std::sqrt(rr) / bnorm;
    if (true_rel <= opts.rel_tol) break;

    p = r;
    while (iters < budget) {
      a.multiply(p, q);
      const double pq = par::dot(p, q);
      if (!(pq > 0.0)) {
        throw NumericalError("cg_solve: matrix not positive definite (p'Ap = " +
                                 std::to_string(pq) + ")",
                             std::sqrt(rr) / bnorm, iters);
      }
      const double step = rr / pq;
      const long nn = static_cast<long>(n);
#pragma omp parallel for schedule(static) if (nn > 16384)
      for (long i = 0; i < nn; ++i) {
        out.x[static_cast<size_t>(i)] += step * p[static_cast<size_t>(i)];
        r[static_cast<size_t>(i)] -= step * q[static_cast<size_t>(i)];
      }
      ++iters;
      if (opts.trace) opts.trace->push_back(out.x);
      const double rr_new = par::dot(r, r);
      if (std::sqrt(rr_new) <= 0.5 * opts.rel_tol * bnorm) {
        rr = rr_new;
        break;
      }
      const double beta = rr_new / rr;
      rr = rr_new;
#pragma omp parallel for schedule(static) if (nn > 16384)
      for (long i = 0; i < nn; ++i)
        p[static_cast<size_t>(i)] = r[static_cast<size_t>(i)] + beta * p[static_cast<size_t>(i)];
    }

    a.multiply(out.x, q);
    double tr = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double d = b[i] - q[i];
      tr += d * d;
    }
    true_rel = std::sqrt(tr) / bnorm;
    if (true_rel <= opts.rel_tol) break;
  }

  out.iterations = iters;
  out.residual = true_rel;
  if (true_rel > opts.rel_tol)
    throw NumericalError("cg_solve: no convergence after " + std::to_string(iters) +
                             " iterations (relative residual " + std::to_string(true_rel) + ")",
                         true_rel, iters);
  return out;
}

// --- smallest eigenpairs ----------------------------------------------------

std::vector<GridVector> eig_start_vectors(uint64_t seed, size_t k, size_t dim) {
  std::vector<GridVector> starts(k, GridVector(dim));
  for (size_t j = 0; j < k; ++j) {
    SplitMix64 rng = SplitMix64::substream(seed, j);
    for (size_t i = 0; i < dim; ++i) starts[j][i] = rng.normal();
    const double nrm = par::norm2(starts[j]);
    for (size_t i = 0; i < dim; ++i) starts[j][i] /= nrm;
  }
  return starts;
}

namespace {

// Modified Gram-Schmidt against accepted vectors, applied twice.
void deflate(GridVector& w, const std::vector<GridVector>& basis, size_t count) {
  for (int pass = 0; pass < 2; ++pass)
    for (size_t u = 0; u < count; ++u) {
      const double c = par::dot(w, basis[u]);
      for (size_t i = 0; i < w.size(); ++i) w[i] -= c * basis[u][i];
    }
}

}  // namespace

EigenSubspace smallest_eigs(const CsrMatrix& a, size_t k, double shift,
                            const EigOptions& opts) {
  if (a.rows != a.cols) throw ConfigError("smallest_eigs: matrix not square");
  if (k == 0 || k > a.rows) throw ConfigError("smallest_eigs: k out of range");
  if (!(shift > 0.0)) throw ConfigError("smallest_eigs: shift must be positive");

  const size_t dim = a.rows;
  const CsrMatrix shifted = add_scaled_identity(a, shift);
  std::vector<GridVector> starts =
      opts.starts ? *opts.starts : eig_start_vectors(opts.seed, k, dim);
  if (starts.size() != k) throw ConfigError("smallest_eigs: wrong number of start vectors");

  double inf_norm = 0.0;
  for (size_t r = 0; r < dim; ++r) {
    double row = 0.0;
    for (size_t j = a.row_offsets[r]; j < a.row_offsets[r + 1]; ++j)
      row += std::abs(a.values[j]);
    inf_norm = std::max(inf_norm, row);
  }
  const double null_floor = opts.null_tol * std::max(inf_norm, 1e-300);

  EigenSubspace out;
  out.seed = opts.seed;
  out.vectors.reserve(k);
  out.values.reserve(k);

  CgOptions inner;
  inner.rel_tol = 1e-11;

  GridVector av(dim);
  for (size_t j = 0; j < k; ++j) {
    GridVector v = starts[j];
    deflate(v, out.vectors, out.vectors.size());
    double nrm = par::norm2(v);
    if (nrm < 1e-12)
      throw NumericalError("smallest_eigs: start vector " + std::to_string(j) +
                           " degenerate after deflation");
    for (double& x : v) x /= nrm;

    double lambda = 0.0, best_res = std::numeric_limits<double>::infinity();
    long since_improved = 0;
    bool accepted = false;
    for (long it = 0; it < opts.max_iter; ++it) {
      GridVector w = cg_solve(shifted, v, inner).x;
      deflate(w, out.vectors, out.vectors.size());
      nrm = par::norm2(w);
      if (nrm < 1e-300)
        throw NumericalError("smallest_eigs: iteration collapsed for vector " +
                             std::to_string(j));
      for (double& x : w) x /= nrm;
      v = std::move(w);

      a.multiply(v, av);
      lambda = par::dot(v, av);
      double res2 = 0.0;
      for (size_t i = 0; i < dim; ++i) {
        const double d = av[i] - lambda * v[i];
        res2 += d * d;
      }
      const double res = std::sqrt(res2);
      if (res <= opts.tol * (std::abs(lambda) + shift) || res <= null_floor) {
        accepted = true;
        break;
      }
      if (res < 0.99999 * best_res) {
        best_res = res;
        since_improved = 0;
      } else if (++since_improved > 200) {
        break;  // stagnated
      }
    }
    if (!accepted)
      throw NumericalError("smallest_eigs: stagnation on eigenvector " + std::to_string(j) +
                               " (" + std::to_string(out.vectors.size()) +
                               " of " + std::to_string(k) + " vectors converged)",
                           best_res, static_cast<long>(out.vectors.size()));
    out.vectors.push_back(std::move(v));
    out.values.push_back(lambda);
  }

  // Ascending values; deflation usually delivers them in order already.
  std::vector<size_t> order(k);
  for (size_t i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t x, size_t y) { return out.values[x] < out.values[y]; });
  EigenSubspace sorted;
  sorted.seed = out.seed;
  for (size_t i : order) {
    sorted.vectors.push_back(std::move(out.vectors[i]));
    sorted.values.push_back(out.values[i]);
  }
  return sorted;
}

}  // namespace structaug
