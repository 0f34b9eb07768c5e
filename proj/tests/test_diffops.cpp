// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "structaug/corpus.hpp"
#include "structaug/diffops.hpp"
#include "testkit/dense.hpp"
#include "testkit/oracles.hpp"

using namespace structaug;

TEST_CASE("2x2 stencil rows written out") {
  const GridOperatorSet ops = build_diff_ops(2, 2);
  const double want_dx[4][4] = {
      {-1, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, -1, 1}, {0, 0, 0, 0}};
  const double want_dy[4][4] = {
      {-1, 0, 1, 0}, {0, -1, 0, 1}, {0, 0, 0, 0}, {0, 0, 0, 0}};
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) {
      CHECK(ops.dx.at(i, j) == want_dx[i][j]);
      CHECK(ops.dy.at(i, j) == want_dy[i][j]);
    }
}

TEST_CASE("P annihilates constants exactly") {
  for (auto [m, n] : {std::pair{2, 2}, std::pair{4, 7}, std::pair{16, 16}}) {
    const GridOperatorSet ops = build_diff_ops(m, n);
    const GridVector ones(static_cast<size_t>(m) * n, 1.0);
    for (double v : ops.p.apply(ones)) CHECK(v == 0.0);
  }
}

TEST_CASE("P equals the dense product oracle entrywise") {
  const GridOperatorSet ops = build_diff_ops(4, 4);
  const testkit::DenseMatrix dp = testkit::dense_grid_penalty(4, 4);
  for (size_t i = 0; i < 16; ++i)
    for (size_t j = 0; j < 16; ++j) CHECK(ops.p.at(i, j) == dp.at(i, j));
}

TEST_CASE("P is symmetric PSD") {
  const GridOperatorSet ops = build_diff_ops(6, 5);
  CHECK(ops.p.is_symmetric());
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const GridVector x = corpus::random_gradient(30, seed);
    CHECK(par::dot(x, ops.p.apply(x)) >= 0.0);
  }
}

TEST_CASE("build_diff_ops rejects degenerate grids") {
  CHECK_THROWS_AS(build_diff_ops(1, 5), ConfigError);
  CHECK_THROWS_AS(build_diff_ops(5, 1), ConfigError);
}

TEST_CASE("gamma = 0 gives the identity system") {
  const GridOperatorSet ops = build_diff_ops(3, 4);
  const GridVector d = corpus::random_gradient(12, 5);
  CHECK(apply_regularized_inverse(ops, 0.0, d) == d);
}

TEST_CASE("large gamma projects onto the constant vector") {
  const GridOperatorSet ops = build_diff_ops(8, 8);
  const GridVector d = corpus::random_gradient(64, 17);
  const GridVector x = apply_regularized_inverse(ops, 1e6, d);
  double mean = 0.0, dnorm = 0.0;
  for (double v : d) {
    mean += v;
    dnorm += v * v;
  }
  mean /= 64.0;
  dnorm = std::sqrt(dnorm);
  double err = 0.0;
  for (double v : x) err += (v - mean) * (v - mean);
  CHECK(std::sqrt(err) <= 1e-3 * dnorm);
}

TEST_CASE("regularized solve matches the dense oracle at gamma = 1") {
  const GridOperatorSet ops = build_diff_ops(4, 4);
  GridVector e1(16, 0.0);
  e1[0] = 1.0;
  const GridVector got = apply_regularized_inverse(ops, 1.0, e1);

  testkit::DenseMatrix dsys = testkit::dense_grid_penalty(4, 4);
  for (size_t i = 0; i < 16; ++i) dsys.at(i, i) += 1.0;
  const std::vector<double> want = testkit::dense_oracle_solve(dsys, e1);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < 16; ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  CHECK(std::sqrt(num / den) < 1e-8);
}

TEST_CASE("solutions realize a nonnegative quadratic form") {
  // d' (I + gamma P)^-1 d >= 0 backs the loss-ascent sign downstream
  const GridOperatorSet ops = build_diff_ops(5, 6);
  for (double gamma : {0.0, 0.1, 1.0, 10.0, 100.0})
    for (uint64_t seed = 0; seed < 10; ++seed) {
      const GridVector d = corpus::random_gradient(30, 100 + seed);
      CHECK(par::dot(d, apply_regularized_inverse(ops, gamma, d)) >= 0.0);
    }
}

TEST_CASE("Dirichlet energy of the solution is non-increasing in gamma") {
  const GridOperatorSet ops = build_diff_ops(6, 6);
  const double gammas[] = {0.0, 0.1, 1.0, 10.0, 100.0};
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const GridVector d = corpus::random_gradient(36, 200 + seed);
    double prev = std::numeric_limits<double>::infinity();
    for (double gamma : gammas) {
      const double energy = dirichlet_energy(ops, apply_regularized_inverse(ops, gamma, d));
      CHECK(energy <= prev * (1.0 + 1e-12));
      prev = energy;
    }
  }
}

TEST_CASE("negative gamma is rejected") {
  const GridOperatorSet ops = build_diff_ops(3, 3);
  CHECK_THROWS_AS(apply_regularized_inverse(ops, -1.0, GridVector(9, 0.0)), ConfigError);
}
