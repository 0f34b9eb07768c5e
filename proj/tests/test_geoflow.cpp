// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "structaug/corpus.hpp"
#include "structaug/geoflow.hpp"
#include "testkit/oracles.hpp"

using namespace structaug;

namespace {

AdvGradient wrap_gradient(GridVector v) {
  AdvGradient g;
  g.data = std::move(v);
  return g;
}

double norm(const GridVector& v) { return par::norm2(v); }

}  // namespace

TEST_CASE("data terms vanish on constant images") {
  const Image img = corpus::constant(4, 4, 3, 0.5);
  const AdvGradient g = wrap_gradient(corpus::random_gradient(48, 1));
  auto [dx, dy] = flow_data_terms(img, g);
  for (double v : dx) CHECK(v == 0.0);
  for (double v : dy) CHECK(v == 0.0);
}

TEST_CASE("data terms vanish for a zero gradient") {
  const Image img = corpus::noise(4, 4, 1, 2);
  const AdvGradient g = wrap_gradient(GridVector(16, 0.0));
  auto [dx, dy] = flow_data_terms(img, g);
  for (double v : dx) CHECK(v == 0.0);
  for (double v : dy) CHECK(v == 0.0);
}

TEST_CASE("ones gradient reproduces the image x-gradient") {
  Image img(3, 3, 1);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) img.at(0, i, j) = 0.3 * j;
  const AdvGradient g = wrap_gradient(GridVector(9, 1.0));
  auto [dx, dy] = flow_data_terms(img, g);
  auto [zx, zy] = spatial_gradients(img, 0);
  CHECK(dx == zx);
  CHECK(dy == zy);
}

TEST_CASE("rgb data terms sum over channels") {
  const Image img = corpus::noise(4, 5, 3, 3);
  const AdvGradient g = wrap_gradient(corpus::random_gradient(60, 4));
  auto [dx, dy] = flow_data_terms(img, g);
  const size_t N = 20;
  GridVector ex(N, 0.0), ey(N, 0.0);
  for (int c = 0; c < 3; ++c) {
    auto [zx, zy] = spatial_gradients(img, c);
    for (size_t i = 0; i < N; ++i) {
      ex[i] += zx[i] * g.data[static_cast<size_t>(c) * N + i];
      ey[i] += zy[i] * g.data[static_cast<size_t>(c) * N + i];
    }
  }
  CHECK(dx == ex);
  CHECK(dy == ey);
}

TEST_CASE("data terms reject mismatched gradient lengths") {
  const Image img = corpus::noise(4, 4, 3, 5);
  CHECK_THROWS_AS(flow_data_terms(img, wrap_gradient(GridVector(16, 0.0))), ConfigError);
}

TEST_CASE("zero data terms give zero flow") {
  const GridOperatorSet ops = build_diff_ops(4, 4);
  const FlowField flow = solve_flow(ops, GridVector(16, 0.0), GridVector(16, 0.0), 1.0, 2.0);
  for (double v : flow.xdot) CHECK(v == 0.0);
  for (double v : flow.ydot) CHECK(v == 0.0);
}

TEST_CASE("gamma = 0 flow is the scaled data term") {
  const GridOperatorSet ops = build_diff_ops(4, 4);
  const GridVector dx = corpus::random_gradient(16, 6);
  const GridVector dy = corpus::random_gradient(16, 7);
  const FlowField flow = solve_flow(ops, dx, dy, 2.0, 0.0);
  for (size_t i = 0; i < 16; ++i) {
    CHECK(flow.xdot[i] == dx[i] * -0.5);
    CHECK(flow.ydot[i] == dy[i] * -0.5);
  }
}

TEST_CASE("flow matches the dense closed-form oracle") {
  const Image img = corpus::noise(4, 4, 1, 8);
  const GridVector g = corpus::random_gradient(16, 9);
  const GridOperatorSet ops = build_diff_ops(4, 4);
  auto [dx, dy] = flow_data_terms(img, wrap_gradient(g));
  const FlowField flow = solve_flow(ops, dx, dy, 1.0, 1.0);
  const testkit::DenseFlow want = testkit::dense_flow_oracle(img, g, 1.0, 1.0);

  double err = 0.0, den = 0.0;
  for (size_t i = 0; i < 16; ++i) {
    err += (flow.xdot[i] - want.xdot[i]) * (flow.xdot[i] - want.xdot[i]);
    err += (flow.ydot[i] - want.ydot[i]) * (flow.ydot[i] - want.ydot[i]);
    den += want.xdot[i] * want.xdot[i] + want.ydot[i] * want.ydot[i];
  }
  CHECK(std::sqrt(err / den) < 1e-8);
}

TEST_CASE("doubling alpha exactly halves the flow") {
  const Image img = corpus::smooth_blobs(6, 6, 1, 2, 10);
  const GridVector g = corpus::random_gradient(36, 11);
  const GridOperatorSet ops = build_diff_ops(6, 6);
  auto [dx, dy] = flow_data_terms(img, wrap_gradient(g));
  const FlowField f1 = solve_flow(ops, dx, dy, 1.0, 3.0);
  const FlowField f2 = solve_flow(ops, dx, dy, 2.0, 3.0);
  for (size_t i = 0; i < 36; ++i) {
    CHECK(f2.xdot[i] == f1.xdot[i] / 2.0);
    CHECK(f2.ydot[i] == f1.ydot[i] / 2.0);
  }
}

TEST_CASE("alpha must be positive") {
  const GridOperatorSet ops = build_diff_ops(3, 3);
  CHECK_THROWS_AS(solve_flow(ops, GridVector(9, 0.0), GridVector(9, 0.0), 0.0, 1.0),
                  ConfigError);
}

TEST_CASE("ascent sign: data terms and flow have nonpositive inner product") {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    const Image img = corpus::noise(6, 7, 3, 20 + seed);
    const GridVector g = corpus::random_gradient(3 * 42, 40 + seed);
    const GridOperatorSet ops = build_diff_ops(6, 7);
    auto [dx, dy] = flow_data_terms(img, wrap_gradient(g));
    const FlowField flow = solve_flow(ops, dx, dy, 1.0, 2.0);
    const double inner = par::dot(dx, flow.xdot) + par::dot(dy, flow.ydot);
    const double dn = std::sqrt(norm(dx) * norm(dx) + norm(dy) * norm(dy));
    const double fn = std::sqrt(norm(flow.xdot) * norm(flow.xdot) +
                                norm(flow.ydot) * norm(flow.ydot));
    CHECK(inner <= 1e-12 * dn * fn);
  }
}

TEST_CASE("flow at gamma = 10 is strictly smoother than at gamma = 0") {
  const Image img = corpus::noise(6, 6, 1, 50);
  const GridVector g = corpus::random_gradient(36, 51);
  const GridOperatorSet ops = build_diff_ops(6, 6);
  auto [dx, dy] = flow_data_terms(img, wrap_gradient(g));
  const FlowField rough = solve_flow(ops, dx, dy, 1.0, 0.0);
  const FlowField smooth = solve_flow(ops, dx, dy, 1.0, 10.0);
  const double e0 = dirichlet_energy(ops, rough.xdot) + dirichlet_energy(ops, rough.ydot);
  const double e10 = dirichlet_energy(ops, smooth.xdot) + dirichlet_energy(ops, smooth.ydot);
  CHECK(e10 < e0 - 1e-12 * std::max(1.0, e0));
}

TEST_CASE("warp with delta = 0 is the identity") {
  const Image img = corpus::noise(5, 5, 3, 60);
  FlowField flow;
  flow.m = flow.n = 5;
  flow.xdot = corpus::random_gradient(25, 61);
  flow.ydot = corpus::random_gradient(25, 62);
  const Image out = warp(img, flow, 0.0);
  CHECK(out.data == img.data);
}

TEST_CASE("uniform unit flow shifts the pattern one pixel") {
  // xdot = 1 everywhere: output (i, j) samples (i, j-1); the first source
  // column is duplicated by the clamp and the last source column drops off.
  Image img(3, 4, 1);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) img.at(0, i, j) = 0.05 * (i + 1) + 0.2 * j;
  FlowField flow;
  flow.m = 3;
  flow.n = 4;
  flow.xdot.assign(12, 1.0);
  flow.ydot.assign(12, 0.0);
  const Image out = warp(img, flow, 1.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(out.at(0, i, 0) == img.at(0, i, 0));
    for (int j = 1; j < 4; ++j) CHECK(out.at(0, i, j) == img.at(0, i, j - 1));
  }
}

TEST_CASE("warp matches the scalar-loop reference exactly") {
  const Image img = corpus::noise(8, 8, 3, 70);
  const GridOperatorSet ops = build_diff_ops(8, 8);
  const GridVector g = corpus::random_gradient(3 * 64, 71);
  auto [dx, dy] = flow_data_terms(img, wrap_gradient(g));
  const FlowField flow = solve_flow(ops, dx, dy, 0.2, 5.0);
  const Image got = warp(img, flow, 0.8);
  const Image want = testkit::serial_warp(img, flow.xdot, flow.ydot, 0.8);
  CHECK(got.data == want.data);
}

TEST_CASE("cap_flow limits per-pixel displacement") {
  FlowField flow;
  flow.m = 1;
  flow.n = 3;
  flow.xdot = {3.0, 0.3, -4.0};
  flow.ydot = {4.0, 0.4, 3.0};
  cap_flow(flow, 2.0);
  for (size_t i = 0; i < 3; ++i)
    CHECK(std::hypot(flow.xdot[i], flow.ydot[i]) <= 2.0 + 1e-12);
  CHECK(flow.xdot[1] == 0.3);  // below the cap, untouched
}

TEST_CASE("geometric_augment is the identity on constant images") {
  const Image img = corpus::constant(6, 6, 3, 0.4);
  const GridOperatorSet ops = build_diff_ops(6, 6);
  const AdvGradient g = wrap_gradient(corpus::random_gradient(108, 80));
  GeoflowConfig cfg;
  auto [out, flow] = geometric_augment(img, g, ops, cfg);
  CHECK(out.data == img.data);
  for (double v : flow.xdot) CHECK(v == 0.0);
  for (double v : flow.ydot) CHECK(v == 0.0);
}

TEST_CASE("geometric_augment with zero gradient is the identity") {
  const Image img = corpus::noise(6, 6, 3, 81);
  const GridOperatorSet ops = build_diff_ops(6, 6);
  const AdvGradient g = wrap_gradient(GridVector(108, 0.0));
  GeoflowConfig cfg;
  auto [out, flow] = geometric_augment(img, g, ops, cfg);
  CHECK(out.data == img.data);
}

TEST_CASE("warped loss increases to first order for the ascent gradient") {
  const Image img = corpus::smooth_blobs(12, 12, 3, 3, 90);
  const TinyClassifier clf = make_classifier(12, 12, 3, 3, 0, 91);
  const AdvGradient g = build_adv_gradient(clf, img, 1, GradientMode::untargeted);
  const GridOperatorSet ops = build_diff_ops(12, 12);
  GeoflowConfig cfg;
  cfg.cap = 0.0;  // oracle checks run uncapped
  cfg.gamma = 2.0;
  auto [dx, dy] = flow_data_terms(img, g);
  const FlowField flow = solve_flow(ops, dx, dy, cfg.alpha, cfg.gamma);

  const double predicted_rate = -(par::dot(dx, flow.xdot) + par::dot(dy, flow.ydot));
  REQUIRE(predicted_rate > 0.0);

  const double base = clf.loss(img.data, 1);
  // delta-halving: the observed/predicted ratio approaches 1
  double ratio = 0.0;
  for (double delta : {8e-3, 4e-3, 2e-3, 1e-3}) {
    const Image moved = warp(img, flow, delta);
    const double observed = clf.loss(moved.data, 1) - base;
    ratio = observed / (delta * predicted_rate);
  }
  CHECK(ratio == doctest::Approx(1.0).epsilon(0.10));

  // small-step ascent: loss does not decrease beyond round-off
  const Image stepped = warp(img, flow, 1e-3);
  CHECK(clf.loss(stepped.data, 1) >= base - 1e-6);
}

TEST_CASE("additive application matches the first-order prediction sharply") {
  const Image img = corpus::smooth_blobs(10, 10, 1, 2, 95);
  const TinyClassifier clf = make_classifier(10, 10, 1, 2, 0, 96);
  const AdvGradient g = build_adv_gradient(clf, img, 0, GradientMode::untargeted);
  const GridOperatorSet ops = build_diff_ops(10, 10);
  auto [dx, dy] = flow_data_terms(img, g);
  const FlowField flow = solve_flow(ops, dx, dy, 1.0, 1.0);

  // the additive perturbation realizes exactly -(Zx xdot + Zy ydot)
  auto [zx, zy] = spatial_gradients(img, 0);
  GridVector pert(100);
  for (size_t i = 0; i < 100; ++i) pert[i] = -(zx[i] * flow.xdot[i] + zy[i] * flow.ydot[i]);

  const auto table = testkit::fd_loss_probe(clf, img, 0, pert, {1e-3, 1e-4, 1e-5});
  for (const auto& row : table)
    if (std::abs(row.predicted) > 1e-14)
      CHECK(row.observed / row.predicted == doctest::Approx(1.0).epsilon(0.02 + 1e3 * row.delta));

  const Image out = apply_flow_additive(img, flow, 1e-4);
  Image manual = img;
  for (size_t i = 0; i < 100; ++i) manual.data[i] += 1e-4 * pert[i];
  clamp01(manual);
  CHECK(out.data == manual.data);
}

TEST_CASE("flow files round trip at float precision") {
  FlowField flow;
  flow.m = 4;
  flow.n = 3;
  flow.xdot = corpus::random_gradient(12, 100);
  flow.ydot = corpus::random_gradient(12, 101);
  for (double& v : flow.xdot) v = static_cast<float>(v);
  for (double& v : flow.ydot) v = static_cast<float>(v);

  const auto path = std::filesystem::temp_directory_path() / "structaug_flow.saug";
  save_flow(flow, path.string());
  const FlowField back = load_flow(path.string());
  CHECK(back.m == 4);
  CHECK(back.n == 3);
  CHECK(back.xdot == flow.xdot);
  CHECK(back.ydot == flow.ydot);
}

TEST_CASE("overlay rendering marks arrows on the grid") {
  const Image img = corpus::constant(16, 16, 3, 0.5);
  FlowField flow;
  flow.m = flow.n = 16;
  flow.xdot.assign(256, 1.0);
  flow.ydot.assign(256, -0.5);
  const Image out = render_flow_overlay(img, flow, 4);
  REQUIRE(out.channels == 3);
  size_t marked = 0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      if (out.at(0, i, j) == 1.0) ++marked;
  CHECK(marked >= 16);  // one arrow per stride cell
}
