// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#include "structaug/geoflow.hpp"

#include <algorithm>
#include <cmath>

namespace structaug {

std::pair<GridVector, GridVector> flow_data_terms(const Image& img, const AdvGradient& g) {
  const size_t N = img.pixel_count();
  if (g.data.size() != N * static_cast<size_t>(img.channels))
    throw ConfigError("flow_data_terms: gradient length does not match image");

  GridVector dx(N, 0.0), dy(N, 0.0);
  for (int c = 0; c < img.channels; ++c) {
    auto [zx, zy] = spatial_gradients(img, c);
    const size_t off = static_cast<size_t>(c) * N;
    for (size_t i = 0; i < N; ++i) {
      dx[i] += zx[i] * g.data[off + i];
      dy[i] += zy[i] * g.data[off + i];
    }
  }
  return {std::move(dx), std::move(dy)};
}

FlowField solve_flow(const GridOperatorSet& ops, const GridVector& dx, const GridVector& dy,
                     double alpha, double gamma) {
  if (!(alpha > 0.0)) throw ConfigError("solve_flow: alpha must be positive");
  FlowField flow;
  flow.m = ops.m;
  flow.n = ops.n;
  flow.alpha = alpha;
  flow.gamma = gamma;
  flow.xdot = apply_regularized_inverse(ops, gamma, dx);
  flow.ydot = apply_regularized_inverse(ops, gamma, dy);
  const double s = -1.0 / alpha;
  for (double& v : flow.xdot) v *= s;
  for (double& v : flow.ydot) v *= s;
  return flow;
}

void cap_flow(FlowField& flow, double cap) {
  if (cap <= 0.0) return;
  const size_t N = flow.xdot.size();
  for (size_t i = 0; i < N; ++i) {
    const double mag = std::hypot(flow.xdot[i], flow.ydot[i]);
    if (mag > cap) {
      const double s = cap / mag;
      flow.xdot[i] *= s;
      flow.ydot[i] *= s;
    }
  }
}

namespace {

inline double lerp(double a, double b, double t) { return (1.0 - t) * a + t * b; }

// Bilinear sample of one plane at clamped continuous coordinates.
double sample_bilinear(const Image& img, int c, double y, double x) {
  const int m = img.height, n = img.width;
  y = std::min(static_cast<double>(m - 1), std::max(0.0, y));
  x = std::min(static_cast<double>(n - 1), std::max(0.0, x));
  int i0 = static_cast<int>(std::floor(y));
  int j0 = static_cast<int>(std::floor(x));
  if (i0 > m - 2) i0 = m - 2;
  if (j0 > n - 2) j0 = n - 2;
  if (i0 < 0) i0 = 0;
  if (j0 < 0) j0 = 0;
  const double fy = y - i0;
  const double fx = x - j0;
  const int i1 = std::min(i0 + 1, m - 1);
  const int j1 = std::min(j0 + 1, n - 1);
  const double top = lerp(img.at(c, i0, j0), img.at(c, i0, j1), fx);
  const double bot = lerp(img.at(c, i1, j0), img.at(c, i1, j1), fx);
  return lerp(top, bot, fy);
}

}  // namespace

Image warp(const Image& img, const FlowField& flow, double delta) {
  if (delta < 0.0) throw ConfigError("warp: delta must be >= 0");
  if (flow.m != img.height || flow.n != img.width)
    throw ConfigError("warp: flow dimensions do not match image");
  const int m = img.height, n = img.width;
  Image out(m, n, img.channels);
#pragma omp parallel for schedule(static) if (m * n > 4096)
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const size_t r = static_cast<size_t>(i) * n + j;
      const double sy = i - delta * flow.ydot[r];
      const double sx = j - delta * flow.xdot[r];
      for (int c = 0; c < img.channels; ++c) {
        const double v = sample_bilinear(img, c, sy, sx);
        out.at(c, i, j) = std::min(1.0, std::max(0.0, v));
      }
    }
  return out;
}

Image apply_flow_additive(const Image& img, const FlowField& flow, double delta) {
  if (flow.m != img.height || flow.n != img.width)
    throw ConfigError("apply_flow_additive: flow dimensions do not match image");
  const size_t N = img.pixel_count();
  Image out = img;
  for (int c = 0; c < img.channels; ++c) {
    auto [zx, zy] = spatial_gradients(img, c);
    const size_t off = static_cast<size_t>(c) * N;
    for (size_t i = 0; i < N; ++i)
      out.data[off + i] -= delta * (zx[i] * flow.xdot[i] + zy[i] * flow.ydot[i]);
  }
  clamp01(out);
  return out;
}

std::pair<Image, FlowField> geometric_augment(const Image& img, const AdvGradient& g,
                                              const GridOperatorSet& ops,
                                              const GeoflowConfig& cfg) {
  if (ops.m != img.height || ops.n != img.width)
    throw ConfigError("geometric_augment: operator set built for different dimensions");
  auto [dx, dy] = flow_data_terms(img, g);
  FlowField flow = solve_flow(ops, dx, dy, cfg.alpha, cfg.gamma);
  cap_flow(flow, cfg.cap);
  Image out = cfg.additive ? apply_flow_additive(img, flow, cfg.delta)
                           : warp(img, flow, cfg.delta);
  return {std::move(out), std::move(flow)};
}

void save_flow(const FlowField& flow, const std::string& path) {
  GridVector stacked;
  stacked.reserve(2 * flow.xdot.size());
  stacked.insert(stacked.end(), flow.xdot.begin(), flow.xdot.end());
  stacked.insert(stacked.end(), flow.ydot.begin(), flow.ydot.end());
  save_tensor(path, stacked, flow.m, flow.n, 2);
}

FlowField load_flow(const std::string& path) {
  int m = 0, n = 0, c = 0;
  GridVector stacked = load_tensor(path, &m, &n, &c);
  if (c != 2) throw IoError("flow file must have 2 channels: " + path);
  FlowField flow;
  flow.m = m;
  flow.n = n;
  const size_t N = static_cast<size_t>(m) * n;
  flow.xdot.assign(stacked.begin(), stacked.begin() + static_cast<long>(N));
  flow.ydot.assign(stacked.begin() + static_cast<long>(N), stacked.end());
  return flow;
}

namespace {

void draw_line(Image& img, double y0, double x0, double y1, double x1, double r, double g,
               double b) {
  const int steps = std::max(2, static_cast<int>(std::ceil(std::hypot(y1 - y0, x1 - x0) * 2)));
  for (int s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    const int i = static_cast<int>(std::lround(lerp(y0, y1, t)));
    const int j = static_cast<int>(std::lround(lerp(x0, x1, t)));
    if (i < 0 || i >= img.height || j < 0 || j >= img.width) continue;
    img.at(0, i, j) = r;
    img.at(1, i, j) = g;
    img.at(2, i, j) = b;
  }
}

}  // namespace

Image render_flow_overlay(const Image& img, const FlowField& flow, int stride,
                          double arrow_scale) {
  if (stride < 1) throw ConfigError("render_flow_overlay: stride must be >= 1");
  if (flow.m != img.height || flow.n != img.width)
    throw ConfigError("render_flow_overlay: flow dimensions do not match image");

  Image out(img.height, img.width, 3);
  const size_t N = img.pixel_count();
  for (size_t p = 0; p < N; ++p)
    for (int c = 0; c < 3; ++c)
      out.data[static_cast<size_t>(c) * N + p] = img.data[img.channels == 3 ? static_cast<size_t>(c) * N + p : p];

  double scale = arrow_scale;
  if (scale <= 0.0) {
    double maxmag = 0.0;
    for (size_t p = 0; p < N; ++p)
      maxmag = std::max(maxmag, std::hypot(flow.xdot[p], flow.ydot[p]));
    scale = maxmag > 0.0 ? 0.9 * stride / maxmag : 0.0;
  }

  for (int i = 0; i < img.height; i += stride)
    for (int j = 0; j < img.width; j += stride) {
      const size_t p = static_cast<size_t>(i) * img.width + j;
      const double ex = j + scale * flow.xdot[p];
      const double ey = i + scale * flow.ydot[p];
      draw_line(out, i, j, ey, ex, 1.0, 0.1, 0.1);
      const int ti = static_cast<int>(std::lround(ey));
      const int tj = static_cast<int>(std::lround(ex));
      if (ti >= 0 && ti < out.height && tj >= 0 && tj < out.width) {
        out.at(0, ti, tj) = 1.0;
        out.at(1, ti, tj) = 0.9;
        out.at(2, ti, tj) = 0.1;
      }
    }
  return out;
}

}  // namespace structaug
