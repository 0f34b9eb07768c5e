// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#include "structaug/corpus.hpp"

#include <cmath>

namespace structaug {
namespace corpus {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Image constant(int m, int n, int channels, double value) {
  return Image(m, n, channels, value);
}

Image ramp_x(int m, int n, int channels) {
  Image img(m, n, channels);
  for (int c = 0; c < channels; ++c)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) img.at(c, i, j) = n > 1 ? static_cast<double>(j) / (n - 1) : 0.0;
  return img;
}

Image ramp_y(int m, int n, int channels) {
  Image img(m, n, channels);
  for (int c = 0; c < channels; ++c)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) img.at(c, i, j) = m > 1 ? static_cast<double>(i) / (m - 1) : 0.0;
  return img;
}

Image step_edge(int m, int n, int col, double lo, double hi) {
  Image img(m, n, 3, lo);
  for (int i = 0; i < m; ++i)
    for (int j = col; j < n; ++j) img.at(0, i, j) = hi;
  return img;
}

Image checkerboard(int m, int n, int channels, int cell) {
  Image img(m, n, channels);
  for (int c = 0; c < channels; ++c)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        img.at(c, i, j) = (((i / cell) + (j / cell)) % 2 == 0) ? 0.85 : 0.15;
  return img;
}

Image noise(int m, int n, int channels, uint64_t seed) {
  SplitMix64 rng(seed);
  Image img(m, n, channels);
  for (double& v : img.data) v = rng.uniform(0.05, 0.95);
  return img;
}

Image smooth_blobs(int m, int n, int channels, int bumps, uint64_t seed) {
  SplitMix64 rng(seed);
  Image img(m, n, channels, 0.5);
  for (int b = 0; b < bumps; ++b) {
    const double cy = rng.uniform(0.15, 0.85) * (m - 1);
    const double cx = rng.uniform(0.15, 0.85) * (n - 1);
    const double sigma = rng.uniform(0.12, 0.3) * std::min(m, n);
    const double amp = rng.uniform(-0.35, 0.35);
    const int ch = channels == 1 ? 0 : static_cast<int>(rng.next() % channels);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        const double d2 = (i - cy) * (i - cy) + (j - cx) * (j - cx);
        img.at(ch, i, j) += amp * std::exp(-d2 / (2.0 * sigma * sigma));
      }
  }
  for (double& v : img.data) v = std::min(0.95, std::max(0.05, v));
  return img;
}

GridVector random_gradient(size_t len, uint64_t seed) {
  SplitMix64 rng(seed);
  GridVector g(len);
  for (double& v : g) v = rng.normal();
  return g;
}

std::vector<Image> desk_images(int min_side, int max_side, int channels, uint64_t seed) {
  std::vector<Image> out;
  uint64_t sub = 0;
  for (int side = min_side; side <= max_side; side *= 2) {
    out.push_back(constant(side, side, channels, 0.4));
    out.push_back(ramp_x(side, side, channels));
    out.push_back(ramp_y(side, side, channels));
    if (channels == 3) out.push_back(step_edge(side, side, side / 2, 0.2, 0.8));
    out.push_back(checkerboard(side, side, channels, std::max(1, side / 4)));
    out.push_back(noise(side, side, channels, seed + 101 * ++sub));
    out.push_back(smooth_blobs(side, side, channels, 3, seed + 101 * ++sub));
    // one non-square instance per size band
    if (side * 2 <= max_side)
      out.push_back(smooth_blobs(side, side * 2, channels, 3, seed + 101 * ++sub));
  }
  return out;
}

Dataset bars_dataset(int m, int n, int channels, int classes, int count, uint64_t seed) {
  if (classes != 2 && classes != 4) throw ConfigError("bars_dataset: classes must be 2 or 4");
  Dataset data;
  data.classes = classes;
  data.images.reserve(count);
  data.labels.reserve(count);

  for (int s = 0; s < count; ++s) {
    SplitMix64 rng = SplitMix64::substream(seed, static_cast<uint64_t>(s));
    const int label = static_cast<int>(rng.next() % classes);
    const bool horizontal = (label % 2) == 0;
    const double cycles = (classes == 4 && label >= 2) ? 3.0 : 1.0;
    const double amp = rng.uniform(0.25, 0.4);

    Image img(m, n, channels, 0.5);
    for (int c = 0; c < channels; ++c)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          const double t = horizontal ? static_cast<double>(i) / m : static_cast<double>(j) / n;
          double v = 0.5 + amp * std::sin(2.0 * kPi * cycles * t);
          v += 0.02 * (rng.uniform01() - 0.5);  // mild noise, keeps separability
          img.at(c, i, j) = std::min(0.95, std::max(0.05, v));
        }
    data.images.push_back(std::move(img));
    data.labels.push_back(label);
  }
  return data;
}

Dataset blobs_dataset(int m, int n, int channels, int count, uint64_t seed) {
  Dataset data;
  data.classes = 4;
  data.images.reserve(count);
  data.labels.reserve(count);

  for (int s = 0; s < count; ++s) {
    SplitMix64 rng = SplitMix64::substream(seed ^ 0xB10B5ULL, static_cast<uint64_t>(s));
    const int label = static_cast<int>(rng.next() % 4);
    const double cy = ((label / 2 == 0) ? 0.25 : 0.75) * (m - 1) + rng.uniform(-0.08, 0.08) * m;
    const double cx = ((label % 2 == 0) ? 0.25 : 0.75) * (n - 1) + rng.uniform(-0.08, 0.08) * n;
    const double sigma = rng.uniform(0.1, 0.18) * std::min(m, n);

    Image img(m, n, channels, 0.3);
    for (int c = 0; c < channels; ++c)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          const double d2 = (i - cy) * (i - cy) + (j - cx) * (j - cx);
          double v = 0.3 + 0.5 * std::exp(-d2 / (2.0 * sigma * sigma));
          v += 0.02 * (rng.uniform01() - 0.5);
          img.at(c, i, j) = std::min(0.95, std::max(0.05, v));
        }
    data.images.push_back(std::move(img));
    data.labels.push_back(label);
  }
  return data;
}

}  // namespace corpus
}  // namespace structaug
