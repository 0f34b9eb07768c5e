// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#include "structaug/image.hpp"

#include <algorithm>
#include <cstring>

namespace structaug {

uint64_t Image::content_hash() const {
  uint32_t dims[3] = {static_cast<uint32_t>(height), static_cast<uint32_t>(width),
                      static_cast<uint32_t>(channels)};
  uint64_t h = fnv1a64(dims, sizeof(dims));
  return fnv1a64(data.data(), data.size() * sizeof(double), h);
}

void clamp01(Image& img) {
  const long n = static_cast<long>(img.data.size());
#pragma omp parallel for schedule(static) if (n > 16384)
  for (long i = 0; i < n; ++i) {
    double v = img.data[static_cast<size_t>(i)];
    img.data[static_cast<size_t>(i)] = std::min(1.0, std::max(0.0, v));
  }
}

GridVector vectorize(const Image& img, int channel) {
  if (channel < 0 || channel >= img.channels)
    throw ConfigError("vectorize: channel " + std::to_string(channel) + " out of range");
  const size_t N = img.pixel_count();
  const size_t off = static_cast<size_t>(channel) * N;
  return GridVector(img.data.begin() + off, img.data.begin() + off + N);
}

Image unvectorize(const GridVector& v, int m, int n) {
  if (v.size() != static_cast<size_t>(m) * n)
    throw ConfigError("unvectorize: length does not match grid dimensions");
  Image img(m, n, 1);
  img.data = v;
  return img;
}

GridVector to_vector(const Image& img) { return img.data; }

Image from_vector(const GridVector& v, int m, int n, int channels) {
  if (v.size() != static_cast<size_t>(m) * n * channels)
    throw ConfigError("from_vector: length does not match dimensions");
  Image img(m, n, channels);
  img.data = v;
  return img;
}

std::pair<GridVector, GridVector> spatial_gradients(const Image& img, int channel) {
  if (img.height < 2 || img.width < 2)
    throw ConfigError("spatial_gradients: degenerate 1-pixel dimension");
  if (channel < 0 || channel >= img.channels)
    throw ConfigError("spatial_gradients: channel out of range");
  const int m = img.height, n = img.width;
  const size_t N = img.pixel_count();
  GridVector gx(N, 0.0), gy(N, 0.0);
#pragma omp parallel for schedule(static) if (m * n > 16384)
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const size_t r = static_cast<size_t>(i) * n + j;
      if (j < n - 1) gx[r] = img.at(channel, i, j + 1) - img.at(channel, i, j);
      if (i < m - 1) gy[r] = img.at(channel, i + 1, j) - img.at(channel, i, j);
    }
  }
  return {std::move(gx), std::move(gy)};
}

}  // namespace structaug
