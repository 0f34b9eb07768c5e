// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

/**
 * image.hpp - dense image grids, vectorization, and discrete gradients.
 *
 * Images are planar row-major: channel c occupies offsets [c*N, (c+1)*N)
 * with N = height*width, and entry i*width + j maps to pixel (row i, col j).
 * Intensities live in [0,1]; 8-bit inputs are divided by 255 on load.
 */

#ifndef STRUCTAUG_IMAGE_HPP
#define STRUCTAUG_IMAGE_HPP

#include <string>
#include <utility>

#include "structaug/common.hpp"

namespace structaug {

struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;  // planar, row-major per channel

  Image() = default;
  Image(int m, int n, int c, double fill = 0.0)
      : height(m), width(n), channels(c),
        data(static_cast<size_t>(m) * n * c, fill) {}

  size_t pixel_count() const { return static_cast<size_t>(height) * width; }
  size_t size() const { return data.size(); }

  double& at(int c, int i, int j) {
    return data[(static_cast<size_t>(c) * height + i) * width + j];
  }
  double at(int c, int i, int j) const {
    return data[(static_cast<size_t>(c) * height + i) * width + j];
  }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }

  /// Content hash over dims and raw intensity bits; keys per-image caches.
  uint64_t content_hash() const;
};

/// Clamp every intensity into [0,1] in place.
void clamp01(Image& img);

// vec / unvec: row-major flattening of one channel plane. Round trips are
// bit-identical.
GridVector vectorize(const Image& img, int channel);
Image unvectorize(const GridVector& v, int m, int n);

/// All channels stacked planar into one vector of length channels*N.
GridVector to_vector(const Image& img);
Image from_vector(const GridVector& v, int m, int n, int channels);

// Forward-difference gradients with zero entries along the trailing
// boundary (last column for d/dx, last row for d/dy). Matches the stencil
// encoded by the sparse operators in diffops.hpp bit-for-bit.
// Requires m >= 2 and n >= 2.
std::pair<GridVector, GridVector> spatial_gradients(const Image& img, int channel);

// --- file formats ------------------------------------------------------

// PNG (8-bit gray or RGB; palette/alpha inputs are normalized) and binary
// PPM (P6). Format chosen by extension in load_image/save_image.
Image load_image(const std::string& path);
void save_image(const Image& img, const std::string& path);

Image load_png(const std::string& path);
void save_png(const Image& img, const std::string& path);
Image load_ppm(const std::string& path);
void save_ppm(const Image& img, const std::string& path);

// Raw tensor interchange: 16-byte header (magic "SAUG", u32 m, u32 n,
// u32 channels, little-endian) followed by m*n*channels float32 values in
// planar row-major order.
void save_tensor(const std::string& path, const GridVector& v, int m, int n, int channels);
GridVector load_tensor(const std::string& path, int* m, int* n, int* channels);

}  // namespace structaug

#endif  // STRUCTAUG_IMAGE_HPP
