// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

/**
 * corpus.hpp - deterministic desk-scale image and dataset generators.
 * Everything is a pure function of its seed; regeneration is bit-identical.
 */

#ifndef STRUCTAUG_CORPUS_HPP
#define STRUCTAUG_CORPUS_HPP

#include "structaug/gradsource.hpp"
#include "structaug/image.hpp"

namespace structaug {
namespace corpus {

Image constant(int m, int n, int channels, double value);
Image ramp_x(int m, int n, int channels);  // intensity rises with column
Image ramp_y(int m, int n, int channels);  // intensity rises with row
/// Vertical step of the given height in channel 0 at column `col`.
Image step_edge(int m, int n, int col, double lo, double hi);
Image checkerboard(int m, int n, int channels, int cell);
/// Uniform noise in [0.05, 0.95]; seeded, channel-independent.
Image noise(int m, int n, int channels, uint64_t seed);
/// Sum of smooth Gaussian bumps; gradients well resolved by the pixel grid.
Image smooth_blobs(int m, int n, int channels, int bumps, uint64_t seed);

/// Random gradient vector of the given length, entries ~N(0,1).
GridVector random_gradient(size_t len, uint64_t seed);

/// Mixed bag of corpus images (constant, ramps, edges, boards, noise, blobs)
/// over sizes from `min_side` to `max_side`.
std::vector<Image> desk_images(int min_side, int max_side, int channels, uint64_t seed);

// Labeled datasets for the tiny classifier. Bars: smooth oriented gratings,
// linearly separable by orientation x frequency (2 or 4 classes). Blobs: a
// bump in one of four quadrants.
Dataset bars_dataset(int m, int n, int channels, int classes, int count, uint64_t seed);
Dataset blobs_dataset(int m, int n, int channels, int count, uint64_t seed);

}  // namespace corpus
}  // namespace structaug

#endif  // STRUCTAUG_CORPUS_HPP
