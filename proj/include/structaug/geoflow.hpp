// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

/**
 * geoflow.hpp - adversarial motion fields and image warping.
 *
 * The flow solves the regularized brightness-constancy objective: with
 * data terms dx = Zx .* g and dy = Zy .* g the components are
 * xdot = -(1/alpha) (I + gamma P)^-1 dx (and likewise ydot), so the loss
 * rate -d'flow is nonnegative by the SPD quadratic form.
 */

#ifndef STRUCTAUG_GEOFLOW_HPP
#define STRUCTAUG_GEOFLOW_HPP

#include "structaug/diffops.hpp"
#include "structaug/gradsource.hpp"
#include "structaug/image.hpp"

namespace structaug {

struct FlowField {
  int m = 0;
  int n = 0;
  GridVector xdot;  // N, pixels per unit t along columns
  GridVector ydot;  // N, pixels per unit t along rows
  double alpha = 1.0;
  double gamma = 0.0;
};

struct GeoflowConfig {
  double alpha = 1.0;
  double gamma = 1.0;
  double delta = 1.0;    // warp step
  double cap = 3.0;      // max per-pixel displacement; <= 0 disables
  bool additive = false; // first-order additive application instead of warping
};

// Elementwise data terms dx = Zx .* g, dy = Zy .* g; RGB gradients reduce by
// summing the per-channel products so one flow field serves all channels.
std::pair<GridVector, GridVector> flow_data_terms(const Image& img, const AdvGradient& g);

FlowField solve_flow(const GridOperatorSet& ops, const GridVector& dx, const GridVector& dy,
                     double alpha, double gamma);

/// Rescale per-pixel displacements exceeding `cap` back onto the cap radius.
void cap_flow(FlowField& flow, double cap);

// Backward-mapped bilinear warp: output (i, j) samples the input at
// (i - delta*ydot, j - delta*xdot). Sample coordinates clamp to the image
// rectangle; sampling is x-lerp then y-lerp with lerp(a,b,t) = (1-t)*a + t*b.
// Output intensities clamp to [0,1].
Image warp(const Image& img, const FlowField& flow, double delta);

/// First-order additive variant: z - delta*(Zx.*xdot + Zy.*ydot) per channel.
Image apply_flow_additive(const Image& img, const FlowField& flow, double delta);

/// Full pipeline step: data terms -> regularized solve -> warp (or additive).
std::pair<Image, FlowField> geometric_augment(const Image& img, const AdvGradient& g,
                                              const GridOperatorSet& ops,
                                              const GeoflowConfig& cfg);

// Flow persistence: SAUG tensor with channels = 2 (xdot plane, ydot plane).
void save_flow(const FlowField& flow, const std::string& path);
FlowField load_flow(const std::string& path);

// Arrow overlay on a decimated grid, for visual inspection of flows.
// arrow_scale <= 0 picks a scale so the longest arrow spans ~0.9*stride.
Image render_flow_overlay(const Image& img, const FlowField& flow, int stride,
                          double arrow_scale = 0.0);

}  // namespace structaug

#endif  // STRUCTAUG_GEOFLOW_HPP
