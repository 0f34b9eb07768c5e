// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

/**
 * gradsource.hpp - adversarial gradient vectors and the tiny built-in
 * classifier that produces them.
 *
 * Gradients are stored in the ascent convention: perturbing the image along
 * +data increases the adversarial objective. Untargeted gradients ascend the
 * true-label loss; targeted gradients descend the target-label loss (which
 * raises the target's confidence), so both are "+data" directions.
 */

#ifndef STRUCTAUG_GRADSOURCE_HPP
#define STRUCTAUG_GRADSOURCE_HPP

#include <optional>
#include <string>

#include "structaug/image.hpp"

namespace structaug {

enum class GradientMode { untargeted, targeted };

struct AdvGradient {
  GridVector data;  // length N or 3N, planar to match the image
  GradientMode mode = GradientMode::untargeted;
  int label = 0;  // true label (untargeted) or target label (targeted)
  static constexpr bool ascent = true;
};

// --- tiny differentiable classifier ---------------------------------------

// Softmax cross-entropy over a linear map, optionally with one tanh hidden
// layer. Small enough that dense loops suffice; its role is a smooth loss
// landscape with exact analytic input gradients.
struct TinyClassifier {
  int input_m = 0;
  int input_n = 0;
  int input_c = 1;
  int classes = 0;
  int hidden = 0;  // 0 = linear

  // hidden == 0: logits = w2 * x + b2, w2 is classes x dim
  // hidden > 0:  a = w1 * x + b1; h = tanh(a); logits = w2 * h + b2
  std::vector<double> w1, b1, w2, b2;

  size_t input_dim() const { return static_cast<size_t>(input_m) * input_n * input_c; }

  std::vector<double> logits(std::span<const double> x) const;
  std::vector<double> probabilities(std::span<const double> x) const;
  double loss(std::span<const double> x, int label) const;
};

/// Deterministically initialized classifier (uniform +-1/sqrt(fan_in)).
TinyClassifier make_classifier(int m, int n, int c, int classes, int hidden, uint64_t seed);

/// Exact analytic gradient of the cross-entropy loss w.r.t. the flattened image.
GridVector input_gradient(const TinyClassifier& clf, const Image& img, int label);

// Wrap the classifier gradient in the ascent convention. Untargeted uses
// +grad on the true label; targeted uses -grad on the target label. When no
// target is given, targeted mode picks the most confident incorrect label.
AdvGradient build_adv_gradient(const TinyClassifier& clf, const Image& img, int true_label,
                               GradientMode mode, std::optional<int> target = std::nullopt);

// --- gradient files ---------------------------------------------------------

/// Load a SAUG tensor as a gradient; mode/label metadata come from the caller.
AdvGradient load_gradient(const std::string& path, int m, int n, int channels,
                          GradientMode mode = GradientMode::untargeted, int label = 0);
void save_gradient(const AdvGradient& g, const std::string& path, int m, int n, int channels);

// --- training ---------------------------------------------------------------

struct Dataset {
  std::vector<Image> images;
  std::vector<int> labels;
  int classes = 0;
};

struct TrainResult {
  TinyClassifier classifier;
  double train_accuracy = 0.0;
  double final_loss = 0.0;
  std::vector<double> loss_history;  // mean loss per epoch
};

// Full-batch gradient descent with softmax cross-entropy. Deterministic for
// a fixed seed. Aborts with NumericalError if the loss goes non-finite.
TrainResult train_tiny(const Dataset& data, int epochs, double lr, int hidden = 0,
                       uint64_t seed = 7);

// Checkpoints: a directory holding manifest.json plus SAUG weight blobs.
void save_checkpoint(const TinyClassifier& clf, const std::string& dir,
                     double train_accuracy = -1.0);
TinyClassifier load_checkpoint(const std::string& dir);

}  // namespace structaug

#endif  // STRUCTAUG_GRADSOURCE_HPP
