// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

/**
 * pipeline.hpp - batch augmentation policy around the two generators.
 *
 * Each batch item draws its augmentation coin from a per-index substream of
 * the config seed, so results are bit-identical for any worker count.
 * Skipped images pass through untouched. The adversarial transform applies
 * first; any standard augmentation is the caller's responsibility afterward.
 */

#ifndef STRUCTAUG_PIPELINE_HPP
#define STRUCTAUG_PIPELINE_HPP

#include <memory>

#include "structaug/cache.hpp"
#include "structaug/geoflow.hpp"
#include "structaug/photometric.hpp"

namespace structaug {

enum class Transform { flow, recolor };

struct AugmentConfig {
  Transform transform = Transform::flow;
  double probability = 0.5;
  int iterations = 1;
  GeoflowConfig flow;
  RecolorConfig recolor;
  uint64_t seed = 0;
  GradientMode mode = GradientMode::untargeted;
  std::optional<int> target_label;
  // Keep per-image flow fields (last iteration) in the batch result, for
  // flow-file export and overlays.
  bool collect_flows = false;

  void validate() const;
};

// Supplies the adversarial gradient for one batch item. Sources that cannot
// recompute on intermediate images (files) reject iterated application.
class GradientSource {
 public:
  virtual ~GradientSource() = default;
  virtual AdvGradient gradient(const Image& img, int label, size_t index) const = 0;
  virtual bool supports_recompute() const { return true; }
};

class ClassifierSource final : public GradientSource {
 public:
  ClassifierSource(TinyClassifier clf, GradientMode mode,
                   std::optional<int> target = std::nullopt)
      : clf_(std::move(clf)), mode_(mode), target_(target) {}

  AdvGradient gradient(const Image& img, int label, size_t) const override {
    return build_adv_gradient(clf_, img, label, mode_, target_);
  }
  const TinyClassifier& classifier() const { return clf_; }

 private:
  TinyClassifier clf_;
  GradientMode mode_;
  std::optional<int> target_;
};

/// Reads one SAUG gradient file per batch item; paths align with item order.
class FileSource final : public GradientSource {
 public:
  FileSource(std::vector<std::string> paths, GradientMode mode)
      : paths_(std::move(paths)), mode_(mode) {}

  AdvGradient gradient(const Image& img, int label, size_t index) const override;
  bool supports_recompute() const override { return false; }

 private:
  std::vector<std::string> paths_;
  GradientMode mode_;
};

/// A zero gradient for every item; the identity policy.
class ZeroSource final : public GradientSource {
 public:
  AdvGradient gradient(const Image& img, int label, size_t) const override {
    AdvGradient g;
    g.label = label;
    g.data.assign(img.data.size(), 0.0);
    return g;
  }
};

struct BatchResult {
  std::vector<Image> images;
  // nonzero where the policy coin fired (uint8_t: distinct slots stay
  // race-free under the parallel batch loop)
  std::vector<uint8_t> augmented;
  size_t augmented_count = 0;
  // filled only when cfg.collect_flows is set and the transform is flow;
  // empty FlowField for skipped images
  std::vector<FlowField> flows;
};

// Augment each image independently with probability cfg.probability,
// applying cfg.iterations gradient-recompute steps. Geoflow batches must
// share dimensions (one operator set serves the whole batch).
BatchResult augment_batch(const std::vector<Image>& images, const std::vector<int>& labels,
                          const GradientSource& source, const AugmentConfig& cfg,
                          const OperatorCache* cache = nullptr);

// T gradient-recompute iterations on one image; returns the full trajectory
// of T+1 images (element 0 is the input).
std::vector<Image> iterate_augment(const Image& img, int label, const GradientSource& source,
                                   const AugmentConfig& cfg,
                                   const OperatorCache* cache = nullptr);

/// Single augmentation step (iterations and probability ignored).
Image augment_one(const Image& img, int label, const GradientSource& source,
                  const AugmentConfig& cfg, const OperatorCache* cache = nullptr);

struct PrecomputeStats {
  size_t written = 0;
  size_t skipped = 0;  // already present with a matching key
};

// Persist the geoflow operator set for the given dims and/or per-image
// recolor subspaces. Idempotent: existing entries are left alone.
PrecomputeStats precompute_flow(OperatorCache& cache, int m, int n, double gamma);
PrecomputeStats precompute_recolor(OperatorCache& cache, const std::vector<Image>& images,
                                   const RecolorConfig& cfg);

}  // namespace structaug

#endif  // STRUCTAUG_PIPELINE_HPP
