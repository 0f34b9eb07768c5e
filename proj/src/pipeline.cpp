// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#include "structaug/pipeline.hpp"

#include <cmath>

namespace structaug {

void AugmentConfig::validate() const {
  if (probability < 0.0 || probability > 1.0)
    throw ConfigError("probability must be in [0,1]");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (!(flow.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (flow.gamma < 0.0) throw ConfigError("gamma must be >= 0");
  if (flow.delta < 0.0) throw ConfigError("delta must be >= 0");
  if (!(recolor.lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(recolor.mu > 0.0)) throw ConfigError("mu must be positive");
  if (!(recolor.eps > 0.0)) throw ConfigError("eps must be positive");
  if (recolor.k < 1) throw ConfigError("k must be >= 1");
  if (!(recolor.scale > 0.0)) throw ConfigError("scale must be positive");
}

AdvGradient FileSource::gradient(const Image& img, int label, size_t index) const {
  if (index >= paths_.size())
    throw ConfigError("gradient file source: no file for batch index " + std::to_string(index));
  return load_gradient(paths_[index], img.height, img.width, img.channels, mode_, label);
}

namespace {

Image apply_transform(const Image& img, const AdvGradient& g, const AugmentConfig& cfg,
                      const GridOperatorSet* ops, const OperatorCache* cache,
                      FlowField* flow_out = nullptr) {
  if (cfg.transform == Transform::flow) {
    auto [out, flow] = geometric_augment(img, g, *ops, cfg.flow);
    if (flow_out) *flow_out = std::move(flow);
    return std::move(out);
  }
  // Recolor: the eigen-subspace is the expensive part; reuse it via the
  // cache when one is attached (content-hash keyed, so intermediate images
  // of an iteration get their own entries).
  if (cfg.recolor.project && cache) {
    const uint64_t id = img.content_hash();
    std::optional<EigenSubspace> sub = cache->load_subspace(id, cfg.recolor.eps, cfg.recolor.k);
    if (!sub) {
      const RecolorOperator op =
          build_recolor_operator(img, cfg.recolor.eps, cfg.recolor.max_pixels);
      EigOptions eopts;
      eopts.seed = cfg.recolor.eig_seed;
      EigenSubspace fresh = smallest_eigs(op.gram, cfg.recolor.k, cfg.recolor.mu, eopts);
#pragma omp critical(structaug_cache_write)
      {
        if (!cache->has_subspace(id, cfg.recolor.eps, cfg.recolor.k))
          cache->store_subspace(id, cfg.recolor.eps, cfg.recolor.k, fresh);
      }
      sub = std::move(fresh);
    }
    return photometric_augment(img, g, cfg.recolor, &*sub);
  }
  return photometric_augment(img, g, cfg.recolor);
}

Image run_iterations(const Image& img, int label, const GradientSource& source,
                     const AugmentConfig& cfg, const GridOperatorSet* ops,
                     const OperatorCache* cache, std::vector<Image>* trajectory) {
  Image current = img;
  for (int t = 0; t < cfg.iterations; ++t) {
    const AdvGradient g = source.gradient(current, label, 0);
    current = apply_transform(current, g, cfg, ops, cache);
    if (trajectory) trajectory->push_back(current);
  }
  return current;
}

}  // namespace

BatchResult augment_batch(const std::vector<Image>& images, const std::vector<int>& labels,
                          const GradientSource& source, const AugmentConfig& cfg,
                          const OperatorCache* cache) {
  cfg.validate();
  if (images.size() != labels.size())
    throw ConfigError("augment_batch: image/label count mismatch");
  if (cfg.iterations > 1 && !source.supports_recompute())
    throw ConfigError("augment_batch: iterated application needs a gradient source that "
                      "can recompute on intermediate images");

  GridOperatorSet ops;
  if (cfg.transform == Transform::flow && !images.empty()) {
    for (const Image& img : images)
      if (img.height != images.front().height || img.width != images.front().width)
        throw ConfigError("augment_batch: geoflow batches must share dimensions");
    ops = cache ? cache->get_flow_ops(images.front().height, images.front().width,
                                      cfg.flow.gamma)
                : build_diff_ops(images.front().height, images.front().width);
  }

  BatchResult out;
  out.images.resize(images.size());
  out.augmented.assign(images.size(), false);
  const bool collect = cfg.collect_flows && cfg.transform == Transform::flow;
  if (collect) out.flows.resize(images.size());

  // Exceptions cannot unwind across the parallel region; capture the first
  // one and rethrow afterwards.
  std::exception_ptr failure = nullptr;
  const long count = static_cast<long>(images.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    const size_t idx = static_cast<size_t>(i);
    try {
      SplitMix64 rng = SplitMix64::substream(cfg.seed, idx);
      const bool fire = rng.uniform01() < cfg.probability;
      out.augmented[idx] = fire ? 1 : 0;
      if (!fire) {
        out.images[idx] = images[idx];  // pass-through, byte-identical
        continue;
      }
      Image current = images[idx];
      for (int t = 0; t < cfg.iterations; ++t) {
        const AdvGradient g = source.gradient(current, labels[idx], idx);
        current = apply_transform(current, g, cfg,
                                  cfg.transform == Transform::flow ? &ops : nullptr, cache,
                                  collect ? &out.flows[idx] : nullptr);
      }
      out.images[idx] = std::move(current);
    } catch (...) {
#pragma omp critical(structaug_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (uint8_t b : out.augmented)
    if (b) ++out.augmented_count;
  return out;
}

std::vector<Image> iterate_augment(const Image& img, int label, const GradientSource& source,
                                   const AugmentConfig& cfg, const OperatorCache* cache) {
  cfg.validate();
  if (!source.supports_recompute() && cfg.iterations > 1)
    throw ConfigError("iterate_augment: gradient source cannot recompute on intermediate "
                      "images");

  GridOperatorSet ops;
  if (cfg.transform == Transform::flow)
    ops = cache ? cache->get_flow_ops(img.height, img.width, cfg.flow.gamma)
                : build_diff_ops(img.height, img.width);

  std::vector<Image> trajectory;
  trajectory.reserve(static_cast<size_t>(cfg.iterations) + 1);
  trajectory.push_back(img);
  run_iterations(img, label, source, cfg,
                 cfg.transform == Transform::flow ? &ops : nullptr, cache, &trajectory);
  return trajectory;
}

Image augment_one(const Image& img, int label, const GradientSource& source,
                  const AugmentConfig& cfg, const OperatorCache* cache) {
  AugmentConfig single = cfg;
  single.iterations = 1;
  single.validate();
  GridOperatorSet ops;
  if (cfg.transform == Transform::flow)
    ops = cache ? cache->get_flow_ops(img.height, img.width, cfg.flow.gamma)
                : build_diff_ops(img.height, img.width);
  return run_iterations(img, label, source, single,
                        cfg.transform == Transform::flow ? &ops : nullptr, cache, nullptr);
}

PrecomputeStats precompute_flow(OperatorCache& cache, int m, int n, double gamma) {
  PrecomputeStats stats;
  if (cache.has_flow_ops(m, n, gamma)) {
    // validate the existing entry (throws on version mismatch or corruption)
    cache.load_flow_ops(m, n, gamma);
    ++stats.skipped;
    return stats;
  }
  cache.store_flow_ops(build_diff_ops(m, n), gamma);
  ++stats.written;
  return stats;
}

PrecomputeStats precompute_recolor(OperatorCache& cache, const std::vector<Image>& images,
                                   const RecolorConfig& cfg) {
  PrecomputeStats stats;
  for (const Image& img : images) {
    const uint64_t id = img.content_hash();
    if (cache.has_subspace(id, cfg.eps, cfg.k)) {
      cache.load_subspace(id, cfg.eps, cfg.k);
      ++stats.skipped;
      continue;
    }
    const RecolorOperator op = build_recolor_operator(img, cfg.eps, cfg.max_pixels);
    EigOptions eopts;
    eopts.seed = cfg.eig_seed;
    cache.store_subspace(id, cfg.eps, cfg.k, smallest_eigs(op.gram, cfg.k, cfg.mu, eopts));
    ++stats.written;
  }
  return stats;
}

}  // namespace structaug
