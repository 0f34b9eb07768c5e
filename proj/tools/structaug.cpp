// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

// structaug - structured adversarial augmentation CLI.
//
// Subcommands: augment {flow|recolor}, precompute, eigen, demo-train,
// overlay. Exit codes: 0 success, 2 config error, 3 numerical failure,
// 4 IO error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include "structaug/corpus.hpp"
#include "structaug/pipeline.hpp"

namespace fs = std::filesystem;
using namespace structaug;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

std::pair<int, int> parse_dims(const std::string& spec) {
  const size_t x = spec.find('x');
  if (x == std::string::npos)
    throw ConfigError("dimension spec must look like MxN, got: " + spec);
  try {
    const int m = std::stoi(spec.substr(0, x));
    const int n = std::stoi(spec.substr(x + 1));
    if (m < 2 || n < 2) throw ConfigError("dimensions must be at least 2x2: " + spec);
    return {m, n};
  } catch (const std::logic_error&) {
    throw ConfigError("cannot parse dimension spec: " + spec);
  }
}

std::vector<fs::path> list_images(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .png or .ppm images in " + dir);
  return files;
}

std::map<std::string, int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels file: " + path);
  std::map<std::string, int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw ConfigError("labels file line is not 'filename,label': " + line);
    try {
      labels[line.substr(0, comma)] = std::stoi(line.substr(comma + 1));
    } catch (const std::logic_error&) {
      throw ConfigError("bad label in line: " + line);
    }
  }
  return labels;
}

int label_for(const std::map<std::string, int>& labels, const fs::path& file) {
  auto it = labels.find(file.filename().string());
  if (it == labels.end()) it = labels.find(file.stem().string());
  return it == labels.end() ? 0 : it->second;
}

struct AugmentArgs {
  std::string transform;
  std::string in_dir, out_dir;
  std::string grad_spec;
  std::string labels_file;
  std::string cache_dir;
  std::string flow_dir;
  std::string mode = "untargeted";
  std::string apply = "warp";
  std::string recolor_mode = "project";
  int target_label = -1;
  int threads = 0;
  AugmentConfig cfg;
};

std::unique_ptr<GradientSource> make_source(const AugmentArgs& args,
                                            const std::vector<fs::path>& files) {
  const std::string& spec = args.grad_spec;
  const GradientMode mode =
      args.mode == "targeted" ? GradientMode::targeted : GradientMode::untargeted;
  if (spec == "zero") return std::make_unique<ZeroSource>();
  if (spec.rfind("tiny:", 0) == 0) {
    TinyClassifier clf = load_checkpoint(spec.substr(5));
    std::optional<int> target;
    if (args.target_label >= 0) target = args.target_label;
    return std::make_unique<ClassifierSource>(std::move(clf), mode, target);
  }
  if (spec.rfind("files:", 0) == 0) {
    const fs::path dir = spec.substr(6);
    if (!fs::is_directory(dir)) throw IoError("gradient directory missing: " + dir.string());
    std::vector<std::string> paths;
    for (const fs::path& f : files) {
      const fs::path g = dir / (f.stem().string() + ".saug");
      if (!fs::exists(g))
        throw IoError("no gradient file for " + f.filename().string() + " (expected " +
                      g.string() + ")");
      paths.push_back(g.string());
    }
    return std::make_unique<FileSource>(std::move(paths), mode);
  }
  throw ConfigError("--grad must be tiny:CKPT, files:DIR, or zero (got '" + spec + "')");
}

int run_augment(const AugmentArgs& args) {
  AugmentConfig cfg = args.cfg;
  cfg.transform = args.transform == "flow" ? Transform::flow : Transform::recolor;
  cfg.mode = args.mode == "targeted" ? GradientMode::targeted : GradientMode::untargeted;
  if (args.target_label >= 0) cfg.target_label = args.target_label;
  cfg.flow.additive = args.apply == "additive";
  cfg.recolor.project = args.recolor_mode == "project";
  cfg.collect_flows = !args.flow_dir.empty();
  cfg.validate();
  if (args.threads > 0) par::set_threads(args.threads);

  const std::vector<fs::path> files = list_images(args.in_dir);
  std::map<std::string, int> label_map;
  if (!args.labels_file.empty()) label_map = load_labels(args.labels_file);

  std::vector<Image> images;
  std::vector<int> labels;
  for (const fs::path& f : files) {
    images.push_back(load_image(f.string()));
    labels.push_back(label_for(label_map, f));
  }

  const std::unique_ptr<GradientSource> source = make_source(args, files);

  std::optional<OperatorCache> cache;
  if (!args.cache_dir.empty()) cache.emplace(args.cache_dir);

  const BatchResult result =
      augment_batch(images, labels, *source, cfg, cache ? &*cache : nullptr);

  fs::create_directories(args.out_dir);
  if (!args.flow_dir.empty()) fs::create_directories(args.flow_dir);
  for (size_t i = 0; i < files.size(); ++i) {
    const fs::path out = fs::path(args.out_dir) / files[i].filename();
    if (result.augmented[i]) {
      save_image(result.images[i], out.string());
      if (!args.flow_dir.empty() && cfg.transform == Transform::flow)
        save_flow(result.flows[i],
                  (fs::path(args.flow_dir) / (files[i].stem().string() + ".saug")).string());
    } else {
      // untouched images are copied byte-for-byte, never re-encoded
      fs::copy_file(files[i], out, fs::copy_options::overwrite_existing);
    }
  }
  std::cout << "augmented " << result.augmented_count << " of " << files.size()
            << " images into " << args.out_dir << "\n";
  return 0;
}

int run_precompute(const std::string& cache_dir, const std::vector<std::string>& dims,
                   double gamma, const std::string& in_dir, const RecolorConfig& rcfg) {
  if (dims.empty() && in_dir.empty())
    throw ConfigError("precompute needs --dims and/or --in");
  OperatorCache cache(cache_dir);
  size_t written = 0, skipped = 0;
  for (const std::string& spec : dims) {
    auto [m, n] = parse_dims(spec);
    const PrecomputeStats stats = precompute_flow(cache, m, n, gamma);
    written += stats.written;
    skipped += stats.skipped;
  }
  if (!in_dir.empty()) {
    std::vector<Image> images;
    for (const fs::path& f : list_images(in_dir)) images.push_back(load_image(f.string()));
    const PrecomputeStats stats = precompute_recolor(cache, images, rcfg);
    written += stats.written;
    skipped += stats.skipped;
  }
  std::cout << "cache " << cache_dir << ": " << written << " entries written, " << skipped
            << " already present\n";
  return 0;
}

int run_eigen(const std::string& image_path, size_t k, double eps, double mu, uint64_t seed,
              const std::string& out_dir) {
  if (!fs::exists(image_path)) throw IoError("image not found: " + image_path);
  const Image img = load_image(image_path);
  const RecolorOperator op = build_recolor_operator(img, eps);
  EigOptions opts;
  opts.seed = seed;
  const EigenSubspace sub = smallest_eigs(op.gram, k, mu, opts);

  std::cout << "# bottom-" << k << " eigenvalues of the recolor operator ("
            << img.height << "x" << img.width << ", eps=" << eps << ")\n";
  for (size_t i = 0; i < sub.values.size(); ++i)
    std::cout << i << " " << std::scientific << sub.values[i] << "\n";

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "values.csv");
    csv << "index,eigenvalue\n";
    for (size_t i = 0; i < sub.values.size(); ++i) {
      csv << i << "," << std::scientific << sub.values[i] << "\n";
      char name[32];
      std::snprintf(name, sizeof(name), "ev_%03zu.saug", i);
      save_tensor((fs::path(out_dir) / name).string(), sub.vectors[i], img.height, img.width,
                  3);
    }
    std::cout << "wrote eigenvectors to " << out_dir << "\n";
  }
  return 0;
}

int run_demo_train(const std::string& dataset, const std::string& out, const std::string& size,
                   int classes, int count, int epochs, double lr, const std::string& arch,
                   int hidden, uint64_t seed) {
  auto [m, n] = parse_dims(size);
  Dataset data;
  if (dataset == "blobs")
    data = corpus::blobs_dataset(m, n, 3, count, seed);
  else if (dataset == "bars" || dataset == "synth")
    data = corpus::bars_dataset(m, n, 3, classes, count, seed);
  else
    throw ConfigError("--dataset must be synth, bars, or blobs");

  const TrainResult result = train_tiny(data, epochs, lr, arch == "mlp" ? hidden : 0, seed);
  save_checkpoint(result.classifier, out, result.train_accuracy);
  std::cout << "trained " << arch << " classifier on " << dataset << " (" << count
            << " samples, " << data.classes << " classes): train accuracy "
            << result.train_accuracy << ", final loss " << result.final_loss << "\n"
            << "checkpoint written to " << out << "\n";
  return 0;
}

int run_overlay(const std::string& image_path, const std::string& flow_path, int stride,
                double arrow_scale, const std::string& out) {
  if (!fs::exists(image_path)) throw IoError("image not found: " + image_path);
  if (!fs::exists(flow_path)) throw IoError("flow file not found: " + flow_path);
  const Image img = load_image(image_path);
  const FlowField flow = load_flow(flow_path);
  const Image overlay = render_flow_overlay(img, flow, stride, arrow_scale);
  save_image(overlay, out);
  std::cout << "wrote overlay to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structured adversarial augmentation (smooth flows and recolorizations)"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file mirroring the flags; flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  // ---- augment ----
  AugmentArgs aug;
  CLI::App* augment = app.add_subcommand("augment", "augment a directory of images");
  augment->add_option("transform", aug.transform, "flow or recolor")
      ->required()
      ->check(CLI::IsMember({"flow", "recolor"}));
  augment->add_option("--in", aug.in_dir, "input image directory")->required();
  augment->add_option("--out", aug.out_dir, "output image directory")->required();
  augment->add_option("--prob", aug.cfg.probability, "per-image augmentation probability");
  augment->add_option("--alpha", aug.cfg.flow.alpha, "flow magnitude penalty");
  augment->add_option("--gamma", aug.cfg.flow.gamma, "flow smoothness ratio beta/alpha");
  augment->add_option("--delta", aug.cfg.flow.delta, "warp step size");
  augment->add_option("--cap", aug.cfg.flow.cap, "max per-pixel displacement (<=0 disables)");
  augment->add_option("--lambda", aug.cfg.recolor.lambda, "recolor penalty weight");
  augment->add_option("--mu", aug.cfg.recolor.mu, "Tikhonov guard / eigen shift");
  augment->add_option("--k", aug.cfg.recolor.k, "recolor subspace size");
  augment->add_option("--eps", aug.cfg.recolor.eps, "edginess guard");
  augment->add_option("--scale", aug.cfg.recolor.scale, "recolor max-norm budget");
  augment->add_option("--iterations", aug.cfg.iterations, "gradient-recompute iterations");
  augment->add_option("--seed", aug.cfg.seed, "policy PRNG seed");
  augment->add_option("--mode", aug.mode, "gradient mode")
      ->check(CLI::IsMember({"targeted", "untargeted"}));
  augment->add_option("--target-label", aug.target_label,
                      "target class (targeted mode; default auto-select)");
  augment->add_option("--grad", aug.grad_spec, "gradient source: tiny:CKPT, files:DIR, or zero")
      ->required();
  augment->add_option("--labels", aug.labels_file, "CSV file of filename,label rows");
  augment->add_option("--cache", aug.cache_dir, "operator cache directory");
  augment->add_option("--save-flow", aug.flow_dir, "directory for flow tensors (flow only)");
  augment->add_option("--apply", aug.apply, "flow application mode")
      ->check(CLI::IsMember({"warp", "additive"}));
  augment->add_option("--recolor-mode", aug.recolor_mode, "recolor realization")
      ->check(CLI::IsMember({"project", "solve"}));
  augment->add_option("--threads", aug.threads, "worker threads (default: all)");

  // ---- precompute ----
  std::string pc_cache, pc_in;
  std::vector<std::string> pc_dims;
  double pc_gamma = 1.0;
  RecolorConfig pc_recolor;
  CLI::App* precompute = app.add_subcommand("precompute", "persist operator cache entries");
  precompute->add_option("--cache", pc_cache, "cache directory")->required();
  precompute->add_option("--dims", pc_dims, "grid dims MxN for flow operators (repeatable)");
  precompute->add_option("--gamma", pc_gamma, "smoothness ratio keyed into flow entries");
  precompute->add_option("--in", pc_in, "image directory for recolor subspaces");
  precompute->add_option("--eps", pc_recolor.eps, "edginess guard");
  precompute->add_option("--k", pc_recolor.k, "subspace size");
  precompute->add_option("--mu", pc_recolor.mu, "eigen shift");
  precompute->add_option("--seed", pc_recolor.eig_seed, "eigen start-vector seed");

  // ---- eigen ----
  std::string eig_img, eig_out;
  size_t eig_k = 2;
  double eig_eps = 1e-3, eig_mu = 1e-4;
  uint64_t eig_seed = 0x5EED5EED5EEDULL;
  CLI::App* eigen = app.add_subcommand("eigen", "dump recolor eigenvalues/eigenvectors");
  eigen->add_option("image", eig_img, "RGB image file")->required();
  eigen->add_option("--k", eig_k, "number of bottom eigenpairs");
  eigen->add_option("--eps", eig_eps, "edginess guard");
  eigen->add_option("--mu", eig_mu, "eigen shift");
  eigen->add_option("--seed", eig_seed, "start-vector seed");
  eigen->add_option("--out", eig_out, "directory for eigenvector tensors");

  // ---- demo-train ----
  std::string dt_dataset = "synth", dt_out, dt_size = "8x8", dt_arch = "linear";
  int dt_classes = 4, dt_count = 400, dt_epochs = 300, dt_hidden = 16;
  double dt_lr = 1.0;
  uint64_t dt_seed = 7;
  CLI::App* demo = app.add_subcommand("demo-train", "train the built-in tiny classifier");
  demo->add_option("--dataset", dt_dataset, "synth, bars, or blobs");
  demo->add_option("--out", dt_out, "checkpoint directory")->required();
  demo->add_option("--size", dt_size, "image dims MxN");
  demo->add_option("--classes", dt_classes, "bars classes (2 or 4)");
  demo->add_option("--count", dt_count, "dataset size");
  demo->add_option("--epochs", dt_epochs, "training epochs");
  demo->add_option("--lr", dt_lr, "learning rate");
  demo->add_option("--arch", dt_arch, "linear or mlp")
      ->check(CLI::IsMember({"linear", "mlp"}));
  demo->add_option("--hidden", dt_hidden, "hidden width for mlp");
  demo->add_option("--seed", dt_seed, "init/dataset seed");

  // ---- overlay ----
  std::string ov_img, ov_flow, ov_out = "overlay.png";
  int ov_stride = 4;
  double ov_scale = 0.0;
  CLI::App* overlay = app.add_subcommand("overlay", "rasterize flow arrows onto an image");
  overlay->add_option("image", ov_img, "base image")->required();
  overlay->add_option("flow", ov_flow, "flow tensor (channels = 2)")->required();
  overlay->add_option("--stride", ov_stride, "arrow grid stride");
  overlay->add_option("--arrow-scale", ov_scale, "display scale (0 = auto)");
  overlay->add_option("--out", ov_out, "output PNG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (augment->parsed()) return run_augment(aug);
    if (precompute->parsed())
      return run_precompute(pc_cache, pc_dims, pc_gamma, pc_in, pc_recolor);
    if (eigen->parsed()) return run_eigen(eig_img, eig_k, eig_eps, eig_mu, eig_seed, eig_out);
    if (demo->parsed())
      return run_demo_train(dt_dataset, dt_out, dt_size, dt_classes, dt_count, dt_epochs,
                            dt_lr, dt_arch, dt_hidden, dt_seed);
    if (overlay->parsed()) return run_overlay(ov_img, ov_flow, ov_stride, ov_scale, ov_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
