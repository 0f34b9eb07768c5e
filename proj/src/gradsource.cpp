// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#include "structaug/gradsource.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace structaug {

namespace {

std::vector<double> softmax(std::vector<double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
  return logits;
}

void check_input(const TinyClassifier& clf, size_t dim) {
  if (dim != clf.input_dim())
    throw ConfigError("classifier expects input of length " + std::to_string(clf.input_dim()) +
                      ", got " + std::to_string(dim));
}

}  // namespace

std::vector<double> TinyClassifier::logits(std::span<const double> x) const {
  check_input(*this, x.size());
  const size_t dim = input_dim();
  std::vector<double> out(classes, 0.0);
  if (hidden == 0) {
    for (int c = 0; c < classes; ++c) {
      double s = b2[c];
      const double* row = &w2[static_cast<size_t>(c) * dim];
      for (size_t i = 0; i < dim; ++i) s += row[i] * x[i];
      out[c] = s;
    }
    return out;
  }
  std::vector<double> h(hidden);
  for (int u = 0; u < hidden; ++u) {
    double s = b1[u];
    const double* row = &w1[static_cast<size_t>(u) * dim];
    for (size_t i = 0; i < dim; ++i) s += row[i] * x[i];
    h[u] = std::tanh(s);
  }
  for (int c = 0; c < classes; ++c) {
    double s = b2[c];
    const double* row = &w2[static_cast<size_t>(c) * hidden];
    for (int u = 0; u < hidden; ++u) s += row[u] * h[u];
    out[c] = s;
  }
  return out;
}

std::vector<double> TinyClassifier::probabilities(std::span<const double> x) const {
  return softmax(logits(x));
}

double TinyClassifier::loss(std::span<const double> x, int label) const {
  if (label < 0 || label >= classes) throw ConfigError("loss: label out of range");
  std::vector<double> lg = logits(x);
  const double mx = *std::max_element(lg.begin(), lg.end());
  double sum = 0.0;
  for (double v : lg) sum += std::exp(v - mx);
  return std::log(sum) + mx - lg[label];
}

TinyClassifier make_classifier(int m, int n, int c, int classes, int hidden, uint64_t seed) {
  if (classes < 2) throw ConfigError("make_classifier: need at least 2 classes");
  TinyClassifier clf;
  clf.input_m = m;
  clf.input_n = n;
  clf.input_c = c;
  clf.classes = classes;
  clf.hidden = hidden;
  const size_t dim = clf.input_dim();

  SplitMix64 rng(seed);
  auto init = [&rng](std::vector<double>& w, size_t count, size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    w.resize(count);
    for (double& v : w) v = rng.uniform(-bound, bound);
  };
  if (hidden == 0) {
    init(clf.w2, static_cast<size_t>(classes) * dim, dim);
    clf.b2.assign(classes, 0.0);
  } else {
    init(clf.w1, static_cast<size_t>(hidden) * dim, dim);
    clf.b1.assign(hidden, 0.0);
    init(clf.w2, static_cast<size_t>(classes) * hidden, hidden);
    clf.b2.assign(classes, 0.0);
  }
  return clf;
}

GridVector input_gradient(const TinyClassifier& clf, const Image& img, int label) {
  if (label < 0 || label >= clf.classes) throw ConfigError("input_gradient: label out of range");
  check_input(clf, img.data.size());
  const size_t dim = clf.input_dim();
  const std::vector<double>& x = img.data;

  // r = softmax(logits) - onehot(label)
  std::vector<double> r;
  GridVector grad(dim, 0.0);
  if (clf.hidden == 0) {
    r = softmax(clf.logits(x));
    r[label] -= 1.0;
    for (int c = 0; c < clf.classes; ++c) {
      const double* row = &clf.w2[static_cast<size_t>(c) * dim];
      const double rc = r[c];
      for (size_t i = 0; i < dim; ++i) grad[i] += rc * row[i];
    }
    return grad;
  }

  std::vector<double> a(clf.hidden), h(clf.hidden);
  for (int u = 0; u < clf.hidden; ++u) {
    double s = clf.b1[u];
    const double* row = &clf.w1[static_cast<size_t>(u) * dim];
    for (size_t i = 0; i < dim; ++i) s += row[i] * x[i];
    a[u] = s;
    h[u] = std::tanh(s);
  }
  std::vector<double> lg(clf.classes);
  for (int c = 0; c < clf.classes; ++c) {
    double s = clf.b2[c];
    const double* row = &clf.w2[static_cast<size_t>(c) * clf.hidden];
    for (int u = 0; u < clf.hidden; ++u) s += row[u] * h[u];
    lg[c] = s;
  }
  r = softmax(std::move(lg));
  r[label] -= 1.0;

  // back through logits = w2 h + b2, h = tanh(a), a = w1 x + b1
  std::vector<double> dh(clf.hidden, 0.0);
  for (int c = 0; c < clf.classes; ++c) {
    const double* row = &clf.w2[static_cast<size_t>(c) * clf.hidden];
    for (int u = 0; u < clf.hidden; ++u) dh[u] += r[c] * row[u];
  }
  for (int u = 0; u < clf.hidden; ++u) {
    const double da = dh[u] * (1.0 - h[u] * h[u]);
    const double* row = &clf.w1[static_cast<size_t>(u) * dim];
    for (size_t i = 0; i < dim; ++i) grad[i] += da * row[i];
  }
  return grad;
}

AdvGradient build_adv_gradient(const TinyClassifier& clf, const Image& img, int true_label,
                               GradientMode mode, std::optional<int> target) {
  AdvGradient g;
  g.mode = mode;
  if (mode == GradientMode::untargeted) {
    g.label = true_label;
    g.data = input_gradient(clf, img, true_label);
    return g;
  }

  int tgt;
  if (target.has_value()) {
    tgt = *target;
    if (tgt == true_label)
      throw ConfigError("build_adv_gradient: target equals the true label");
  } else {
    // most confident incorrect label
    const std::vector<double> p = clf.probabilities(img.data);
    tgt = -1;
    double best = -1.0;
    for (int c = 0; c < clf.classes; ++c) {
      if (c == true_label) continue;
      if (p[c] > best) {
        best = p[c];
        tgt = c;
      }
    }
  }
  g.label = tgt;
  g.data = input_gradient(clf, img, tgt);
  for (double& v : g.data) v = -v;  // descend the target loss = raise its confidence
  return g;
}

AdvGradient load_gradient(const std::string& path, int m, int n, int channels,
                          GradientMode mode, int label) {
  int fm = 0, fn = 0, fc = 0;
  GridVector v = load_tensor(path, &fm, &fn, &fc);
  if (fm != m || fn != n || fc != channels)
    throw ConfigError("load_gradient: file " + path + " has dims " + std::to_string(fm) + "x" +
                      std::to_string(fn) + "x" + std::to_string(fc) + ", expected " +
                      std::to_string(m) + "x" + std::to_string(n) + "x" +
                      std::to_string(channels));
  for (double x : v)
    if (!std::isfinite(x))
      throw NumericalError("load_gradient: non-finite entries in " + path);
  AdvGradient g;
  g.data = std::move(v);
  g.mode = mode;
  g.label = label;
  return g;
}

void save_gradient(const AdvGradient& g, const std::string& path, int m, int n, int channels) {
  save_tensor(path, g.data, m, n, channels);
}

TrainResult train_tiny(const Dataset& data, int epochs, double lr, int hidden, uint64_t seed) {
  if (data.images.empty()) throw ConfigError("train_tiny: empty dataset");
  if (data.images.size() != data.labels.size())
    throw ConfigError("train_tiny: image/label count mismatch");
  const Image& first = data.images.front();

  TrainResult result;
  result.classifier = make_classifier(first.height, first.width, first.channels, data.classes,
                                      hidden, seed);
  TinyClassifier& clf = result.classifier;
  const size_t dim = clf.input_dim();
  const size_t count = data.images.size();

  std::vector<double> gw1(clf.w1.size()), gb1(clf.b1.size());
  std::vector<double> gw2(clf.w2.size()), gb2(clf.b2.size());
  std::vector<double> h(std::max(clf.hidden, 1)), dh(std::max(clf.hidden, 1));

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::fill(gw1.begin(), gw1.end(), 0.0);
    std::fill(gb1.begin(), gb1.end(), 0.0);
    std::fill(gw2.begin(), gw2.end(), 0.0);
    std::fill(gb2.begin(), gb2.end(), 0.0);
    double total_loss = 0.0;

    for (size_t s = 0; s < count; ++s) {
      const std::vector<double>& x = data.images[s].data;
      const int label = data.labels[s];
      if (label < 0 || label >= data.classes)
        throw ConfigError("train_tiny: label out of range in dataset");

      std::vector<double> r;
      if (clf.hidden == 0) {
        r = softmax(clf.logits(x));
        total_loss += -std::log(std::max(r[label], 1e-300));
        r[label] -= 1.0;
        for (int c = 0; c < clf.classes; ++c) {
          double* grow = &gw2[static_cast<size_t>(c) * dim];
          for (size_t i = 0; i < dim; ++i) grow[i] += r[c] * x[i];
          gb2[c] += r[c];
        }
      } else {
        for (int u = 0; u < clf.hidden; ++u) {
          double a = clf.b1[u];
          const double* row = &clf.w1[static_cast<size_t>(u) * dim];
          for (size_t i = 0; i < dim; ++i) a += row[i] * x[i];
          h[u] = std::tanh(a);
        }
        std::vector<double> lg(clf.classes);
        for (int c = 0; c < clf.classes; ++c) {
          double v = clf.b2[c];
          const double* row = &clf.w2[static_cast<size_t>(c) * clf.hidden];
          for (int u = 0; u < clf.hidden; ++u) v += row[u] * h[u];
          lg[c] = v;
        }
        r = softmax(std::move(lg));
        total_loss += -std::log(std::max(r[label], 1e-300));
        r[label] -= 1.0;
        std::fill(dh.begin(), dh.end(), 0.0);
        for (int c = 0; c < clf.classes; ++c) {
          double* grow = &gw2[static_cast<size_t>(c) * clf.hidden];
          const double* row = &clf.w2[static_cast<size_t>(c) * clf.hidden];
          for (int u = 0; u < clf.hidden; ++u) {
            grow[u] += r[c] * h[u];
            dh[u] += r[c] * row[u];
          }
          gb2[c] += r[c];
        }
        for (int u = 0; u < clf.hidden; ++u) {
          const double da = dh[u] * (1.0 - h[u] * h[u]);
          double* grow = &gw1[static_cast<size_t>(u) * dim];
          for (size_t i = 0; i < dim; ++i) grow[i] += da * x[i];
          gb1[u] += da;
        }
      }
    }

    const double mean_loss = total_loss / static_cast<double>(count);
    if (!std::isfinite(mean_loss))
      throw NumericalError("train_tiny: loss diverged at epoch " + std::to_string(epoch) +
                           " (mean loss not finite)");
    result.final_loss = mean_loss;
    result.loss_history.push_back(mean_loss);

    const double step = lr / static_cast<double>(count);
    for (size_t i = 0; i < clf.w1.size(); ++i) clf.w1[i] -= step * gw1[i];
    for (size_t i = 0; i < clf.b1.size(); ++i) clf.b1[i] -= step * gb1[i];
    for (size_t i = 0; i < clf.w2.size(); ++i) clf.w2[i] -= step * gw2[i];
    for (size_t i = 0; i < clf.b2.size(); ++i) clf.b2[i] -= step * gb2[i];
  }

  size_t correct = 0;
  for (size_t s = 0; s < count; ++s) {
    const std::vector<double> lg = clf.logits(data.images[s].data);
    const int pred = static_cast<int>(std::max_element(lg.begin(), lg.end()) - lg.begin());
    if (pred == data.labels[s]) ++correct;
  }
  result.train_accuracy = static_cast<double>(correct) / static_cast<double>(count);
  return result;
}

void save_checkpoint(const TinyClassifier& clf, const std::string& dir, double train_accuracy) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("save_checkpoint: cannot create directory " + dir);

  auto blob = [&dir](const std::string& name, const std::vector<double>& w, int rows, int cols) {
    save_tensor((fs::path(dir) / name).string(), w, rows, cols, 1);
  };

  nlohmann::json manifest;
  manifest["format"] = "structaug-checkpoint";
  manifest["version"] = 1;
  manifest["arch"] = clf.hidden == 0 ? "linear" : "mlp";
  manifest["input"] = {{"m", clf.input_m}, {"n", clf.input_n}, {"channels", clf.input_c}};
  manifest["classes"] = clf.classes;
  manifest["hidden"] = clf.hidden;
  if (train_accuracy >= 0.0) manifest["train_accuracy"] = train_accuracy;

  const int dim = static_cast<int>(clf.input_dim());
  if (clf.hidden == 0) {
    blob("w2.saug", clf.w2, clf.classes, dim);
    blob("b2.saug", clf.b2, 1, clf.classes);
    manifest["files"] = {{"w2", "w2.saug"}, {"b2", "b2.saug"}};
  } else {
    blob("w1.saug", clf.w1, clf.hidden, dim);
    blob("b1.saug", clf.b1, 1, clf.hidden);
    blob("w2.saug", clf.w2, clf.classes, clf.hidden);
    blob("b2.saug", clf.b2, 1, clf.classes);
    manifest["files"] = {{"w1", "w1.saug"}, {"b1", "b1.saug"}, {"w2", "w2.saug"}, {"b2", "b2.saug"}};
  }

  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw IoError("save_checkpoint: cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
}

TinyClassifier load_checkpoint(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw IoError("load_checkpoint: missing manifest.json in " + dir);
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_checkpoint: malformed manifest in " + dir + ": " + e.what());
  }
  if (manifest.value("format", "") != "structaug-checkpoint")
    throw IoError("load_checkpoint: not a classifier checkpoint: " + dir);

  TinyClassifier clf;
  clf.input_m = manifest["input"]["m"].get<int>();
  clf.input_n = manifest["input"]["n"].get<int>();
  clf.input_c = manifest["input"]["channels"].get<int>();
  clf.classes = manifest["classes"].get<int>();
  clf.hidden = manifest["hidden"].get<int>();

  auto blob = [&dir](const std::string& name) {
    int m = 0, n = 0, c = 0;
    return load_tensor((fs::path(dir) / name).string(), &m, &n, &c);
  };
  const auto& files = manifest["files"];
  if (clf.hidden > 0) {
    clf.w1 = blob(files["w1"].get<std::string>());
    clf.b1 = blob(files["b1"].get<std::string>());
  }
  clf.w2 = blob(files["w2"].get<std::string>());
  clf.b2 = blob(files["b2"].get<std::string>());

  const size_t dim = clf.input_dim();
  const size_t expect_w2 = clf.hidden == 0 ? static_cast<size_t>(clf.classes) * dim
                                           : static_cast<size_t>(clf.classes) * clf.hidden;
  if (clf.w2.size() != expect_w2 || clf.b2.size() != static_cast<size_t>(clf.classes) ||
      (clf.hidden > 0 && clf.w1.size() != static_cast<size_t>(clf.hidden) * dim))
    throw IoError("load_checkpoint: weight blob dimensions inconsistent with manifest in " + dir);
  return clf;
}

}  // namespace structaug
