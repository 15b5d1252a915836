/*
 * Copyright 2026 The QIPF Toolkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "qipf/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qipf/error.hpp"
#include "qipf/rng.hpp"

namespace qipf::toy {

namespace {

void softmax(std::span<const double> logits, std::span<double> probs) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    probs[c] = std::exp(logits[c] - mx);
    total += probs[c];
  }
  for (double& p : probs) p /= total;
}

void draw_mask(Rng& rng, double rate, std::span<double> mask) {
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask) m = rng.uniform() >= rate ? keep_scale : 0.0;
}

}  // namespace

PixelClassifier::PixelClassifier(std::size_t inputs, std::size_t hidden, std::size_t outputs, double dropout_rate,
                                 std::uint64_t seed)
    : w1(hidden * inputs),
      b1(hidden, 0.0),
      w2(outputs * hidden),
      b2(outputs, 0.0),
      inputs_(inputs),
      hidden_(hidden),
      outputs_(outputs),
      dropout_rate_(dropout_rate) {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "dropout rate must lie in [0, 1)");
  }
  Rng rng(seed);
  const double a1 = std::sqrt(6.0 / static_cast<double>(inputs + hidden));
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden + outputs));
  for (double& w : w1) w = rng.uniform(-a1, a1);
  for (double& w : w2) w = rng.uniform(-a2, a2);
}

void PixelClassifier::logits(std::span<const double> x, std::span<const double> mask, std::span<double> out) const {
  std::vector<double> act(hidden_);
  for (std::size_t h = 0; h < hidden_; ++h) {
    const double* row = w1.data() + h * inputs_;
    double z = b1[h];
    for (std::size_t i = 0; i < inputs_; ++i) z += row[i] * x[i];
    z = std::max(z, 0.0);
    act[h] = mask.empty() ? z : z * mask[h];
  }
  for (std::size_t o = 0; o < outputs_; ++o) {
    const double* row = w2.data() + o * hidden_;
    double z = b2[o];
    for (std::size_t h = 0; h < hidden_; ++h) z += row[h] * act[h];
    out[o] = z;
  }
}

double loss_and_gradient(const PixelClassifier& model, std::span<const double> inputs, std::span<const int> labels,
                         std::span<const double> masks, Gradients* grad) {
  const std::size_t nin = model.inputs();
  const std::size_t nh = model.hidden();
  const std::size_t nout = model.outputs();
  const std::size_t batch = labels.size();
  if (grad != nullptr) {
    grad->w1.assign(model.w1.size(), 0.0);
    grad->b1.assign(nh, 0.0);
    grad->w2.assign(model.w2.size(), 0.0);
    grad->b2.assign(nout, 0.0);
  }
  std::vector<double> pre(nh), act(nh), logits(nout), probs(nout), dlogit(nout), dact(nh);
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(batch);
  for (std::size_t s = 0; s < batch; ++s) {
    const double* x = inputs.data() + s * nin;
    for (std::size_t h = 0; h < nh; ++h) {
      const double* row = model.w1.data() + h * nin;
      double z = model.b1[h];
      for (std::size_t i = 0; i < nin; ++i) z += row[i] * x[i];
      pre[h] = z;
      const double m = masks.empty() ? 1.0 : masks[s * nh + h];
      act[h] = std::max(z, 0.0) * m;
    }
    for (std::size_t o = 0; o < nout; ++o) {
      const double* row = model.w2.data() + o * nh;
      double z = model.b2[o];
      for (std::size_t h = 0; h < nh; ++h) z += row[h] * act[h];
      logits[o] = z;
    }
    softmax(logits, probs);
    const auto y = static_cast<std::size_t>(labels[s]);
    loss -= std::log(std::max(probs[y], 1e-300)) * inv_b;
    if (grad == nullptr) continue;

    for (std::size_t o = 0; o < nout; ++o) dlogit[o] = (probs[o] - (o == y ? 1.0 : 0.0)) * inv_b;
    std::fill(dact.begin(), dact.end(), 0.0);
    for (std::size_t o = 0; o < nout; ++o) {
      grad->b2[o] += dlogit[o];
      double* grow = grad->w2.data() + o * nh;
      const double* wrow = model.w2.data() + o * nh;
      for (std::size_t h = 0; h < nh; ++h) {
        grow[h] += dlogit[o] * act[h];
        dact[h] += dlogit[o] * wrow[h];
      }
    }
    for (std::size_t h = 0; h < nh; ++h) {
      const double m = masks.empty() ? 1.0 : masks[s * nh + h];
      const double dpre = pre[h] > 0.0 ? dact[h] * m : 0.0;
      if (dpre == 0.0) continue;
      grad->b1[h] += dpre;
      double* grow = grad->w1.data() + h * nin;
      for (std::size_t i = 0; i < nin; ++i) grow[i] += dpre * x[i];
    }
  }
  return loss;
}

PixelClassifier train(std::span<const SceneSample> scenes, const TrainHyper& hyper, std::uint64_t seed) {
  if (scenes.empty()) throw Error(ErrorCode::InvalidConfig, "training needs at least one scene");
  if (hyper.hidden == 0 || hyper.batch == 0 || hyper.epochs < 0 || !(hyper.lr > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "hyperparameters must be positive");
  }
  int classes = 0;
  std::vector<double> inputs;
  std::vector<int> labels;
  for (const auto& sc : scenes) {
    for (std::size_t r = 0; r < sc.labels.rows(); ++r) {
      for (std::size_t c = 0; c < sc.labels.cols(); ++c) {
        const auto f = pixel_features(sc, r, c);
        inputs.insert(inputs.end(), f.begin(), f.end());
        labels.push_back(sc.labels(r, c));
        classes = std::max(classes, sc.labels(r, c) + 1);
      }
    }
  }
  classes = std::max(classes, 2);

  PixelClassifier model(kPixelFeatureCount, hyper.hidden, static_cast<std::size_t>(classes), hyper.dropout_rate,
                        derive_seed(seed, 0));
  const std::size_t n = labels.size();
  const std::size_t nin = kPixelFeatureCount;
  const std::size_t nh = hyper.hidden;

  auto full_loss = [&] { return loss_and_gradient(model, inputs, labels, {}, nullptr); };
  model.loss_history.push_back(full_loss());

  Rng rng(derive_seed(seed, 1));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> bx, bmask;
  std::vector<int> by;
  Gradients g;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
    for (std::size_t start = 0; start < n; start += hyper.batch) {
      const std::size_t end = std::min(n, start + hyper.batch);
      bx.clear();
      by.clear();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        bx.insert(bx.end(), inputs.begin() + static_cast<std::ptrdiff_t>(idx * nin),
                  inputs.begin() + static_cast<std::ptrdiff_t>((idx + 1) * nin));
        by.push_back(labels[idx]);
      }
      bmask.assign(by.size() * nh, 1.0);
      if (hyper.dropout_rate > 0.0) draw_mask(rng, hyper.dropout_rate, bmask);
      const double loss = loss_and_gradient(model, bx, by, bmask, &g);
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::NonFiniteLoss, "loss diverged in epoch " + std::to_string(epoch));
      }
      for (std::size_t i = 0; i < g.w1.size(); ++i) model.w1[i] -= hyper.lr * g.w1[i];
      for (std::size_t i = 0; i < g.b1.size(); ++i) model.b1[i] -= hyper.lr * g.b1[i];
      for (std::size_t i = 0; i < g.w2.size(); ++i) model.w2[i] -= hyper.lr * g.w2[i];
      for (std::size_t i = 0; i < g.b2.size(); ++i) model.b2[i] -= hyper.lr * g.b2[i];
    }
    const double epoch_loss = full_loss();
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorCode::NonFiniteLoss, "loss diverged after epoch " + std::to_string(epoch));
    }
    model.loss_history.push_back(epoch_loss);
  }

  std::size_t correct = 0;
  std::vector<double> out(model.outputs());
  for (std::size_t s = 0; s < n; ++s) {
    model.logits(std::span<const double>(inputs.data() + s * nin, nin), {}, out);
    const auto pred = std::max_element(out.begin(), out.end()) - out.begin();
    if (pred == labels[s]) ++correct;
  }
  model.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
  return model;
}

FeatureTensor FeatureTensor::from_features(Image features) {
  const std::size_t H = features.height();
  const std::size_t W = features.width();
  const std::size_t C = features.channels();
  FeatureTensor ft{std::move(features), Image(H, W, C), Grid<int>(H, W, 0)};
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      const auto p = ft.probs.pixel(r, c);
      softmax(ft.features.pixel(r, c), p);
      ft.preds(r, c) = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    }
  }
  return ft;
}

FeatureTensor forward(const PixelClassifier& model, const SceneSample& sample, const ForwardOptions& options) {
  if (model.inputs() != kPixelFeatureCount || sample.image.channels() != 3) {
    throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(model.inputs()) +
                                                  " inputs, pixel features have " + std::to_string(kPixelFeatureCount));
  }
  const std::size_t H = sample.image.height();
  const std::size_t W = sample.image.width();
  Image features(H, W, model.outputs());
  Rng rng(options.seed);
  std::vector<double> mask;
  if (options.dropout) mask.resize(model.hidden());
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      const auto x = pixel_features(sample, r, c);
      if (options.dropout) draw_mask(rng, model.dropout_rate(), mask);
      model.logits(x, mask, features.pixel(r, c));
    }
  }
  if (options.counter != nullptr) options.counter->fetch_add(1, std::memory_order_relaxed);
  return FeatureTensor::from_features(std::move(features));
}

}  // namespace qipf::toy
