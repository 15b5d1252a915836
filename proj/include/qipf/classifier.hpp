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

#pragma once

// One-hidden-layer pixel classifier (ReLU, inverted dropout on the hidden
// layer, softmax output) trained by minibatch SGD on cross-entropy. Its
// pre-softmax logits are the feature space the density methods work in.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qipf/grid.hpp"
#include "qipf/scene.hpp"

namespace qipf::toy {

struct TrainHyper {
  std::size_t hidden = 32;
  double lr = 0.1;
  int epochs = 10;
  std::size_t batch = 64;
  double dropout_rate = 0.1;
};

class PixelClassifier {
 public:
  PixelClassifier() = default;
  /// Xavier-uniform weights from `seed`, zero biases.
  PixelClassifier(std::size_t inputs, std::size_t hidden, std::size_t outputs, double dropout_rate,
                  std::uint64_t seed);

  std::size_t inputs() const noexcept { return inputs_; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t outputs() const noexcept { return outputs_; }
  double dropout_rate() const noexcept { return dropout_rate_; }

  // Row-major: w1 is hidden x inputs, w2 is outputs x hidden.
  std::vector<double> w1, b1, w2, b2;

  double train_accuracy = 0.0;
  /// Mean training loss before the first epoch, then after each epoch.
  std::vector<double> loss_history;

  bool same_architecture(const PixelClassifier& other) const noexcept {
    return inputs_ == other.inputs_ && hidden_ == other.hidden_ && outputs_ == other.outputs_;
  }

  /// Logits for one feature vector. `mask`, if non-empty, multiplies the hidden
  /// activations (already scaled by 1 / (1 - p)).
  void logits(std::span<const double> x, std::span<const double> mask, std::span<double> out) const;

 private:
  std::size_t inputs_ = 0;
  std::size_t hidden_ = 0;
  std::size_t outputs_ = 0;
  double dropout_rate_ = 0.0;
};

struct Gradients {
  std::vector<double> w1, b1, w2, b2;
};

/// Mean cross-entropy over the batch and its gradient. `inputs` is row-major
/// batch x model.inputs(); `masks`, when non-empty, is batch x model.hidden().
double loss_and_gradient(const PixelClassifier& model, std::span<const double> inputs, std::span<const int> labels,
                         std::span<const double> masks, Gradients* grad);

/// Weights start from PixelClassifier(29, hidden, C, rate, derive_seed(seed, 0));
/// shuffling and dropout masks draw from derive_seed(seed, 1). C is one more
/// than the largest label seen. Throws InvalidConfig for empty scenes or
/// non-positive hyperparameters and NonFiniteLoss on divergence.
PixelClassifier train(std::span<const SceneSample> scenes, const TrainHyper& hyper, std::uint64_t seed);

struct FeatureTensor {
  Image features;  // H x W x F pre-softmax
  Image probs;     // H x W x C
  Grid<int> preds;

  /// Softmax and argmax (ties to the lowest class) of raw logits.
  static FeatureTensor from_features(Image features);

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;
};

struct ForwardOptions {
  bool dropout = false;
  std::uint64_t seed = 0;
  /// Incremented once per full-frame forward pass when set.
  std::atomic<std::uint64_t>* counter = nullptr;
};

/// Throws DimensionMismatch when the model does not take pixel features.
FeatureTensor forward(const PixelClassifier& model, const SceneSample& sample, const ForwardOptions& options = {});

}  // namespace qipf::toy
