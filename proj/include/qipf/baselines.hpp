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

// Comparison uncertainty estimators. Each yields a per-pixel map in [0, 1].

#include <atomic>
#include <cstdint>
#include <span>
#include <string_view>

#include "qipf/classifier.hpp"
#include "qipf/grid.hpp"

namespace qipf::baselines {

enum class Method { Qipf, Softmax, McDropout, Ensemble };

std::string_view to_string(Method method) noexcept;

struct UncertaintyMap {
  Grid<double> values;
  Method method = Method::Qipf;

  friend bool operator==(const UncertaintyMap&, const UncertaintyMap&) = default;
};

/// 1 - max_c p_c per pixel.
UncertaintyMap softmax_uncertainty(const toy::FeatureTensor& ft);

/// Entropy of the mean softmax over `passes` dropout forwards, divided by ln C.
/// Pass p uses derive_seed(seed, p). Throws InvalidPasses for passes < 2. A
/// model with dropout rate 0 gives identical passes, i.e. the plain entropy.
UncertaintyMap mc_dropout_uncertainty(const toy::PixelClassifier& model, const toy::SceneSample& sample, int passes,
                                      std::uint64_t seed, std::atomic<std::uint64_t>* counter = nullptr);

/// Population standard deviation across members of the probability each
/// member gives the ensemble-mean predicted class, divided by 0.5.
/// Throws HeterogeneousEnsemble for fewer than two members or mixed shapes.
UncertaintyMap ensemble_uncertainty(std::span<const toy::PixelClassifier> models, const toy::SceneSample& sample,
                                    std::atomic<std::uint64_t>* counter = nullptr);

/// The ensemble statistic on precomputed member outputs.
UncertaintyMap ensemble_uncertainty(std::span<const toy::FeatureTensor> members);

/// Normalized predictive entropy of the mean of precomputed softmax outputs.
UncertaintyMap mean_entropy_uncertainty(std::span<const toy::FeatureTensor> passes);

}  // namespace qipf::baselines
