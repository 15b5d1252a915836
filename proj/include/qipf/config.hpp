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

// Experiment configuration. The file format is flat UTF-8 `key = value` text;
// `#` starts a comment, blank lines are ignored, every key has a default and
// unknown keys are rejected.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qipf/classifier.hpp"
#include "qipf/decomposition.hpp"
#include "qipf/hermite.hpp"
#include "qipf/scene.hpp"

namespace qipf {

enum class Granularity { Pixel, Class };

struct QipfSettings {
  int modes = 12;
  double silverman_factor = 1.0;
  /// Pick the factor from `silverman_grid` by validation PAvPU at t = 0.5.
  bool silverman_cv = true;
  std::vector<double> silverman_grid = {0.5, 1, 5, 10, 30, 50, 100};
  std::size_t n_max = 256;
  decomp::Normalization normalization = decomp::Normalization::L2;
  Granularity granularity = Granularity::Pixel;
  bool whiten = false;
};

struct ExperimentConfig {
  toy::SceneConfig scene;
  bool ood_val = false;
  bool ood_test = true;
  std::size_t train_frames = 20;
  std::size_t val_frames = 5;
  std::size_t test_frames = 10;
  toy::TrainHyper hyper;
  QipfSettings qipf;
  int mc_passes = 100;
  std::size_t ensemble_size = 8;
  std::size_t patch = 8;
  double t_step = 0.05;
  std::uint64_t seed = 42;
  std::size_t threads = 1;
};

/// Throws Error(InvalidConfig) naming the offending line.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks cross-field invariants (counts >= 1, factors > 0, ...).
void validate(const ExperimentConfig& cfg);

/// Canonical `key = value` rendering; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& cfg);

std::string_view to_string(Granularity g) noexcept;
std::string_view to_string(decomp::Normalization n) noexcept;

}  // namespace qipf
