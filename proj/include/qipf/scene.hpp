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

// Synthetic labeled scenes: a flat background (class 0) with circles,
// rectangles and stripes of the foreground classes, each class a fixed color
// plus i.i.d. Gaussian noise. Optionally one region is recolored outside the
// training palette and marked as out-of-distribution.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "qipf/grid.hpp"

namespace qipf::toy {

using Color = std::array<double, 3>;

struct SceneConfig {
  std::size_t height = 32;
  std::size_t width = 32;
  int classes = 3;
  double noise = 0.05;
  int regions = 3;
  bool ood = false;
  /// Class color means; empty selects the built-in palette.
  std::vector<Color> palette;
};

struct SceneSample {
  Image image;  // H x W x 3 in [0, 1]
  Grid<int> labels;
  Grid<bool> ood_mask;

  friend bool operator==(const SceneSample&, const SceneSample&) = default;
};

/// Colors used for `classes` classes when the config gives no palette.
std::vector<Color> default_palette(int classes);

/// Candidate out-of-palette colors, tried in order.
std::vector<Color> ood_colors();

/// Throws InvalidConfig for H or W < 16, classes outside {3, 4}, negative noise,
/// a palette of the wrong size, or no OOD color far enough from the palette.
SceneSample generate_scene(std::uint64_t seed, const SceneConfig& config);

inline constexpr std::size_t kPixelFeatureCount = 29;

/// 3x3 color neighborhood (edge-replicated, row-major, RGB per pixel) followed
/// by row / H and col / W. Throws OutOfBounds.
std::vector<double> pixel_features(const SceneSample& sample, std::size_t row, std::size_t col);

}  // namespace qipf::toy
