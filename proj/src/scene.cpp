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

#include "qipf/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qipf/error.hpp"
#include "qipf/rng.hpp"

namespace qipf::toy {

namespace {

double color_distance(const Color& a, const Color& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

enum class Shape { Circle, Rectangle, Stripe };

void validate(const SceneConfig& cfg) {
  if (cfg.height < 16 || cfg.width < 16) throw Error(ErrorCode::InvalidConfig, "scene must be at least 16x16");
  if (cfg.classes != 3 && cfg.classes != 4) throw Error(ErrorCode::InvalidConfig, "classes must be 3 or 4");
  if (!(cfg.noise >= 0.0) || !std::isfinite(cfg.noise)) throw Error(ErrorCode::InvalidConfig, "noise must be >= 0");
  if (cfg.regions < 1) throw Error(ErrorCode::InvalidConfig, "need at least one region");
  if (!cfg.palette.empty() && cfg.palette.size() != static_cast<std::size_t>(cfg.classes)) {
    throw Error(ErrorCode::InvalidConfig, "palette size must equal class count");
  }
}

}  // namespace

std::vector<Color> default_palette(int classes) {
  std::vector<Color> all = {
      Color{0.30, 0.30, 0.30},
      Color{0.80, 0.25, 0.20},
      Color{0.25, 0.70, 0.30},
      Color{0.25, 0.35, 0.80},
  };
  all.resize(static_cast<std::size_t>(std::clamp(classes, 0, 4)));
  return all;
}

std::vector<Color> ood_colors() {
  return {Color{0.90, 0.85, 0.15}, Color{0.85, 0.20, 0.85}, Color{0.15, 0.85, 0.85}, Color{0.95, 0.95, 0.95}};
}

SceneSample generate_scene(std::uint64_t seed, const SceneConfig& config) {
  validate(config);
  const auto palette = config.palette.empty() ? default_palette(config.classes) : config.palette;
  const std::size_t H = config.height;
  const std::size_t W = config.width;

  Color ood_color{};
  if (config.ood) {
    double best = -1.0;
    for (const auto& cand : ood_colors()) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& c : palette) nearest = std::min(nearest, color_distance(cand, c));
      if (nearest > best) {
        best = nearest;
        ood_color = cand;
      }
    }
    if (!(best > 3.0 * config.noise)) {
      throw Error(ErrorCode::InvalidConfig, "no out-of-palette color is separated from the palette by 3x noise");
    }
  }

  Rng rng(seed);
  SceneSample s{Image(H, W, 3), Grid<int>(H, W, 0), Grid<bool>(H, W, false)};
  Grid<int> region_id(H, W, -1);

  const double h = static_cast<double>(H);
  const double w = static_cast<double>(W);
  for (int reg = 0; reg < config.regions; ++reg) {
    const int cls = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(config.classes - 1)));
    const auto shape = static_cast<Shape>(rng.below(3));
    const double cy = rng.uniform(0.0, h);
    const double cx = rng.uniform(0.0, w);
    const double a = rng.uniform(std::min(h, w) / 8.0, std::min(h, w) / 4.0);
    const double b = rng.uniform(std::min(h, w) / 8.0, std::min(h, w) / 4.0);
    const bool vertical = rng.below(2) == 1;
    const double half_band = rng.uniform(1.0, std::max(1.5, std::min(h, w) / 12.0));

    for (std::size_t r = 0; r < H; ++r) {
      for (std::size_t c = 0; c < W; ++c) {
        const double y = static_cast<double>(r) + 0.5;
        const double x = static_cast<double>(c) + 0.5;
        bool inside = false;
        switch (shape) {
          case Shape::Circle: inside = (y - cy) * (y - cy) + (x - cx) * (x - cx) <= a * a; break;
          case Shape::Rectangle: inside = std::abs(y - cy) <= a && std::abs(x - cx) <= b; break;
          case Shape::Stripe: inside = vertical ? std::abs(x - cx) <= half_band : std::abs(y - cy) <= half_band; break;
        }
        if (inside) {
          s.labels(r, c) = cls;
          region_id(r, c) = reg;
        }
      }
    }
  }

  // The topmost painted region is the one recolored; fall back to earlier
  // regions if a later one was clipped away entirely.
  int ood_region = -1;
  if (config.ood) {
    for (int reg = config.regions - 1; reg >= 0 && ood_region < 0; --reg) {
      if (std::find(region_id.data().begin(), region_id.data().end(), reg) != region_id.data().end()) {
        ood_region = reg;
      }
    }
  }

  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      const bool shifted = ood_region >= 0 && region_id(r, c) == ood_region;
      s.ood_mask(r, c) = shifted;
      const Color& base = shifted ? ood_color : palette[static_cast<std::size_t>(s.labels(r, c))];
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double v = config.noise > 0.0 ? base[ch] + config.noise * rng.normal() : base[ch];
        s.image(r, c, ch) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return s;
}

std::vector<double> pixel_features(const SceneSample& sample, std::size_t row, std::size_t col) {
  const std::size_t H = sample.image.height();
  const std::size_t W = sample.image.width();
  if (row >= H || col >= W) {
    throw Error(ErrorCode::OutOfBounds, "pixel (" + std::to_string(row) + ", " + std::to_string(col) + ") outside " +
                                            std::to_string(H) + "x" + std::to_string(W));
  }
  std::vector<double> f;
  f.reserve(kPixelFeatureCount);
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      const auto r = static_cast<std::size_t>(std::clamp<long>(static_cast<long>(row) + dr, 0, static_cast<long>(H) - 1));
      const auto c = static_cast<std::size_t>(std::clamp<long>(static_cast<long>(col) + dc, 0, static_cast<long>(W) - 1));
      for (std::size_t ch = 0; ch < 3; ++ch) f.push_back(sample.image(r, c, ch));
    }
  }
  f.push_back(static_cast<double>(row) / static_cast<double>(H));
  f.push_back(static_cast<double>(col) / static_cast<double>(W));
  return f;
}

}  // namespace qipf::toy
