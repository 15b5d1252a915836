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

// Patch-level agreement between an uncertainty map and the segmentation error
// map: patches are split into accurate/inaccurate (strict majority of correct
// pixels) and certain/uncertain (mean uncertainty below the threshold), and
// the four counts give
//
//   PA    = n_ac / (n_ac + n_ic)      p(accurate | certain)
//   PU    = n_iu / (n_ic + n_iu)      p(uncertain | inaccurate)
//   PAvPU = (n_ac + n_iu) / total
//
// with thresholds u_th = u_min + t (u_max - u_min) swept over t in [0, 1].

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qipf/grid.hpp"

namespace qipf::metrics {

/// True where the prediction is wrong. Throws ShapeMismatch.
Grid<bool> error_map(const Grid<int>& preds, const Grid<int>& truth);

/// Mean of each patch x patch block. Trailing partial blocks average over the
/// pixels they actually contain. Throws InvalidPatch for patch == 0.
Grid<double> patch_mean(const Grid<double>& pixel_map, std::size_t patch);

/// A block is accurate iff strictly more than half of its pixels are correct.
Grid<bool> patch_accurate(const Grid<bool>& errors, std::size_t patch);

/// u_min + t (u_max - u_min). Throws InvalidRange for u_max < u_min or t outside [0, 1].
double threshold_value(double u_min, double u_max, double t);

struct ConfusionCounts {
  std::uint64_t n_ac = 0;
  std::uint64_t n_au = 0;
  std::uint64_t n_ic = 0;
  std::uint64_t n_iu = 0;

  std::uint64_t total() const noexcept { return n_ac + n_au + n_ic + n_iu; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// A patch is uncertain iff unc >= u_th. Throws ShapeMismatch.
ConfusionCounts confusion(const Grid<bool>& accurate, const Grid<double>& unc, double u_th);

/// Ratios with a zero denominator are empty rather than NaN.
struct Scores {
  std::optional<double> pa;
  std::optional<double> pu;
  std::optional<double> pavpu;

  friend bool operator==(const Scores&, const Scores&) = default;
};

Scores scores(const ConfusionCounts& c);

struct ThresholdSweep {
  std::vector<double> t;
  std::vector<ConfusionCounts> counts;
  std::vector<Scores> scores;
};

/// {0, step, 2 step, ..., 1}; the default step 0.05 gives 21 points.
std::vector<double> default_t_grid(double step = 0.05);

/// Throws InvalidRange for an empty grid, values outside [0, 1] or a grid
/// that is not strictly increasing.
ThresholdSweep sweep(const Grid<bool>& accurate, const Grid<double>& unc, double u_min, double u_max,
                     const std::vector<double>& t_grid);

/// Mean of the defined entries over the sweep; empty if none are defined.
Scores average(const ThresholdSweep& s);

}  // namespace qipf::metrics
