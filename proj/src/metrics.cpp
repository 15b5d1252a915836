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

#include "qipf/metrics.hpp"

#include <cmath>
#include <string>

#include "qipf/error.hpp"

namespace qipf::metrics {

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::size_t blocks(std::size_t extent, std::size_t patch) { return (extent + patch - 1) / patch; }

}  // namespace

Grid<bool> error_map(const Grid<int>& preds, const Grid<int>& truth) {
  if (!preds.same_shape(truth)) throw Error(ErrorCode::ShapeMismatch, "prediction and label maps differ in shape");
  Grid<bool> out(preds.rows(), preds.cols(), false);
  for (std::size_t i = 0; i < preds.size(); ++i) out.data()[i] = preds.data()[i] != truth.data()[i];
  return out;
}

Grid<double> patch_mean(const Grid<double>& pixel_map, std::size_t patch) {
  if (patch == 0) throw Error(ErrorCode::InvalidPatch, "patch size must be positive");
  const std::size_t br = blocks(pixel_map.rows(), patch);
  const std::size_t bc = blocks(pixel_map.cols(), patch);
  Grid<double> sum(br, bc, 0.0);
  Grid<double> count(br, bc, 0.0);
  for (std::size_t r = 0; r < pixel_map.rows(); ++r) {
    for (std::size_t c = 0; c < pixel_map.cols(); ++c) {
      sum(r / patch, c / patch) += pixel_map(r, c);
      count(r / patch, c / patch) += 1.0;
    }
  }
  for (std::size_t i = 0; i < sum.size(); ++i) sum.data()[i] /= count.data()[i];
  return sum;
}

Grid<bool> patch_accurate(const Grid<bool>& errors, std::size_t patch) {
  if (patch == 0) throw Error(ErrorCode::InvalidPatch, "patch size must be positive");
  const std::size_t br = blocks(errors.rows(), patch);
  const std::size_t bc = blocks(errors.cols(), patch);
  Grid<std::size_t> correct(br, bc, 0);
  Grid<std::size_t> count(br, bc, 0);
  for (std::size_t r = 0; r < errors.rows(); ++r) {
    for (std::size_t c = 0; c < errors.cols(); ++c) {
      if (!errors(r, c)) ++correct(r / patch, c / patch);
      ++count(r / patch, c / patch);
    }
  }
  Grid<bool> out(br, bc, false);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = 2 * correct.data()[i] > count.data()[i];
  return out;
}

double threshold_value(double u_min, double u_max, double t) {
  if (!std::isfinite(u_min) || !std::isfinite(u_max) || u_max < u_min) {
    throw Error(ErrorCode::InvalidRange, "need finite u_min <= u_max");
  }
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidRange, "t must lie in [0, 1]");
  return u_min + t * (u_max - u_min);
}

ConfusionCounts confusion(const Grid<bool>& accurate, const Grid<double>& unc, double u_th) {
  if (accurate.rows() != unc.rows() || accurate.cols() != unc.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "accuracy and uncertainty grids differ in shape");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < unc.size(); ++i) {
    const bool acc = accurate.data()[i];
    const bool uncertain = unc.data()[i] >= u_th;
    if (acc) {
      uncertain ? ++c.n_au : ++c.n_ac;
    } else {
      uncertain ? ++c.n_iu : ++c.n_ic;
    }
  }
  return c;
}

Scores scores(const ConfusionCounts& c) {
  return {ratio(c.n_ac, c.n_ac + c.n_ic), ratio(c.n_iu, c.n_ic + c.n_iu), ratio(c.n_ac + c.n_iu, c.total())};
}

std::vector<double> default_t_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw Error(ErrorCode::InvalidRange, "t step must lie in (0, 1]");
  const auto intervals = static_cast<std::size_t>(std::llround(1.0 / step));
  std::vector<double> t;
  for (std::size_t i = 0; i <= intervals; ++i) t.push_back(std::min(1.0, static_cast<double>(i) / static_cast<double>(intervals)));
  return t;
}

ThresholdSweep sweep(const Grid<bool>& accurate, const Grid<double>& unc, double u_min, double u_max,
                     const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw Error(ErrorCode::InvalidRange, "threshold grid is empty");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0 && t_grid[i] <= 1.0)) throw Error(ErrorCode::InvalidRange, "t outside [0, 1]");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw Error(ErrorCode::InvalidRange, "t grid not increasing");
  }
  ThresholdSweep s;
  for (double t : t_grid) {
    const auto counts = confusion(accurate, unc, threshold_value(u_min, u_max, t));
    s.t.push_back(t);
    s.counts.push_back(counts);
    s.scores.push_back(scores(counts));
  }
  return s;
}

Scores average(const ThresholdSweep& s) {
  auto mean_of = [&](auto member) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& sc : s.scores) {
      if (const auto v = sc.*member) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  return {mean_of(&Scores::pa), mean_of(&Scores::pu), mean_of(&Scores::pavpu)};
}

}  // namespace qipf::metrics
