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

// Information potential field (IPF): a Gaussian kernel sum over feature-space
// samples, evaluated together with its analytic gradient and Laplacian.
//
// The kernel is the unnormalized Gaussian exp(-r^2 / 2 sigma^2), so the field
// at a lone sample's own location is exactly 1 and values lie in (0, 1].

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qipf/simd/ipf_kernels.hpp"

namespace qipf::kde {

/// An immutable n x d set of finite feature vectors.
///
/// Rows are sorted lexicographically on construction, so every field
/// evaluation sums in the same order regardless of how the input was shuffled.
class SampleSet {
 public:
  /// `row_major.size()` must equal `n * d`; throws DegenerateSamples for empty
  /// shapes and NonFiniteInput for NaN/inf entries.
  SampleSet(std::size_t n, std::size_t d, std::vector<double> row_major);

  static SampleSet from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return d_; }

  std::span<const double> row(std::size_t i) const noexcept { return {rows_.data() + i * d_, d_}; }
  std::span<const double> row_major() const noexcept { return rows_; }
  /// d contiguous columns of length n, in canonical row order.
  std::span<const double> columns() const noexcept { return columns_; }

  friend bool operator==(const SampleSet&, const SampleSet&) = default;

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> rows_;
  std::vector<double> columns_;
};

class Bandwidth {
 public:
  /// Throws InvalidBandwidth unless sigma is finite and positive.
  explicit Bandwidth(double sigma);
  double sigma() const noexcept { return sigma_; }

 private:
  double sigma_;
};

struct FieldEval {
  double value = 0.0;
  std::vector<double> gradient;
  double laplacian = 0.0;
};

/// Rule-of-thumb width: s * (4 / ((d + 2) n))^(1 / (d + 4)), where s is the
/// mean of the per-dimension sample standard deviations.
/// Throws DegenerateSamples when n < 2 or s == 0.
Bandwidth silverman_bandwidth(const SampleSet& samples);

FieldEval ipf_eval(const SampleSet& samples, Bandwidth sigma, std::span<const double> point,
                   simd::Backend backend = simd::best_backend());

std::vector<FieldEval> ipf_batch(const SampleSet& samples, Bandwidth sigma,
                                 std::span<const std::vector<double>> points,
                                 simd::Backend backend = simd::best_backend());

/// Draws `n_max` rows uniformly without replacement (partial Fisher-Yates over
/// canonical row order). Returns the input unchanged when it already fits.
SampleSet subsample(const SampleSet& samples, std::size_t n_max, std::uint64_t seed);

/// Per-dimension standardization (x - mean) / std. Dimensions with zero spread
/// keep unit scale. Off by default in the pipeline.
class Standardizer {
 public:
  static Standardizer fit(const SampleSet& samples);

  SampleSet apply(const SampleSet& samples) const;
  std::vector<double> apply(std::span<const double> point) const;

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

}  // namespace qipf::kde
