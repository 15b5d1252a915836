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

#include "qipf/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qipf/error.hpp"
#include "qipf/rng.hpp"

namespace qipf::kde {

namespace {

// Shifted by the first value so a constant column has exactly its value as mean
// and zero spread.
double column_mean(std::span<const double> col) {
  double shift = 0.0;
  for (double v : col) shift += v - col[0];
  return col[0] + shift / static_cast<double>(col.size());
}

std::vector<double> sample_std(const SampleSet& samples) {
  const std::size_t n = samples.size();
  const std::size_t d = samples.dim();
  const auto cols = samples.columns();
  std::vector<double> out(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = cols.subspan(j * n, n);
    const double mean = column_mean(col);
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    out[j] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  }
  return out;
}

}  // namespace

SampleSet::SampleSet(std::size_t n, std::size_t d, std::vector<double> row_major) : n_(n), d_(d) {
  if (n == 0 || d == 0) {
    throw Error(ErrorCode::DegenerateSamples, "sample set needs n >= 1 and d >= 1");
  }
  if (row_major.size() != n * d) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(n * d) + " values, got " + std::to_string(row_major.size()));
  }
  if (!std::all_of(row_major.begin(), row_major.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::NonFiniteInput, "sample set contains non-finite entries");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(row_major.begin() + static_cast<std::ptrdiff_t>(a * d),
                                        row_major.begin() + static_cast<std::ptrdiff_t>((a + 1) * d),
                                        row_major.begin() + static_cast<std::ptrdiff_t>(b * d),
                                        row_major.begin() + static_cast<std::ptrdiff_t>((b + 1) * d));
  });

  rows_.resize(n * d);
  columns_.resize(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double v = row_major[order[i] * d + j];
      rows_[i * d + j] = v;
      columns_[j * n + i] = v;
    }
  }
}

SampleSet SampleSet::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorCode::DegenerateSamples, "no rows");
  const std::size_t d = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw Error(ErrorCode::DimensionMismatch, "ragged sample rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return SampleSet(rows.size(), d, std::move(flat));
}

Bandwidth::Bandwidth(double sigma) : sigma_(sigma) {
  if (!(std::isfinite(sigma) && sigma > 0.0)) {
    throw Error(ErrorCode::InvalidBandwidth, "sigma must be finite and positive");
  }
}

Bandwidth silverman_bandwidth(const SampleSet& samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw Error(ErrorCode::DegenerateSamples, "Silverman bandwidth needs n >= 2");
  const auto stds = sample_std(samples);
  const double d = static_cast<double>(samples.dim());
  const double spread = std::accumulate(stds.begin(), stds.end(), 0.0) / d;
  if (!(spread > 0.0)) throw Error(ErrorCode::DegenerateSamples, "samples have zero spread");
  return Bandwidth(spread * std::pow(4.0 / ((d + 2.0) * static_cast<double>(n)), 1.0 / (d + 4.0)));
}

FieldEval ipf_eval(const SampleSet& samples, Bandwidth sigma, std::span<const double> point,
                   simd::Backend backend) {
  const std::size_t d = samples.dim();
  if (point.size() != d) {
    throw Error(ErrorCode::DimensionMismatch,
                "point has dimension " + std::to_string(point.size()) + ", samples " + std::to_string(d));
  }
  if (!std::all_of(point.begin(), point.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::NonFiniteInput, "evaluation point is not finite");
  }

  const double s2 = sigma.sigma() * sigma.sigma();
  FieldEval out;
  out.gradient.resize(d);
  const auto sums = simd::kernel_sums(backend, samples.columns(), samples.size(), point, 0.5 / s2, out.gradient);

  const double inv_n = 1.0 / static_cast<double>(samples.size());
  out.value = sums.weight * inv_n;
  for (double& g : out.gradient) g *= inv_n / s2;
  out.laplacian = (sums.weighted_r2 / (s2 * s2) - static_cast<double>(d) * sums.weight / s2) * inv_n;
  return out;
}

std::vector<FieldEval> ipf_batch(const SampleSet& samples, Bandwidth sigma,
                                 std::span<const std::vector<double>> points, simd::Backend backend) {
  std::vector<FieldEval> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(ipf_eval(samples, sigma, p, backend));
  return out;
}

SampleSet subsample(const SampleSet& samples, std::size_t n_max, std::uint64_t seed) {
  const std::size_t n = samples.size();
  if (n <= n_max) return samples;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < n_max; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  const std::size_t d = samples.dim();
  std::vector<double> flat;
  flat.reserve(n_max * d);
  for (std::size_t i = 0; i < n_max; ++i) {
    const auto r = samples.row(idx[i]);
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return SampleSet(n_max, d, std::move(flat));
}

Standardizer Standardizer::fit(const SampleSet& samples) {
  Standardizer s;
  const std::size_t n = samples.size();
  const std::size_t d = samples.dim();
  s.mean_.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = samples.columns().subspan(j * n, n);
    s.mean_[j] = column_mean(col);
  }
  s.scale_ = sample_std(samples);
  for (double& v : s.scale_) {
    if (!(v > 0.0)) v = 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> point) const {
  if (point.size() != mean_.size()) throw Error(ErrorCode::DimensionMismatch, "standardizer dimension");
  std::vector<double> out(point.size());
  for (std::size_t j = 0; j < point.size(); ++j) out[j] = (point[j] - mean_[j]) / scale_[j];
  return out;
}

SampleSet Standardizer::apply(const SampleSet& samples) const {
  std::vector<double> flat;
  flat.reserve(samples.size() * samples.dim());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto r = apply(samples.row(i));
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return SampleSet(samples.size(), samples.dim(), std::move(flat));
}

}  // namespace qipf::kde
