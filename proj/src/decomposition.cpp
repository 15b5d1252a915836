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

#include "qipf/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qipf/error.hpp"
#include "qipf/hermite.hpp"

namespace qipf::decomp {

namespace {

// Ratio term (sigma^2/2) lap(psi_k)/psi_k for k = 1..m at one field evaluation.
// Entries whose projection is near zero are flagged invalid.
struct RatioTerms {
  std::vector<double> ratio;
  std::vector<bool> valid;
};

RatioTerms ratio_terms(const kde::FieldEval& field, double normalizer, double sigma, int m) {
  const double u = field.value / normalizer;
  double grad_sq = 0.0;
  for (double g : field.gradient) grad_sq += g * g;
  grad_sq /= normalizer * normalizer;
  const double lap = field.laplacian / normalizer;
  const double half_s2 = 0.5 * sigma * sigma;

  RatioTerms out;
  out.ratio.assign(static_cast<std::size_t>(m), 0.0);
  out.valid.assign(static_cast<std::size_t>(m), false);
  const auto herm = hermite_sweep(m, u);
  for (int k = 0; k < m; ++k) {
    const auto& hv = herm[static_cast<std::size_t>(k)];
    if (std::abs(hv.h) < kNearZero) continue;
    const double lap_k = hv.second * grad_sq + hv.first * lap;
    out.ratio[static_cast<std::size_t>(k)] = half_s2 * lap_k / hv.h;
    out.valid[static_cast<std::size_t>(k)] = true;
  }
  return out;
}

}  // namespace

QipfModel::QipfModel(kde::SampleSet samples, kde::Bandwidth sigma, double normalizer,
                     std::vector<double> e_lower, simd::Backend backend)
    : samples_(std::move(samples)),
      sigma_(sigma),
      normalizer_(normalizer),
      e_lower_(std::move(e_lower)),
      backend_(backend) {}

QipfModel fit(const kde::SampleSet& samples, kde::Bandwidth sigma, int m, Normalization normalization,
              simd::Backend backend) {
  if (m < 1 || m > kMaxHermiteOrder) {
    throw Error(ErrorCode::OrderTooLarge, "mode count " + std::to_string(m) + " outside [1, " +
                                              std::to_string(kMaxHermiteOrder) + "]");
  }
  std::vector<kde::FieldEval> fields;
  fields.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    fields.push_back(kde::ipf_eval(samples, sigma, samples.row(i), backend));
  }

  double normalizer = 0.0;
  if (normalization == Normalization::L2) {
    for (const auto& f : fields) normalizer += f.value * f.value;
    normalizer = std::sqrt(normalizer);
  } else {
    for (const auto& f : fields) normalizer = std::max(normalizer, f.value);
  }
  if (!(normalizer > 0.0) || !std::isfinite(normalizer)) {
    throw Error(ErrorCode::DegenerateField, "field vanishes on all calibration samples");
  }

  std::vector<double> minimum(static_cast<std::size_t>(m), std::numeric_limits<double>::infinity());
  for (const auto& f : fields) {
    const auto terms = ratio_terms(f, normalizer, sigma.sigma(), m);
    for (std::size_t k = 0; k < minimum.size(); ++k) {
      if (terms.valid[k]) minimum[k] = std::min(minimum[k], terms.ratio[k]);
    }
  }
  std::vector<double> e_lower(minimum.size());
  // A mode with no usable calibration point keeps a zero offset.
  std::transform(minimum.begin(), minimum.end(), e_lower.begin(),
                 [](double v) { return std::isfinite(v) ? -v : 0.0; });
  return QipfModel(samples, sigma, normalizer, std::move(e_lower), backend);
}

std::vector<double> raw_moments(const QipfModel& model, std::span<const double> point) {
  const auto field = kde::ipf_eval(model.samples(), model.sigma(), point, model.backend());
  const auto terms = ratio_terms(field, model.normalizer(), model.sigma().sigma(), model.modes());
  std::vector<double> out(terms.ratio.size(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!terms.valid[k]) continue;
    const double h = model.e_lower()[k] + terms.ratio[k];
    out[k] = std::isfinite(h) ? h : 0.0;
  }
  return out;
}

MomentSpectrum moments(const QipfModel& model, std::span<const double> point) {
  MomentSpectrum s{raw_moments(model, point)};
  for (double& v : s.values) v = std::max(v, 0.0);
  return s;
}

int uncertainty_index(const MomentSpectrum& spectrum) {
  if (spectrum.values.empty()) return 1;
  const auto it = std::max_element(spectrum.values.begin(), spectrum.values.end());
  return static_cast<int>(it - spectrum.values.begin()) + 1;
}

double normalized_uncertainty(int index, int m) {
  if (m < 1 || index < 1 || index > m) {
    throw Error(ErrorCode::InvalidRange, "index " + std::to_string(index) + " outside [1, " +
                                             std::to_string(m) + "]");
  }
  return static_cast<double>(index) / static_cast<double>(m);
}

}  // namespace qipf::decomp
