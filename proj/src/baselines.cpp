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

#include "qipf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qipf/error.hpp"
#include "qipf/rng.hpp"

namespace qipf::baselines {

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Qipf: return "qipf";
    case Method::Softmax: return "softmax";
    case Method::McDropout: return "mc_dropout";
    case Method::Ensemble: return "ensemble";
  }
  return "unknown";
}

UncertaintyMap softmax_uncertainty(const toy::FeatureTensor& ft) {
  const std::size_t H = ft.probs.height();
  const std::size_t W = ft.probs.width();
  UncertaintyMap map{Grid<double>(H, W), Method::Softmax};
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      const auto p = ft.probs.pixel(r, c);
      map.values(r, c) = std::clamp(1.0 - *std::max_element(p.begin(), p.end()), 0.0, 1.0);
    }
  }
  return map;
}

UncertaintyMap mean_entropy_uncertainty(std::span<const toy::FeatureTensor> passes) {
  const auto& first = passes.front().probs;
  const std::size_t H = first.height();
  const std::size_t W = first.width();
  const std::size_t C = first.channels();
  const double log_c = std::log(static_cast<double>(C));
  const double inv = 1.0 / static_cast<double>(passes.size());
  UncertaintyMap map{Grid<double>(H, W), Method::McDropout};
  std::vector<double> mean(C);
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      std::fill(mean.begin(), mean.end(), 0.0);
      for (const auto& ft : passes) {
        const auto p = ft.probs.pixel(r, c);
        for (std::size_t k = 0; k < C; ++k) mean[k] += p[k];
      }
      double entropy = 0.0;
      for (double m : mean) {
        const double q = m * inv;
        if (q > 0.0) entropy -= q * std::log(q);
      }
      map.values(r, c) = std::clamp(entropy / log_c, 0.0, 1.0);
    }
  }
  return map;
}

UncertaintyMap mc_dropout_uncertainty(const toy::PixelClassifier& model, const toy::SceneSample& sample, int passes,
                                      std::uint64_t seed, std::atomic<std::uint64_t>* counter) {
  if (passes < 2) throw Error(ErrorCode::InvalidPasses, "MC dropout needs at least 2 passes");
  std::vector<toy::FeatureTensor> outs;
  outs.reserve(static_cast<std::size_t>(passes));
  for (int p = 0; p < passes; ++p) {
    outs.push_back(toy::forward(model, sample, {.dropout = true, .seed = derive_seed(seed, static_cast<std::uint64_t>(p)), .counter = counter}));
  }
  return mean_entropy_uncertainty(outs);
}

UncertaintyMap ensemble_uncertainty(std::span<const toy::FeatureTensor> members) {
  if (members.size() < 2) throw Error(ErrorCode::HeterogeneousEnsemble, "ensemble needs at least two members");
  const auto& first = members.front().probs;
  for (const auto& m : members) {
    if (m.probs.height() != first.height() || m.probs.width() != first.width() ||
        m.probs.channels() != first.channels()) {
      throw Error(ErrorCode::HeterogeneousEnsemble, "ensemble members disagree on output shape");
    }
  }
  const std::size_t H = first.height();
  const std::size_t W = first.width();
  const std::size_t C = first.channels();
  const double inv = 1.0 / static_cast<double>(members.size());
  UncertaintyMap map{Grid<double>(H, W), Method::Ensemble};
  std::vector<double> mean(C);
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      std::fill(mean.begin(), mean.end(), 0.0);
      for (const auto& m : members) {
        const auto p = m.probs.pixel(r, c);
        for (std::size_t k = 0; k < C; ++k) mean[k] += p[k];
      }
      const auto cls = static_cast<std::size_t>(std::max_element(mean.begin(), mean.end()) - mean.begin());
      // Shifted by the first member so identical members give exactly 0.
      const double ref = first(r, c, cls);
      double s1 = 0.0, s2 = 0.0;
      for (const auto& m : members) {
        const double dv = m.probs(r, c, cls) - ref;
        s1 += dv;
        s2 += dv * dv;
      }
      const double var = std::max(0.0, s2 * inv - (s1 * inv) * (s1 * inv));
      map.values(r, c) = std::clamp(std::sqrt(var) / 0.5, 0.0, 1.0);
    }
  }
  return map;
}

UncertaintyMap ensemble_uncertainty(std::span<const toy::PixelClassifier> models, const toy::SceneSample& sample,
                                    std::atomic<std::uint64_t>* counter) {
  if (models.size() < 2) throw Error(ErrorCode::HeterogeneousEnsemble, "ensemble needs at least two members");
  for (const auto& m : models) {
    if (!m.same_architecture(models.front())) {
      throw Error(ErrorCode::HeterogeneousEnsemble, "ensemble members differ in architecture");
    }
  }
  std::vector<toy::FeatureTensor> outs;
  outs.reserve(models.size());
  for (const auto& m : models) outs.push_back(toy::forward(m, sample, {.counter = counter}));
  return ensemble_uncertainty(outs);
}

}  // namespace qipf::baselines
