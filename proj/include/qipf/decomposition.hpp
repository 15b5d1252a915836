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

// Moment decomposition of the information potential field.
//
// The field psi is scaled to a unit-norm wave function psi_hat, projected on
// Hermite polynomials psi_k = h_k(psi_hat), and each projection yields one
// moment
//
//   H_k(z) = E_k + (sigma^2 / 2) * lap(psi_k)(z) / psi_k(z),
//   lap(psi_k) = h_k''(psi_hat) |grad psi_hat|^2 + h_k'(psi_hat) lap(psi_hat),
//
// where the offset E_k is the negated minimum of the ratio term over the
// calibration (training) samples. Every moment is therefore non-negative on
// the calibration set. The uncertainty score of a point is the index of its
// largest moment.

#include <cstddef>
#include <span>
#include <vector>

#include "qipf/hermite.hpp"
#include "qipf/kde.hpp"

namespace qipf::decomp {

/// |psi_k| below this is treated as a sign change: skipped during calibration,
/// reported as a zero moment during evaluation.
inline constexpr double kNearZero = 1e-12;

enum class Normalization {
  L2,   ///< sum_i psi_hat(z_i)^2 = 1 over the calibration samples
  Max,  ///< max_i psi_hat(z_i) = 1
};

class QipfModel {
 public:
  QipfModel(kde::SampleSet samples, kde::Bandwidth sigma, double normalizer, std::vector<double> e_lower,
            simd::Backend backend);

  const kde::SampleSet& samples() const noexcept { return samples_; }
  kde::Bandwidth sigma() const noexcept { return sigma_; }
  double normalizer() const noexcept { return normalizer_; }
  std::span<const double> e_lower() const noexcept { return e_lower_; }
  int modes() const noexcept { return static_cast<int>(e_lower_.size()); }
  simd::Backend backend() const noexcept { return backend_; }

 private:
  kde::SampleSet samples_;
  kde::Bandwidth sigma_;
  double normalizer_;
  std::vector<double> e_lower_;
  simd::Backend backend_;
};

struct MomentSpectrum {
  std::vector<double> values;  // values[k - 1] holds H_k
};

/// Throws OrderTooLarge for m outside [1, kMaxHermiteOrder] and DegenerateField
/// when the field vanishes on every sample.
QipfModel fit(const kde::SampleSet& samples, kde::Bandwidth sigma, int m,
              Normalization normalization = Normalization::L2,
              simd::Backend backend = simd::best_backend());

/// Moments clamped below at zero.
MomentSpectrum moments(const QipfModel& model, std::span<const double> point);

/// Moments before the zero clamp. Near-zero projections still report 0.
std::vector<double> raw_moments(const QipfModel& model, std::span<const double> point);

/// 1-based argmax; ties go to the lowest index.
int uncertainty_index(const MomentSpectrum& spectrum);

/// index / m, in (0, 1].
double normalized_uncertainty(int index, int m);

}  // namespace qipf::decomp
