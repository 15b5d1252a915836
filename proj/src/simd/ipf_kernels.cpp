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

#include "qipf/simd/ipf_kernels.hpp"

#include <algorithm>
#include <cmath>

namespace qipf::simd {

std::string_view to_string(Backend backend) noexcept {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

bool available(Backend backend) noexcept {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(QIPF_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Backend best_backend() noexcept {
  static const Backend best = available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
  return best;
}

KernelSums kernel_sums_scalar(std::span<const double> columns, std::size_t n,
                              std::span<const double> point, double inv_two_sigma2,
                              std::span<double> moment) {
  const std::size_t d = point.size();
  std::fill(moment.begin(), moment.end(), 0.0);
  KernelSums sums;
  for (std::size_t i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = columns[j * n + i] - point[j];
      r2 += diff * diff;
    }
    const double w = std::exp(-r2 * inv_two_sigma2);
    sums.weight += w;
    sums.weighted_r2 += w * r2;
    for (std::size_t j = 0; j < d; ++j) {
      moment[j] += w * (columns[j * n + i] - point[j]);
    }
  }
  return sums;
}

KernelSums kernel_sums(Backend backend, std::span<const double> columns, std::size_t n,
                       std::span<const double> point, double inv_two_sigma2,
                       std::span<double> moment) {
#if defined(QIPF_HAVE_AVX2)
  if (backend == Backend::Avx2) {
    return detail::kernel_sums_avx2(columns, n, point, inv_two_sigma2, moment);
  }
#endif
  (void)backend;
  return kernel_sums_scalar(columns, n, point, inv_two_sigma2, moment);
}

void exp_nonpositive(Backend backend, std::span<const double> x, std::span<double> out) {
#if defined(QIPF_HAVE_AVX2)
  if (backend == Backend::Avx2) {
    detail::exp_nonpositive_avx2(x, out);
    return;
  }
#endif
  (void)backend;
  std::transform(x.begin(), x.end(), out.begin(), [](double v) { return std::exp(v); });
}

}  // namespace qipf::simd
