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

// AVX2/FMA variant of the kernel-sum primitives. Compiled with -mavx2 -mfma;
// only reached when CPUID reports both features.

#include <immintrin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qipf/simd/ipf_kernels.hpp"

namespace qipf::simd::detail {
namespace {

constexpr double kLog2e = 1.4426950408889634073599;
constexpr double kLn2Hi = 6.93145751953125E-1;
constexpr double kLn2Lo = 1.42860682030941723212E-6;
// Below this the result is subnormal; lanes are flushed to zero.
constexpr double kMinArg = -708.3;

// Cephes-style exp: range reduction by ln2, (3,4) Pade form, exponent splice.
inline __m256d exp_pd(__m256d x) {
  const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(kMinArg), _CMP_LT_OQ);
  x = _mm256_max_pd(x, _mm256_set1_pd(kMinArg));

  const __m256d n = _mm256_floor_pd(_mm256_fmadd_pd(x, _mm256_set1_pd(kLog2e), _mm256_set1_pd(0.5)));
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Hi), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Lo), r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, r);

  __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000009E0));

  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  const __m256i biased = _mm256_add_epi64(_mm256_cvtepi32_epi64(n32), _mm256_set1_epi64x(1023));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(biased, 52));
  e = _mm256_mul_pd(e, scale);
  return _mm256_andnot_pd(underflow, e);
}

inline double hsum(__m256d v) {
  alignas(32) std::array<double, 4> lanes;
  _mm256_store_pd(lanes.data(), v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

}  // namespace

void exp_nonpositive_avx2(std::span<const double> x, std::span<double> out) {
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    _mm256_storeu_pd(out.data() + i, exp_pd(_mm256_loadu_pd(x.data() + i)));
  }
  if (i < x.size()) {
    alignas(32) std::array<double, 4> buf{};
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(i), x.end(), buf.begin());
    _mm256_store_pd(buf.data(), exp_pd(_mm256_load_pd(buf.data())));
    std::copy_n(buf.begin(), x.size() - i, out.begin() + static_cast<std::ptrdiff_t>(i));
  }
}

KernelSums kernel_sums_avx2(std::span<const double> columns, std::size_t n,
                            std::span<const double> point, double inv_two_sigma2,
                            std::span<double> moment) {
  const std::size_t d = point.size();
  // Per-dimension lane accumulators, 4 doubles per dimension.
  constexpr std::size_t kInline = 16;
  alignas(32) std::array<double, 4 * kInline> moment_inline{};
  std::vector<double> moment_heap;
  double* acc_moment = moment_inline.data();
  if (d > kInline) {
    moment_heap.assign(4 * d + 4, 0.0);
    // Round up to a 32-byte boundary.
    const auto addr = reinterpret_cast<std::uintptr_t>(moment_heap.data());
    acc_moment = moment_heap.data() + ((32 - addr % 32) % 32) / sizeof(double);
  }

  __m256d acc_w = _mm256_setzero_pd();
  __m256d acc_r2 = _mm256_setzero_pd();
  const __m256d neg_c = _mm256_set1_pd(-inv_two_sigma2);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r2 = _mm256_setzero_pd();
    for (std::size_t j = 0; j < d; ++j) {
      const __m256d diff =
          _mm256_sub_pd(_mm256_loadu_pd(columns.data() + j * n + i), _mm256_set1_pd(point[j]));
      r2 = _mm256_fmadd_pd(diff, diff, r2);
    }
    const __m256d w = exp_pd(_mm256_mul_pd(r2, neg_c));
    acc_w = _mm256_add_pd(acc_w, w);
    acc_r2 = _mm256_fmadd_pd(w, r2, acc_r2);
    for (std::size_t j = 0; j < d; ++j) {
      const __m256d diff =
          _mm256_sub_pd(_mm256_loadu_pd(columns.data() + j * n + i), _mm256_set1_pd(point[j]));
      double* slot = acc_moment + 4 * j;
      _mm256_store_pd(slot, _mm256_fmadd_pd(w, diff, _mm256_load_pd(slot)));
    }
  }

  KernelSums sums{hsum(acc_w), hsum(acc_r2)};
  for (std::size_t j = 0; j < d; ++j) moment[j] = hsum(_mm256_load_pd(acc_moment + 4 * j));

  for (; i < n; ++i) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = columns[j * n + i] - point[j];
      r2 += diff * diff;
    }
    const double w = std::exp(-r2 * inv_two_sigma2);
    sums.weight += w;
    sums.weighted_r2 += w * r2;
    for (std::size_t j = 0; j < d; ++j) moment[j] += w * (columns[j * n + i] - point[j]);
  }
  return sums;
}

}  // namespace qipf::simd::detail
