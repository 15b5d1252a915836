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

// Gaussian kernel-sum primitives behind the information potential field.
//
// One pass over the samples produces everything the field evaluation needs:
//
//   weight      = sum_i w_i,            w_i = exp(-|z_i - p|^2 * inv_two_sigma2)
//   weighted_r2 = sum_i w_i |z_i - p|^2
//   moment[j]   = sum_i w_i (z_ij - p_j)
//
// Samples are passed column-major (d columns of n contiguous values). A scalar
// reference and an AVX2/FMA variant are provided; the active one is chosen once
// from CPUID. Results of the two agree to rounding, not bitwise.

#include <cstddef>
#include <span>
#include <string_view>

namespace qipf::simd {

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend backend) noexcept;

/// True when the backend was compiled in and the running CPU supports it.
bool available(Backend backend) noexcept;

/// Widest available backend, resolved on first call.
Backend best_backend() noexcept;

struct KernelSums {
  double weight = 0.0;
  double weighted_r2 = 0.0;
};

/// `columns.size() == n * point.size()`, `moment.size() == point.size()`.
KernelSums kernel_sums(Backend backend, std::span<const double> columns, std::size_t n,
                       std::span<const double> point, double inv_two_sigma2,
                       std::span<double> moment);

KernelSums kernel_sums_scalar(std::span<const double> columns, std::size_t n,
                              std::span<const double> point, double inv_two_sigma2,
                              std::span<double> moment);

/// exp(x) elementwise for x <= 0. Exposed for accuracy tests of the vector
/// exponential; the scalar backend forwards to std::exp.
void exp_nonpositive(Backend backend, std::span<const double> x, std::span<double> out);

namespace detail {
#if defined(QIPF_HAVE_AVX2)
KernelSums kernel_sums_avx2(std::span<const double> columns, std::size_t n,
                            std::span<const double> point, double inv_two_sigma2,
                            std::span<double> moment);
void exp_nonpositive_avx2(std::span<const double> x, std::span<double> out);
#endif
}  // namespace detail

}  // namespace qipf::simd
