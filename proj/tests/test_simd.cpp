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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qipf/rng.hpp"
#include "qipf/simd/ipf_kernels.hpp"

using qipf::simd::Backend;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(qipf::simd::available(Backend::Scalar));
  const auto best = qipf::simd::best_backend();
  CHECK(qipf::simd::available(best));
  MESSAGE("active backend: " << qipf::simd::to_string(best));
}

TEST_CASE("vector exponential matches std::exp") {
  if (!qipf::simd::available(Backend::Avx2)) {
    MESSAGE("AVX2 unavailable, skipping");
    return;
  }
  qipf::Rng rng(7);
  std::vector<double> x(10007);
  for (double& v : x) v = -std::pow(rng.uniform(), 2.0) * 700.0;
  x[0] = 0.0;
  x[1] = -1e-300;
  x[2] = -700.0;
  std::vector<double> got(x.size());
  qipf::simd::exp_nonpositive(Backend::Avx2, x, got);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, rel_err(got[i], std::exp(x[i])));
  CHECK(worst < 1e-15);
  CHECK(got[0] == 1.0);

  std::vector<double> deep = {-709.0, -750.0, -1e6};
  std::vector<double> out(deep.size());
  qipf::simd::exp_nonpositive(Backend::Avx2, deep, out);
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("kernel sums agree across backends") {
  if (!qipf::simd::available(Backend::Avx2)) {
    MESSAGE("AVX2 unavailable, skipping");
    return;
  }
  qipf::Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    // Sizes cover the vector tail and the heap accumulator path (d > 16).
    const std::size_t n = 1 + rng.below(300);
    const std::size_t d = 1 + rng.below(20);
    std::vector<double> cols(n * d), point(d);
    for (double& v : cols) v = rng.normal();
    for (double& v : point) v = rng.normal();
    const double sigma = rng.uniform(0.2, 3.0);
    const double c = 0.5 / (sigma * sigma);

    std::vector<double> ms(d), mv(d);
    const auto s = qipf::simd::kernel_sums(Backend::Scalar, cols, n, point, c, ms);
    const auto v = qipf::simd::kernel_sums(Backend::Avx2, cols, n, point, c, mv);
    CAPTURE(n);
    CAPTURE(d);
    CHECK(rel_err(v.weight, s.weight) < 1e-12);
    CHECK(rel_err(v.weighted_r2, s.weighted_r2) < 1e-12);
    // Moments can cancel; compare on the scale of the total weight x spread.
    const double scale = s.weight * 4.0 + 1e-300;
    for (std::size_t j = 0; j < d; ++j) CHECK(std::abs(mv[j] - ms[j]) / scale < 1e-12);
  }
}

TEST_CASE("each backend is deterministic") {
  qipf::Rng rng(3);
  const std::size_t n = 97, d = 3;
  std::vector<double> cols(n * d), point = {0.1, -0.2, 0.3};
  for (double& v : cols) v = rng.normal();
  for (Backend b : {Backend::Scalar, Backend::Avx2}) {
    if (!qipf::simd::available(b)) continue;
    std::vector<double> m1(d), m2(d);
    const auto a = qipf::simd::kernel_sums(b, cols, n, point, 0.7, m1);
    const auto c = qipf::simd::kernel_sums(b, cols, n, point, 0.7, m2);
    CHECK(a.weight == c.weight);
    CHECK(a.weighted_r2 == c.weighted_r2);
    CHECK(m1 == m2);
  }
}
