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

#include "qipf/hermite.hpp"

#include <cmath>
#include <string>

#include "qipf/error.hpp"

namespace qipf::decomp {

namespace {

void check_args(int k, double x) {
  if (k < 0 || k > kMaxHermiteOrder) {
    throw Error(ErrorCode::OrderTooLarge,
                "Hermite order " + std::to_string(k) + " outside [0, " + std::to_string(kMaxHermiteOrder) + "]");
  }
  if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteInput, "Hermite argument is not finite");
}

// Fills h[0..k].
void recurrence(int k, double x, std::vector<double>& h) {
  h.assign(static_cast<std::size_t>(k) + 1, 0.0);
  h[0] = 1.0;
  if (k >= 1) h[1] = 2.0 * x;
  for (int j = 1; j < k; ++j) {
    h[j + 1] = 2.0 * x * h[j] - 2.0 * j * h[j - 1];
  }
}

HermiteValue assemble(int k, const std::vector<double>& h) {
  HermiteValue v;
  v.h = h[k];
  if (k >= 1) v.first = 2.0 * k * h[k - 1];
  if (k >= 2) v.second = 4.0 * k * (k - 1) * h[k - 2];
  return v;
}

}  // namespace

HermiteValue hermite_eval(int k, double x) {
  check_args(k, x);
  std::vector<double> h;
  recurrence(k, x, h);
  return assemble(k, h);
}

std::vector<HermiteValue> hermite_sweep(int m, double x) {
  check_args(m, x);
  std::vector<double> h;
  recurrence(m, x, h);
  std::vector<HermiteValue> out;
  out.reserve(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) out.push_back(assemble(k, h));
  return out;
}

}  // namespace qipf::decomp
