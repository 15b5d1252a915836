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

#include <vector>

namespace qipf::decomp {

/// Highest supported polynomial order; larger orders overflow quickly.
inline constexpr int kMaxHermiteOrder = 32;

struct HermiteValue {
  double h = 0.0;
  double first = 0.0;
  double second = 0.0;
};

/// Physicists' Hermite polynomial h_k(x) with its first two derivatives,
/// via h_{k+1} = 2x h_k - 2k h_{k-1}, h'_k = 2k h_{k-1}, h''_k = 4k(k-1) h_{k-2}.
/// Throws OrderTooLarge for k > kMaxHermiteOrder and NonFiniteInput for bad x.
HermiteValue hermite_eval(int k, double x);

/// Orders 1..m in one recurrence sweep; entry k-1 holds order k.
std::vector<HermiteValue> hermite_sweep(int m, double x);

}  // namespace qipf::decomp
