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

// File formats.
//
// FTEN: "FTEN" | u32 version (1) | u32 rank | rank x u32 dims | row-major f64
// payload. All integers and floats little-endian. Bytes after the payload are
// ignored.
//
// PGM: binary P5, 8-bit, values in [0, 1] scaled by 255 and rounded.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qipf/classifier.hpp"
#include "qipf/grid.hpp"

namespace qipf::io {

inline constexpr std::uint32_t kFtenVersion = 1;
inline constexpr std::uint32_t kFtenMaxRank = 8;

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<double> data;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::vector<std::uint8_t> encode_ften(const Tensor& tensor);

/// Throws BadMagic (magic or version), TruncatedFile (header or payload cut
/// short) and DimensionOverflow (rank > kFtenMaxRank or element count overflow).
Tensor decode_ften(std::span<const std::uint8_t> bytes);

void write_ften(const Tensor& tensor, const std::filesystem::path& path);
Tensor read_ften(const std::filesystem::path& path);

/// Stored as a rank-3 H x W x F tensor of the pre-softmax features.
void store_features(const toy::FeatureTensor& ft, const std::filesystem::path& path);
toy::FeatureTensor load_features(const std::filesystem::path& path);

std::uint8_t quantize(double value);
void write_pgm(const Grid<double>& map, const std::filesystem::path& path);
Grid<std::uint8_t> read_pgm(const std::filesystem::path& path);

}  // namespace qipf::io
