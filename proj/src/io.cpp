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

#include "qipf/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

#include "qipf/error.hpp"

namespace qipf::io {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'F', 'T', 'E', 'N'};

template <class U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <class U>
U get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[offset + i]) << (8 * i);
  return v;
}

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace

std::vector<std::uint8_t> encode_ften(const Tensor& tensor) {
  std::size_t count = 1;
  for (auto d : tensor.dims) count *= d;
  if (tensor.dims.size() > kFtenMaxRank) throw Error(ErrorCode::DimensionOverflow, "rank exceeds 8");
  if (count != tensor.data.size()) throw Error(ErrorCode::DimensionMismatch, "dims do not match payload length");

  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.reserve(12 + 4 * tensor.dims.size() + 8 * count);
  put_le(out, kFtenVersion);
  put_le(out, static_cast<std::uint32_t>(tensor.dims.size()));
  for (auto d : tensor.dims) put_le(out, d);
  for (double v : tensor.data) put_le(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Tensor decode_ften(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorCode::TruncatedFile, "missing magic");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) throw Error(ErrorCode::BadMagic, "not an FTEN file");
  if (bytes.size() < 12) throw Error(ErrorCode::TruncatedFile, "header cut short");
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kFtenVersion) throw Error(ErrorCode::BadMagic, "unsupported FTEN version " + std::to_string(version));
  const auto rank = get_le<std::uint32_t>(bytes, 8);
  if (rank > kFtenMaxRank) throw Error(ErrorCode::DimensionOverflow, "rank " + std::to_string(rank) + " exceeds 8");
  const std::size_t header = 12 + 4 * static_cast<std::size_t>(rank);
  if (bytes.size() < header) throw Error(ErrorCode::TruncatedFile, "dimension list cut short");

  Tensor t;
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const auto d = get_le<std::uint32_t>(bytes, 12 + 4 * i);
    t.dims.push_back(d);
    if (d != 0 && count > std::numeric_limits<std::uint64_t>::max() / 8 / d) {
      throw Error(ErrorCode::DimensionOverflow, "element count overflows");
    }
    count *= d;
  }
  if (count > (bytes.size() - header) / 8) {
    throw Error(ErrorCode::TruncatedFile, "header declares " + std::to_string(count) + " values, file holds " +
                                              std::to_string((bytes.size() - header) / 8));
  }
  t.data.resize(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    t.data[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, header + 8 * i));
  }
  return t;
}

void write_ften(const Tensor& tensor, const std::filesystem::path& path) { write_all(path, encode_ften(tensor)); }

Tensor read_ften(const std::filesystem::path& path) { return decode_ften(read_all(path)); }

void store_features(const toy::FeatureTensor& ft, const std::filesystem::path& path) {
  const auto& f = ft.features;
  write_ften({{static_cast<std::uint32_t>(f.height()), static_cast<std::uint32_t>(f.width()),
               static_cast<std::uint32_t>(f.channels())},
              f.data()},
             path);
}

toy::FeatureTensor load_features(const std::filesystem::path& path) {
  auto t = read_ften(path);
  if (t.dims.size() != 3) throw Error(ErrorCode::DimensionMismatch, "feature tensor must be rank 3 (H x W x F)");
  Image img(t.dims[0], t.dims[1], t.dims[2]);
  img.data() = std::move(t.data);
  return toy::FeatureTensor::from_features(std::move(img));
}

std::uint8_t quantize(double value) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(value, 0.0, 1.0) * 255.0));
}

void write_pgm(const Grid<double>& map, const std::filesystem::path& path) {
  const std::string header = "P5\n" + std::to_string(map.cols()) + " " + std::to_string(map.rows()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  for (double v : map.data()) bytes.push_back(quantize(v));
  write_all(path, bytes);
}

Grid<std::uint8_t> read_pgm(const std::filesystem::path& path) {
  const auto bytes = read_all(path);
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && (std::isspace(bytes[pos]) || bytes[pos] == '#')) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        ++pos;
      }
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
    return tok;
  };
  if (token() != "P5") throw Error(ErrorCode::BadMagic, "not a binary PGM");
  std::size_t width = 0, height = 0, maxval = 0;
  try {
    width = std::stoul(token());
    height = std::stoul(token());
    maxval = std::stoul(token());
  } catch (const std::exception&) {
    throw Error(ErrorCode::TruncatedFile, "PGM header incomplete");
  }
  if (maxval != 255) throw Error(ErrorCode::BadMagic, "only 8-bit PGM supported");
  ++pos;  // single whitespace before raster
  if (bytes.size() < pos + width * height) throw Error(ErrorCode::TruncatedFile, "PGM raster cut short");
  Grid<std::uint8_t> g(height, width);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), width * height, g.data().begin());
  return g;
}

}  // namespace qipf::io
