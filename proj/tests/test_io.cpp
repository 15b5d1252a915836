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

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "qipf/config.hpp"
#include "qipf/error.hpp"
#include "qipf/io.hpp"
#include "qipf/rng.hpp"

using namespace qipf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "qipf_test_io";
  fs::create_directories(dir);
  return dir / name;
}

io::Tensor random_tensor(Rng& rng) {
  io::Tensor t;
  const std::size_t rank = 1 + rng.below(4);
  std::size_t count = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    t.dims.push_back(static_cast<std::uint32_t>(1 + rng.below(6)));
    count *= t.dims.back();
  }
  for (std::size_t i = 0; i < count; ++i) {
    // Raw bit patterns cover subnormals, signed zeros and extremes.
    double v = std::bit_cast<double>(rng.next_u64());
    if (!std::isfinite(v)) v = rng.normal();
    t.data.push_back(v);
  }
  return t;
}

ErrorCode decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    io::decode_ften(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("decode unexpectedly succeeded");
  return ErrorCode::IoFailure;
}

void put_u32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace

TEST_CASE("ften byte layout") {
  const io::Tensor t{{2}, {1.0, -2.0}};
  const auto b = io::encode_ften(t);
  REQUIRE(b.size() == 4 + 4 + 4 + 4 + 16);
  CHECK(std::memcmp(b.data(), "FTEN", 4) == 0);
  CHECK(b[4] == 1);  // version, little-endian
  CHECK(b[8] == 1);  // rank
  CHECK(b[12] == 2);
  // 1.0 = 0x3FF0000000000000, stored low byte first.
  CHECK(b[16 + 7] == 0x3F);
  CHECK(b[16 + 6] == 0xF0);
}

TEST_CASE("ften round trip is bit-identical") {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const auto t = random_tensor(rng);
    const auto back = io::decode_ften(io::encode_ften(t));
    REQUIRE(back.dims == t.dims);
    REQUIRE(back.data.size() == t.data.size());
    CHECK(std::memcmp(back.data.data(), t.data.data(), t.data.size() * sizeof(double)) == 0);
  }
  const auto path = scratch("rt.ften");
  const auto t = random_tensor(rng);
  io::write_ften(t, path);
  CHECK(io::read_ften(path) == t);
}

TEST_CASE("ften corruption") {
  const auto good = io::encode_ften(io::Tensor{{2, 3}, std::vector<double>(6, 0.5)});

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(decode_error(bad_magic) == ErrorCode::BadMagic);

  auto bad_version = good;
  put_u32(bad_version, 4, 7);
  CHECK(decode_error(bad_version) == ErrorCode::BadMagic);

  CHECK(decode_error({good.begin(), good.begin() + 3}) == ErrorCode::TruncatedFile);
  CHECK(decode_error({good.begin(), good.begin() + 14}) == ErrorCode::TruncatedFile);
  CHECK(decode_error({good.begin(), good.end() - 1}) == ErrorCode::TruncatedFile);

  auto longer = good;
  put_u32(longer, 12, 5);  // header now claims 5 x 3 values
  CHECK(decode_error(longer) == ErrorCode::TruncatedFile);

  auto deep = good;
  put_u32(deep, 8, 9);
  CHECK(decode_error(deep) == ErrorCode::DimensionOverflow);

  auto huge = good;
  put_u32(huge, 12, 0xFFFFFFFFu);
  put_u32(huge, 16, 0xFFFFFFFFu);
  put_u32(huge, 8, 2);
  CHECK(decode_error(huge) != ErrorCode::IoFailure);

  try {
    io::read_ften(scratch("does_not_exist.ften"));
    FAIL("expected IoFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoFailure);
  }
}

TEST_CASE("feature tensors round trip") {
  Image f(4, 5, 3);
  Rng rng(2);
  for (double& v : f.data()) v = rng.normal();
  const auto ft = toy::FeatureTensor::from_features(f);
  const auto path = scratch("features.ften");
  io::store_features(ft, path);
  CHECK(io::load_features(path) == ft);
}

TEST_CASE("pgm") {
  CHECK(io::quantize(0.0) == 0);
  CHECK(io::quantize(1.0) == 255);
  CHECK(io::quantize(0.5) == 128);
  CHECK(io::quantize(-3.0) == 0);
  CHECK(io::quantize(7.0) == 255);

  Grid<double> map(3, 4);
  Rng rng(5);
  for (double& v : map.data()) v = rng.uniform();
  const auto path = scratch("map.pgm");
  io::write_pgm(map, path);
  const auto back = io::read_pgm(path);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 4);
  for (std::size_t i = 0; i < map.size(); ++i) CHECK(back.data()[i] == io::quantize(map.data()[i]));

  std::ifstream in(path, std::ios::binary);
  std::string magic;
  in >> magic;
  CHECK(magic == "P5");
}

TEST_CASE("config parsing") {
  const auto defaults = parse_config("");
  CHECK(defaults.qipf.modes == 12);
  CHECK(defaults.mc_passes == 100);
  CHECK(defaults.ensemble_size == 8);
  CHECK(defaults.hyper.dropout_rate == 0.1);
  CHECK(defaults.patch == 8);
  CHECK(defaults.qipf.n_max == 256);

  const auto c = parse_config(
      "# comment\n"
      "height = 24\n"
      "  qipf_modes=6   # trailing\n"
      "normalization = max\n"
      "granularity = class\n"
      "silverman_grid = 1, 2.5\n"
      "seed = 7\n");
  CHECK(c.scene.height == 24);
  CHECK(c.qipf.modes == 6);
  CHECK(c.qipf.normalization == decomp::Normalization::Max);
  CHECK(c.qipf.granularity == Granularity::Class);
  CHECK(c.qipf.silverman_grid == std::vector<double>{1.0, 2.5});
  CHECK(c.seed == 7);
  CHECK(to_text(parse_config(to_text(c))) == to_text(c));

  auto invalid = [](const char* text) {
    try {
      validate(parse_config(text));
      FAIL("expected InvalidConfig for: " << text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidConfig);
    }
  };
  invalid("colour = red\n");
  invalid("height = tall\n");
  invalid("height\n");
  invalid("train_frames = 1\n");
  invalid("qipf_modes = 40\n");
  invalid("silverman_factor = -1\n");
  invalid("normalization = l1\n");
  invalid("mc_passes = 1\n");
  invalid("ensemble_size = 1\n");
  invalid("t_step = 0\n");
}
