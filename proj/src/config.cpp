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

#include "qipf/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "qipf/error.hpp"

namespace qipf {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, std::string_view value, const std::string& why) {
  throw Error(ErrorCode::InvalidConfig, "key '" + key + "' value '" + std::string(value) + "': " + why);
}

template <class T>
T parse_number(const std::string& key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad(key, v, "not a number");
  return out;
}

bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad(key, v, "expected true/false");
}

std::vector<double> parse_list(const std::string& key, std::string_view v) {
  std::vector<double> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(parse_number<double>(key, trim(v.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (out.empty()) bad(key, v, "empty list");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"height", [](auto& c, auto& k, auto v) { c.scene.height = parse_number<std::size_t>(k, v); }},
      {"width", [](auto& c, auto& k, auto v) { c.scene.width = parse_number<std::size_t>(k, v); }},
      {"classes", [](auto& c, auto& k, auto v) { c.scene.classes = parse_number<int>(k, v); }},
      {"noise", [](auto& c, auto& k, auto v) { c.scene.noise = parse_number<double>(k, v); }},
      {"regions", [](auto& c, auto& k, auto v) { c.scene.regions = parse_number<int>(k, v); }},
      {"ood_val", [](auto& c, auto& k, auto v) { c.ood_val = parse_bool(k, v); }},
      {"ood_test", [](auto& c, auto& k, auto v) { c.ood_test = parse_bool(k, v); }},
      {"train_frames", [](auto& c, auto& k, auto v) { c.train_frames = parse_number<std::size_t>(k, v); }},
      {"val_frames", [](auto& c, auto& k, auto v) { c.val_frames = parse_number<std::size_t>(k, v); }},
      {"test_frames", [](auto& c, auto& k, auto v) { c.test_frames = parse_number<std::size_t>(k, v); }},
      {"hidden", [](auto& c, auto& k, auto v) { c.hyper.hidden = parse_number<std::size_t>(k, v); }},
      {"lr", [](auto& c, auto& k, auto v) { c.hyper.lr = parse_number<double>(k, v); }},
      {"epochs", [](auto& c, auto& k, auto v) { c.hyper.epochs = parse_number<int>(k, v); }},
      {"batch", [](auto& c, auto& k, auto v) { c.hyper.batch = parse_number<std::size_t>(k, v); }},
      {"dropout_rate", [](auto& c, auto& k, auto v) { c.hyper.dropout_rate = parse_number<double>(k, v); }},
      {"qipf_modes", [](auto& c, auto& k, auto v) { c.qipf.modes = parse_number<int>(k, v); }},
      {"silverman_factor", [](auto& c, auto& k, auto v) { c.qipf.silverman_factor = parse_number<double>(k, v); }},
      {"silverman_cv", [](auto& c, auto& k, auto v) { c.qipf.silverman_cv = parse_bool(k, v); }},
      {"silverman_grid", [](auto& c, auto& k, auto v) { c.qipf.silverman_grid = parse_list(k, v); }},
      {"n_max", [](auto& c, auto& k, auto v) { c.qipf.n_max = parse_number<std::size_t>(k, v); }},
      {"normalization",
       [](auto& c, auto& k, auto v) {
         if (v == "l2") c.qipf.normalization = decomp::Normalization::L2;
         else if (v == "max") c.qipf.normalization = decomp::Normalization::Max;
         else bad(k, v, "expected l2 or max");
       }},
      {"granularity",
       [](auto& c, auto& k, auto v) {
         if (v == "pixel") c.qipf.granularity = Granularity::Pixel;
         else if (v == "class") c.qipf.granularity = Granularity::Class;
         else bad(k, v, "expected pixel or class");
       }},
      {"whiten", [](auto& c, auto& k, auto v) { c.qipf.whiten = parse_bool(k, v); }},
      {"mc_passes", [](auto& c, auto& k, auto v) { c.mc_passes = parse_number<int>(k, v); }},
      {"ensemble_size", [](auto& c, auto& k, auto v) { c.ensemble_size = parse_number<std::size_t>(k, v); }},
      {"patch", [](auto& c, auto& k, auto v) { c.patch = parse_number<std::size_t>(k, v); }},
      {"t_step", [](auto& c, auto& k, auto v) { c.t_step = parse_number<double>(k, v); }},
      {"seed", [](auto& c, auto& k, auto v) { c.seed = parse_number<std::uint64_t>(k, v); }},
      {"threads", [](auto& c, auto& k, auto v) { c.threads = parse_number<std::size_t>(k, v); }},
  };
  return table;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

}  // namespace

std::string_view to_string(Granularity g) noexcept { return g == Granularity::Pixel ? "pixel" : "class"; }

std::string_view to_string(decomp::Normalization n) noexcept {
  return n == decomp::Normalization::L2 ? "l2" : "max";
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    it->second(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  require(c.scene.height >= 16 && c.scene.width >= 16, "height and width must be >= 16");
  require(c.scene.classes == 3 || c.scene.classes == 4, "classes must be 3 or 4");
  require(c.scene.noise >= 0.0 && std::isfinite(c.scene.noise), "noise must be >= 0");
  require(c.scene.regions >= 1, "regions must be >= 1");
  require(c.train_frames >= 2, "train_frames must be >= 2");
  require(c.val_frames >= 1 && c.test_frames >= 1, "val_frames and test_frames must be >= 1");
  require(c.hyper.hidden >= 1 && c.hyper.batch >= 1 && c.hyper.epochs >= 0, "network sizes must be positive");
  require(c.hyper.lr > 0.0, "lr must be > 0");
  require(c.hyper.dropout_rate >= 0.0 && c.hyper.dropout_rate < 1.0, "dropout_rate must lie in [0, 1)");
  require(c.qipf.modes >= 1 && c.qipf.modes <= decomp::kMaxHermiteOrder, "qipf_modes must lie in [1, 32]");
  require(c.qipf.silverman_factor > 0.0, "silverman_factor must be > 0");
  for (double f : c.qipf.silverman_grid) require(f > 0.0, "silverman_grid entries must be > 0");
  require(c.qipf.n_max >= 1, "n_max must be >= 1");
  require(c.mc_passes >= 2, "mc_passes must be >= 2");
  require(c.ensemble_size >= 2, "ensemble_size must be >= 2");
  require(c.patch >= 1, "patch must be >= 1");
  require(c.t_step > 0.0 && c.t_step <= 1.0, "t_step must lie in (0, 1]");
  require(c.threads >= 1, "threads must be >= 1");
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream o;
  o.precision(17);
  auto b = [](bool v) { return v ? "true" : "false"; };
  o << "height = " << c.scene.height << "\nwidth = " << c.scene.width << "\nclasses = " << c.scene.classes
    << "\nnoise = " << c.scene.noise << "\nregions = " << c.scene.regions << "\nood_val = " << b(c.ood_val)
    << "\nood_test = " << b(c.ood_test) << "\ntrain_frames = " << c.train_frames
    << "\nval_frames = " << c.val_frames << "\ntest_frames = " << c.test_frames << "\nhidden = " << c.hyper.hidden
    << "\nlr = " << c.hyper.lr << "\nepochs = " << c.hyper.epochs << "\nbatch = " << c.hyper.batch
    << "\ndropout_rate = " << c.hyper.dropout_rate << "\nqipf_modes = " << c.qipf.modes
    << "\nsilverman_factor = " << c.qipf.silverman_factor << "\nsilverman_cv = " << b(c.qipf.silverman_cv)
    << "\nsilverman_grid = ";
  for (std::size_t i = 0; i < c.qipf.silverman_grid.size(); ++i) o << (i ? "," : "") << c.qipf.silverman_grid[i];
  o << "\nn_max = " << c.qipf.n_max << "\nnormalization = " << to_string(c.qipf.normalization)
    << "\ngranularity = " << to_string(c.qipf.granularity) << "\nwhiten = " << b(c.qipf.whiten)
    << "\nmc_passes = " << c.mc_passes << "\nensemble_size = " << c.ensemble_size << "\npatch = " << c.patch
    << "\nt_step = " << c.t_step << "\nseed = " << c.seed << "\nthreads = " << c.threads << "\n";
  return o.str();
}

}  // namespace qipf
