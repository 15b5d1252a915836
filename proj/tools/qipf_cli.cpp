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

// qipf: command-line front end.
//
//   qipf run --config <file> --out <dir> [--seed N]
//   qipf bench --config <file>
//   qipf export-features --config <file> --out <file> [--labels-out <file>]
//   qipf eval --features <ften> --labels <ften> --config <file> [--out <dir>]
//
// Exit status: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qipf/config.hpp"
#include "qipf/error.hpp"
#include "qipf/io.hpp"
#include "qipf/pipeline.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

std::string fmt_score(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

void print_summary(const qipf::pipeline::RunReport& report) {
  std::printf("%-12s %8s %8s %8s %10s %8s\n", "method", "PA", "PU", "PAvPU", "seconds", "passes");
  for (const auto& m : report.methods) {
    std::printf("%-12s %8s %8s %8s %10.4f %8llu\n", std::string(qipf::baselines::to_string(m.method)).c_str(),
                fmt_score(m.average.pa).c_str(), fmt_score(m.average.pu).c_str(), fmt_score(m.average.pavpu).c_str(),
                m.seconds, static_cast<unsigned long long>(m.forward_passes));
  }
  std::printf("silverman factor %.4g, degenerate locations %zu, simd %s\n", report.silverman_factor,
              report.degenerate_locations, report.simd_backend.c_str());
}

// Splits a frames x H x W x F tensor into per-frame feature tensors.
std::vector<qipf::toy::FeatureTensor> split_features(const qipf::io::Tensor& t) {
  if (t.dims.size() != 4) throw qipf::Error(qipf::ErrorCode::DimensionMismatch, "features must be frames x H x W x F");
  const std::size_t per = static_cast<std::size_t>(t.dims[1]) * t.dims[2] * t.dims[3];
  std::vector<qipf::toy::FeatureTensor> out;
  for (std::size_t f = 0; f < t.dims[0]; ++f) {
    qipf::Image img(t.dims[1], t.dims[2], t.dims[3]);
    std::copy_n(t.data.begin() + static_cast<std::ptrdiff_t>(f * per), per, img.data().begin());
    out.push_back(qipf::toy::FeatureTensor::from_features(std::move(img)));
  }
  return out;
}

std::vector<qipf::Grid<int>> split_labels(const qipf::io::Tensor& t) {
  if (t.dims.size() != 3) throw qipf::Error(qipf::ErrorCode::DimensionMismatch, "labels must be frames x H x W");
  const std::size_t per = static_cast<std::size_t>(t.dims[1]) * t.dims[2];
  std::vector<qipf::Grid<int>> out;
  for (std::size_t f = 0; f < t.dims[0]; ++f) {
    qipf::Grid<int> g(t.dims[1], t.dims[2]);
    for (std::size_t i = 0; i < per; ++i) g.data()[i] = static_cast<int>(t.data[f * per + i]);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-shot feature-space uncertainty (QIPF) toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path, labels_out, features_path, labels_path;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "run the synthetic segmentation experiment");
  run->add_option("--config", config_path, "configuration file")->required();
  run->add_option("--out", out_path, "output directory")->required();
  run->add_option("--seed", seed, "override the master seed");

  auto* bench = app.add_subcommand("bench", "time QIPF against MC dropout and check O(n + m) scaling");
  bench->add_option("--config", config_path, "configuration file")->required();

  auto* exp = app.add_subcommand("export-features", "write classifier features of all frames as FTEN");
  exp->add_option("--config", config_path, "configuration file")->required();
  exp->add_option("--out", out_path, "feature tensor (frames x H x W x F)")->required();
  exp->add_option("--labels-out", labels_out, "label tensor (default: <out>.labels)");

  auto* eval = app.add_subcommand("eval", "score QIPF and softmax uncertainty on external features");
  eval->add_option("--features", features_path, "frames x H x W x F FTEN file")->required();
  eval->add_option("--labels", labels_path, "frames x H x W FTEN file")->required();
  eval->add_option("--config", config_path, "configuration file")->required();
  eval->add_option("--out", out_path, "optional output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  qipf::ExperimentConfig cfg;
  try {
    cfg = qipf::load_config(config_path);
    if (seed) cfg.seed = *seed;
  } catch (const qipf::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (*run) {
      const auto report = qipf::pipeline::run_experiment(cfg);
      qipf::pipeline::export_report(report, out_path);
      print_summary(report);
    } else if (*bench) {
      const auto b = qipf::pipeline::run_benchmark(cfg);
      std::printf("qipf phase        %.4f s  (%llu forward passes)\n", b.qipf_seconds,
                  static_cast<unsigned long long>(b.qipf_forward_passes));
      std::printf("mc dropout phase  %.4f s  (%llu forward passes)\n", b.mc_dropout_seconds,
                  static_cast<unsigned long long>(b.mc_forward_passes));
      std::printf("time(2n)/time(n)  %.3f\n", b.n_doubling_ratio);
      std::printf("time(2m)/time(m)  %.3f\n", b.m_doubling_ratio);
    } else if (*exp) {
      const auto feats = qipf::pipeline::generate_features(cfg);
      const auto& f0 = feats.frames.front().features;
      qipf::io::Tensor ft{{static_cast<std::uint32_t>(feats.frames.size()), static_cast<std::uint32_t>(f0.height()),
                           static_cast<std::uint32_t>(f0.width()), static_cast<std::uint32_t>(f0.channels())},
                          {}};
      qipf::io::Tensor lt{{static_cast<std::uint32_t>(feats.frames.size()), static_cast<std::uint32_t>(f0.height()),
                           static_cast<std::uint32_t>(f0.width())},
                          {}};
      for (std::size_t f = 0; f < feats.frames.size(); ++f) {
        const auto& d = feats.frames[f].features.data();
        ft.data.insert(ft.data.end(), d.begin(), d.end());
        for (int v : feats.labels[f].data()) lt.data.push_back(v);
      }
      qipf::io::write_ften(ft, out_path);
      qipf::io::write_ften(lt, labels_out.empty() ? out_path + ".labels" : labels_out);
    } else if (*eval) {
      const auto frames = split_features(qipf::io::read_ften(features_path));
      const auto labels = split_labels(qipf::io::read_ften(labels_path));
      const auto report = qipf::pipeline::run_external(cfg, frames, labels);
      if (!out_path.empty()) qipf::pipeline::export_report(report, out_path);
      std::cout << qipf::pipeline::metrics_csv(report);
      print_summary(report);
    }
  } catch (const qipf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == qipf::ErrorCode::InvalidConfig ? kConfigError : kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
