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

// End-to-end experiment: synthetic scenes, classifier and ensemble training,
// per-location QIPF fields, the four uncertainty maps, and patch metrics.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qipf/baselines.hpp"
#include "qipf/config.hpp"
#include "qipf/decomposition.hpp"
#include "qipf/kde.hpp"
#include "qipf/metrics.hpp"

namespace qipf::pipeline {

/// One fitted density field plus the optional standardization applied to its
/// inputs.
struct FittedField {
  decomp::QipfModel model;
  std::optional<kde::Standardizer> whitening;
};

/// Fields for every pixel location (Granularity::Pixel, rows x cols entries)
/// or for every predicted class (Granularity::Class, one entry per class).
/// Empty entries are degenerate and score maximum uncertainty.
struct FieldSet {
  Granularity granularity = Granularity::Pixel;
  std::size_t rows = 0;
  std::size_t cols = 0;
  int modes = 0;
  std::vector<std::optional<FittedField>> fields;

  std::size_t degenerate_count() const;
};

/// Gathers each location's (or class's) feature vectors across the training
/// frames, subsamples to n_max with derive_seed(seed, Subsample, index), sets
/// sigma = factor x Silverman and fits the decomposition. Throws ShapeMismatch
/// for inconsistent frames and InvalidConfig for fewer than two frames.
FieldSet fit_qipf_per_pixel(std::span<const toy::FeatureTensor> train, const QipfSettings& settings,
                            double silverman_factor, std::uint64_t seed, std::size_t threads = 1);

/// index / m of the largest moment per pixel; degenerate fields give 1.0.
baselines::UncertaintyMap qipf_uncertainty_map(const FieldSet& fields, const toy::FeatureTensor& test,
                                               std::size_t threads = 1);

struct SweepRow {
  double t = 0.0;
  metrics::ConfusionCounts counts;  // summed over test frames
  metrics::Scores scores;           // mean over test frames of per-frame scores
};

struct MethodResult {
  baselines::Method method = baselines::Method::Qipf;
  double u_min = 0.0;
  double u_max = 0.0;
  std::vector<SweepRow> sweep;
  metrics::Scores average;  // over the t grid, then over frames
  std::uint64_t forward_passes = 0;
  double seconds = 0.0;
  std::vector<Grid<double>> test_maps;
  std::vector<Grid<bool>> test_errors;
};

struct RunReport {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  double silverman_factor = 1.0;
  std::vector<std::pair<double, double>> silverman_scores;  // factor, validation PAvPU at t = 0.5
  std::size_t degenerate_locations = 0;
  double classifier_train_accuracy = 0.0;
  std::string simd_backend;
  std::size_t concurrency = 1;
  std::vector<MethodResult> methods;

  const MethodResult* find(baselines::Method m) const;
};

/// Patch-reduced maps of one method on several frames, with their error maps.
struct EvaluatedMaps {
  std::vector<Grid<double>> pixel_maps;
  std::vector<Grid<bool>> errors;
};

/// Sweep + aggregation over frames for one method.
MethodResult evaluate_method(baselines::Method method, const EvaluatedMaps& val, const EvaluatedMaps& test,
                             std::size_t patch, const std::vector<double>& t_grid);

/// Runs the full experiment. Failures rethrow as Error with the failing stage
/// prepended to the message.
RunReport run_experiment(const ExperimentConfig& cfg);

/// QIPF and softmax methods on externally computed features.
/// `features` is frames x H x W x F, `labels` frames x H x W; the first
/// train_frames frames fit the fields, the next val_frames set the threshold
/// range, the next test_frames are scored.
RunReport run_external(const ExperimentConfig& cfg, std::span<const toy::FeatureTensor> frames,
                       std::span<const Grid<int>> labels);

/// Deterministic report content (no wall-clock values), as pretty JSON.
std::string report_json(const RunReport& report);
/// Per-method wall-clock seconds and forward-pass counts, as JSON.
std::string timings_json(const RunReport& report);
/// method,t,PA,PU,PAvPU with NA for undefined scores.
std::string metrics_csv(const RunReport& report);

/// Writes metrics.csv, report.json, timings.json and <method>_test<k>.pgm
/// heatmaps (plus error_test<k>.pgm). Throws IoFailure.
void export_report(const RunReport& report, const std::filesystem::path& out_dir);

struct BenchResult {
  double qipf_seconds = 0.0;        // one deterministic forward + QIPF map per frame
  double mc_dropout_seconds = 0.0;  // `passes` dropout forwards per frame
  std::uint64_t qipf_forward_passes = 0;
  std::uint64_t mc_forward_passes = 0;
  double n_doubling_ratio = 0.0;  // time(2n, m) / time(n, m)
  double m_doubling_ratio = 0.0;  // time(n, 2m) / time(n, m)
};

/// Wall time of moment extraction for `points` evaluations against a field of
/// n samples in d dimensions with m modes (best of `repeats`).
double time_qipf_evaluation(std::size_t n, int m, std::size_t d, std::size_t points, std::uint64_t seed,
                            int repeats = 5);

BenchResult run_benchmark(const ExperimentConfig& cfg);

/// Frames x H x W x F feature tensor of every generated frame (train, val,
/// test order) and the matching frames x H x W label tensor.
struct ExportedFeatures {
  std::vector<toy::FeatureTensor> frames;
  std::vector<Grid<int>> labels;
};
ExportedFeatures generate_features(const ExperimentConfig& cfg);

}  // namespace qipf::pipeline
