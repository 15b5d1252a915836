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

#include "qipf/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "qipf/error.hpp"
#include "qipf/io.hpp"
#include "qipf/parallel.hpp"
#include "qipf/rng.hpp"

namespace qipf::pipeline {

namespace {

using baselines::Method;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs `fn`, rethrowing any failure with the stage name attached.
template <class Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage '") + name + "': " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::IoFailure, std::string("stage '") + name + "': " + e.what());
  }
}

std::vector<toy::SceneSample> make_scenes(const ExperimentConfig& cfg, SeedStream stream, std::size_t count,
                                          bool ood) {
  auto sc = cfg.scene;
  sc.ood = ood;
  std::vector<toy::SceneSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(toy::generate_scene(derive_seed(cfg.seed, stream, i), sc));
  return out;
}

kde::SampleSet gather(std::span<const toy::FeatureTensor> train, std::size_t r, std::size_t c) {
  const std::size_t d = train.front().features.channels();
  std::vector<double> flat;
  flat.reserve(train.size() * d);
  for (const auto& ft : train) {
    const auto p = ft.features.pixel(r, c);
    flat.insert(flat.end(), p.begin(), p.end());
  }
  return kde::SampleSet(train.size(), d, std::move(flat));
}

std::optional<FittedField> fit_field(const kde::SampleSet& all, const QipfSettings& s, double factor,
                                     std::uint64_t seed) {
  try {
    auto samples = kde::subsample(all, s.n_max, seed);
    std::optional<kde::Standardizer> whitening;
    if (s.whiten) {
      whitening = kde::Standardizer::fit(samples);
      samples = whitening->apply(samples);
    }
    const auto sigma = kde::Bandwidth(factor * kde::silverman_bandwidth(samples).sigma());
    return FittedField{decomp::fit(samples, sigma, s.modes, s.normalization), whitening};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateSamples || e.code() == ErrorCode::DegenerateField) return std::nullopt;
    throw;
  }
}

double field_uncertainty(const std::optional<FittedField>& field, int modes, std::span<const double> point) {
  if (!field) return 1.0;
  const auto spectrum = field->whitening ? decomp::moments(field->model, field->whitening->apply(point))
                                         : decomp::moments(field->model, point);
  return decomp::normalized_uncertainty(decomp::uncertainty_index(spectrum), modes);
}

Grid<double> patch_values(const Grid<double>& map, std::size_t patch) { return metrics::patch_mean(map, patch); }

std::pair<double, double> value_range(std::span<const Grid<double>> patch_maps) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& m : patch_maps) {
    for (double v : m.data()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  return {lo, hi};
}

// PAvPU at t = 0.5 with counts pooled over frames, range taken from the same frames.
double validation_pavpu(const EvaluatedMaps& maps, std::size_t patch) {
  std::vector<Grid<double>> patches;
  for (const auto& m : maps.pixel_maps) patches.push_back(patch_values(m, patch));
  const auto [lo, hi] = value_range(patches);
  const double u_th = metrics::threshold_value(lo, hi, 0.5);
  metrics::ConfusionCounts pooled;
  for (std::size_t f = 0; f < patches.size(); ++f) {
    const auto c = metrics::confusion(metrics::patch_accurate(maps.errors[f], patch), patches[f], u_th);
    pooled.n_ac += c.n_ac;
    pooled.n_au += c.n_au;
    pooled.n_ic += c.n_ic;
    pooled.n_iu += c.n_iu;
  }
  return metrics::scores(pooled).pavpu.value_or(-1.0);
}

struct QipfSelection {
  FieldSet fields;
  double factor = 1.0;
  std::vector<std::pair<double, double>> scores;
};

QipfSelection select_and_fit(const ExperimentConfig& cfg, std::span<const toy::FeatureTensor> train,
                             std::span<const toy::FeatureTensor> val, std::span<const Grid<bool>> val_errors) {
  const std::uint64_t seed = derive_seed(cfg.seed, SeedStream::Subsample);
  QipfSelection sel;
  if (!cfg.qipf.silverman_cv) {
    sel.factor = cfg.qipf.silverman_factor;
    sel.fields = fit_qipf_per_pixel(train, cfg.qipf, sel.factor, seed, cfg.threads);
    return sel;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (double factor : cfg.qipf.silverman_grid) {
    auto fields = fit_qipf_per_pixel(train, cfg.qipf, factor, seed, cfg.threads);
    EvaluatedMaps maps;
    for (std::size_t f = 0; f < val.size(); ++f) {
      maps.pixel_maps.push_back(qipf_uncertainty_map(fields, val[f], cfg.threads).values);
      maps.errors.push_back(val_errors[f]);
    }
    const double score = validation_pavpu(maps, cfg.patch);
    sel.scores.emplace_back(factor, score);
    if (score > best) {
      best = score;
      sel.factor = factor;
      sel.fields = std::move(fields);
    }
  }
  return sel;
}

// Argmax of the member-mean softmax, ties to the lowest class.
Grid<int> ensemble_preds(std::span<const toy::FeatureTensor> outs) {
  auto preds = outs.front().preds;
  const std::size_t C = outs.front().probs.channels();
  std::vector<double> mean(C);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (const auto& o : outs) {
      for (std::size_t k = 0; k < C; ++k) mean[k] += o.probs.data()[i * C + k];
    }
    preds.data()[i] = static_cast<int>(std::max_element(mean.begin(), mean.end()) - mean.begin());
  }
  return preds;
}

nlohmann::json scores_json(const metrics::Scores& s) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"PA", opt(s.pa)}, {"PU", opt(s.pu)}, {"PAvPU", opt(s.pavpu)}};
}

std::string csv_cell(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  return buf;
}

}  // namespace

std::size_t FieldSet::degenerate_count() const {
  return static_cast<std::size_t>(std::count_if(fields.begin(), fields.end(), [](const auto& f) { return !f; }));
}

const MethodResult* RunReport::find(Method m) const {
  for (const auto& r : methods) {
    if (r.method == m) return &r;
  }
  return nullptr;
}

FieldSet fit_qipf_per_pixel(std::span<const toy::FeatureTensor> train, const QipfSettings& settings,
                            double silverman_factor, std::uint64_t seed, std::size_t threads) {
  if (train.size() < 2) throw Error(ErrorCode::InvalidConfig, "need at least two training frames");
  const auto& first = train.front().features;
  for (const auto& ft : train) {
    if (ft.features.height() != first.height() || ft.features.width() != first.width() ||
        ft.features.channels() != first.channels()) {
      throw Error(ErrorCode::ShapeMismatch, "training frames differ in shape");
    }
  }
  FieldSet set;
  set.granularity = settings.granularity;
  set.rows = first.height();
  set.cols = first.width();
  set.modes = settings.modes;

  if (settings.granularity == Granularity::Pixel) {
    set.fields.resize(set.rows * set.cols);
    parallel_for(set.fields.size(), threads, [&](std::size_t idx) {
      const auto all = gather(train, idx / set.cols, idx % set.cols);
      set.fields[idx] = fit_field(all, settings, silverman_factor, derive_seed(seed, SeedStream::Subsample, idx));
    });
    return set;
  }

  const std::size_t classes = train.front().probs.channels();
  const std::size_t d = first.channels();
  std::vector<std::vector<double>> per_class(classes);
  for (const auto& ft : train) {
    for (std::size_t r = 0; r < set.rows; ++r) {
      for (std::size_t c = 0; c < set.cols; ++c) {
        const auto p = ft.features.pixel(r, c);
        auto& bucket = per_class[static_cast<std::size_t>(ft.preds(r, c))];
        bucket.insert(bucket.end(), p.begin(), p.end());
      }
    }
  }
  set.fields.resize(classes);
  parallel_for(classes, threads, [&](std::size_t k) {
    if (per_class[k].empty()) return;
    const kde::SampleSet all(per_class[k].size() / d, d, per_class[k]);
    set.fields[k] = fit_field(all, settings, silverman_factor, derive_seed(seed, SeedStream::Subsample, k));
  });
  return set;
}

baselines::UncertaintyMap qipf_uncertainty_map(const FieldSet& fields, const toy::FeatureTensor& test,
                                               std::size_t threads) {
  const std::size_t H = test.features.height();
  const std::size_t W = test.features.width();
  if (H != fields.rows || W != fields.cols) throw Error(ErrorCode::ShapeMismatch, "field grid does not match frame");
  baselines::UncertaintyMap map{Grid<double>(H, W, 1.0), Method::Qipf};
  parallel_for(H * W, threads, [&](std::size_t idx) {
    const std::size_t r = idx / W;
    const std::size_t c = idx % W;
    const std::size_t slot =
        fields.granularity == Granularity::Pixel ? idx : static_cast<std::size_t>(test.preds(r, c));
    const auto& field = slot < fields.fields.size() ? fields.fields[slot] : std::optional<FittedField>{};
    map.values(r, c) = field_uncertainty(field, fields.modes, test.features.pixel(r, c));
  });
  return map;
}

MethodResult evaluate_method(Method method, const EvaluatedMaps& val, const EvaluatedMaps& test, std::size_t patch,
                             const std::vector<double>& t_grid) {
  MethodResult res;
  res.method = method;
  std::vector<Grid<double>> val_patches;
  for (const auto& m : val.pixel_maps) val_patches.push_back(patch_values(m, patch));
  std::tie(res.u_min, res.u_max) = value_range(val_patches);

  std::vector<metrics::ThresholdSweep> per_frame;
  for (std::size_t f = 0; f < test.pixel_maps.size(); ++f) {
    per_frame.push_back(metrics::sweep(metrics::patch_accurate(test.errors[f], patch),
                                       patch_values(test.pixel_maps[f], patch), res.u_min, res.u_max, t_grid));
  }

  auto mean_defined = [](const std::vector<std::optional<double>>& vals) -> std::optional<double> {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& v : vals) {
      if (v) {
        s += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return s / static_cast<double>(n);
  };

  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    SweepRow row;
    row.t = t_grid[i];
    std::vector<std::optional<double>> pa, pu, pavpu;
    for (const auto& sw : per_frame) {
      const auto& c = sw.counts[i];
      row.counts.n_ac += c.n_ac;
      row.counts.n_au += c.n_au;
      row.counts.n_ic += c.n_ic;
      row.counts.n_iu += c.n_iu;
      pa.push_back(sw.scores[i].pa);
      pu.push_back(sw.scores[i].pu);
      pavpu.push_back(sw.scores[i].pavpu);
    }
    row.scores = {mean_defined(pa), mean_defined(pu), mean_defined(pavpu)};
    res.sweep.push_back(row);
  }

  std::vector<std::optional<double>> pa, pu, pavpu;
  for (const auto& sw : per_frame) {
    const auto a = metrics::average(sw);
    pa.push_back(a.pa);
    pu.push_back(a.pu);
    pavpu.push_back(a.pavpu);
  }
  res.average = {mean_defined(pa), mean_defined(pu), mean_defined(pavpu)};
  res.test_maps = test.pixel_maps;
  res.test_errors = test.errors;
  return res;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  RunReport report;
  report.config = cfg;
  report.seed = cfg.seed;
  report.simd_backend = std::string(simd::to_string(simd::best_backend()));
  report.concurrency = cfg.threads;
  const auto t_grid = metrics::default_t_grid(cfg.t_step);

  const auto train_scenes = stage("scenes", [&] { return make_scenes(cfg, SeedStream::TrainScenes, cfg.train_frames, false); });
  const auto val_scenes = stage("scenes", [&] { return make_scenes(cfg, SeedStream::ValScenes, cfg.val_frames, cfg.ood_val); });
  const auto test_scenes = stage("scenes", [&] { return make_scenes(cfg, SeedStream::TestScenes, cfg.test_frames, cfg.ood_test); });

  const auto model = stage("train classifier", [&] {
    return toy::train(train_scenes, cfg.hyper, derive_seed(cfg.seed, SeedStream::ClassifierInit));
  });
  report.classifier_train_accuracy = model.train_accuracy;
  const auto members = stage("train ensemble", [&] {
    std::vector<toy::PixelClassifier> out;
    for (std::size_t j = 0; j < cfg.ensemble_size; ++j) {
      out.push_back(toy::train(train_scenes, cfg.hyper, derive_seed(cfg.seed, SeedStream::EnsembleMember, j)));
    }
    return out;
  });

  auto deterministic = [&](const std::vector<toy::SceneSample>& scenes) {
    std::vector<toy::FeatureTensor> out;
    for (const auto& s : scenes) out.push_back(toy::forward(model, s));
    return out;
  };
  const auto train_ft = stage("features", [&] { return deterministic(train_scenes); });
  const auto val_ft = stage("features", [&] { return deterministic(val_scenes); });

  std::vector<Grid<bool>> val_errors;
  for (std::size_t f = 0; f < val_scenes.size(); ++f) {
    val_errors.push_back(metrics::error_map(val_ft[f].preds, val_scenes[f].labels));
  }

  auto selection = stage("fit qipf", [&] { return select_and_fit(cfg, train_ft, val_ft, val_errors); });
  report.silverman_factor = selection.factor;
  report.silverman_scores = selection.scores;
  report.degenerate_locations = selection.fields.degenerate_count();
  const FieldSet& fields = selection.fields;

  // Validation maps for the threshold ranges.
  EvaluatedMaps val_qipf, val_soft, val_mc, val_ens;
  stage("validation maps", [&] {
    for (std::size_t f = 0; f < val_scenes.size(); ++f) {
      val_qipf.pixel_maps.push_back(qipf_uncertainty_map(fields, val_ft[f], cfg.threads).values);
      val_soft.pixel_maps.push_back(baselines::softmax_uncertainty(val_ft[f]).values);
      val_mc.pixel_maps.push_back(
          baselines::mc_dropout_uncertainty(model, val_scenes[f], cfg.mc_passes,
                                            derive_seed(cfg.seed, SeedStream::McDropout, 1000 + f))
              .values);
      std::vector<toy::FeatureTensor> outs;
      for (const auto& m : members) outs.push_back(toy::forward(m, val_scenes[f]));
      val_ens.pixel_maps.push_back(baselines::ensemble_uncertainty(outs).values);
      val_ens.errors.push_back(metrics::error_map(ensemble_preds(outs), val_scenes[f].labels));
      val_qipf.errors.push_back(val_errors[f]);
      val_soft.errors.push_back(val_errors[f]);
      val_mc.errors.push_back(val_errors[f]);
    }
    return 0;
  });

  // Test phase, timed per method.
  EvaluatedMaps test_qipf, test_soft, test_mc, test_ens;
  std::atomic<std::uint64_t> n_qipf{0}, n_soft{0}, n_mc{0}, n_ens{0};
  double s_qipf = 0.0, s_soft = 0.0, s_mc = 0.0, s_ens = 0.0;
  stage("test maps", [&] {
    for (std::size_t f = 0; f < test_scenes.size(); ++f) {
      const auto& scene = test_scenes[f];

      auto start = Clock::now();
      const auto ft = toy::forward(model, scene, {.counter = &n_qipf});
      test_qipf.pixel_maps.push_back(qipf_uncertainty_map(fields, ft, cfg.threads).values);
      s_qipf += seconds_since(start);
      const auto errors = metrics::error_map(ft.preds, scene.labels);
      test_qipf.errors.push_back(errors);

      start = Clock::now();
      const auto ft_soft = toy::forward(model, scene, {.counter = &n_soft});
      test_soft.pixel_maps.push_back(baselines::softmax_uncertainty(ft_soft).values);
      s_soft += seconds_since(start);
      test_soft.errors.push_back(errors);

      start = Clock::now();
      test_mc.pixel_maps.push_back(baselines::mc_dropout_uncertainty(
                                       model, scene, cfg.mc_passes, derive_seed(cfg.seed, SeedStream::McDropout, f), &n_mc)
                                       .values);
      s_mc += seconds_since(start);
      test_mc.errors.push_back(errors);

      start = Clock::now();
      std::vector<toy::FeatureTensor> outs;
      for (const auto& m : members) outs.push_back(toy::forward(m, scene, {.counter = &n_ens}));
      test_ens.pixel_maps.push_back(baselines::ensemble_uncertainty(outs).values);
      s_ens += seconds_since(start);
      test_ens.errors.push_back(metrics::error_map(ensemble_preds(outs), scene.labels));
    }
    return 0;
  });

  stage("metrics", [&] {
    auto add = [&](Method m, const EvaluatedMaps& v, const EvaluatedMaps& t, std::uint64_t passes, double secs) {
      auto r = evaluate_method(m, v, t, cfg.patch, t_grid);
      r.forward_passes = passes;
      r.seconds = secs;
      report.methods.push_back(std::move(r));
    };
    add(Method::Qipf, val_qipf, test_qipf, n_qipf.load(), s_qipf);
    add(Method::Softmax, val_soft, test_soft, n_soft.load(), s_soft);
    add(Method::McDropout, val_mc, test_mc, n_mc.load(), s_mc);
    add(Method::Ensemble, val_ens, test_ens, n_ens.load(), s_ens);
    return 0;
  });
  return report;
}

RunReport run_external(const ExperimentConfig& cfg, std::span<const toy::FeatureTensor> frames,
                       std::span<const Grid<int>> labels) {
  validate(cfg);
  const std::size_t need = cfg.train_frames + cfg.val_frames + cfg.test_frames;
  if (frames.size() < need || labels.size() != frames.size()) {
    throw Error(ErrorCode::ShapeMismatch, "need " + std::to_string(need) + " frames with labels, got " +
                                              std::to_string(frames.size()) + " frames and " +
                                              std::to_string(labels.size()) + " label maps");
  }
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (labels[f].rows() != frames[f].preds.rows() || labels[f].cols() != frames[f].preds.cols()) {
      throw Error(ErrorCode::ShapeMismatch, "label map " + std::to_string(f) + " does not match its features");
    }
  }
  RunReport report;
  report.config = cfg;
  report.seed = cfg.seed;
  report.simd_backend = std::string(simd::to_string(simd::best_backend()));
  report.concurrency = cfg.threads;
  const auto t_grid = metrics::default_t_grid(cfg.t_step);

  const auto train = frames.subspan(0, cfg.train_frames);
  const auto val = frames.subspan(cfg.train_frames, cfg.val_frames);
  const auto test = frames.subspan(cfg.train_frames + cfg.val_frames, cfg.test_frames);
  std::vector<Grid<bool>> val_errors, test_errors;
  for (std::size_t f = 0; f < val.size(); ++f) {
    val_errors.push_back(metrics::error_map(val[f].preds, labels[cfg.train_frames + f]));
  }
  for (std::size_t f = 0; f < test.size(); ++f) {
    test_errors.push_back(metrics::error_map(test[f].preds, labels[cfg.train_frames + cfg.val_frames + f]));
  }

  auto selection = stage("fit qipf", [&] { return select_and_fit(cfg, train, val, val_errors); });
  report.silverman_factor = selection.factor;
  report.silverman_scores = selection.scores;
  report.degenerate_locations = selection.fields.degenerate_count();

  EvaluatedMaps vq{{}, val_errors}, vs{{}, val_errors}, tq{{}, test_errors}, ts{{}, test_errors};
  for (const auto& ft : val) {
    vq.pixel_maps.push_back(qipf_uncertainty_map(selection.fields, ft, cfg.threads).values);
    vs.pixel_maps.push_back(baselines::softmax_uncertainty(ft).values);
  }
  auto start = Clock::now();
  for (const auto& ft : test) tq.pixel_maps.push_back(qipf_uncertainty_map(selection.fields, ft, cfg.threads).values);
  const double s_qipf = seconds_since(start);
  start = Clock::now();
  for (const auto& ft : test) ts.pixel_maps.push_back(baselines::softmax_uncertainty(ft).values);
  const double s_soft = seconds_since(start);

  auto q = evaluate_method(Method::Qipf, vq, tq, cfg.patch, t_grid);
  q.seconds = s_qipf;
  auto s = evaluate_method(Method::Softmax, vs, ts, cfg.patch, t_grid);
  s.seconds = s_soft;
  report.methods.push_back(std::move(q));
  report.methods.push_back(std::move(s));
  return report;
}

std::string report_json(const RunReport& report) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json config;
  std::istringstream lines(to_text(report.config));
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) config[line.substr(0, eq)] = line.substr(eq + 3);
  }
  j["config"] = config;
  j["seed"] = report.seed;
  j["silverman_factor"] = report.silverman_factor;
  j["silverman_validation"] = nlohmann::ordered_json::array();
  for (const auto& [factor, score] : report.silverman_scores) {
    j["silverman_validation"].push_back({{"factor", factor}, {"PAvPU_t0.5", score}});
  }
  j["degenerate_locations"] = report.degenerate_locations;
  j["classifier_train_accuracy"] = report.classifier_train_accuracy;
  j["simd_backend"] = report.simd_backend;
  j["concurrency"] = report.concurrency;
  j["methods"] = nlohmann::ordered_json::array();
  for (const auto& m : report.methods) {
    nlohmann::ordered_json mj;
    mj["method"] = std::string(baselines::to_string(m.method));
    mj["u_min"] = m.u_min;
    mj["u_max"] = m.u_max;
    mj["forward_passes"] = m.forward_passes;
    mj["average"] = scores_json(m.average);
    mj["sweep"] = nlohmann::ordered_json::array();
    for (const auto& row : m.sweep) {
      nlohmann::ordered_json rj;
      rj["t"] = row.t;
      rj["n_ac"] = row.counts.n_ac;
      rj["n_au"] = row.counts.n_au;
      rj["n_ic"] = row.counts.n_ic;
      rj["n_iu"] = row.counts.n_iu;
      const auto sj = scores_json(row.scores);
      for (const auto& [k, v] : sj.items()) rj[k] = v;
      mj["sweep"].push_back(rj);
    }
    j["methods"].push_back(mj);
  }
  return j.dump(2) + "\n";
}

std::string timings_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["concurrency"] = report.concurrency;
  j["simd_backend"] = report.simd_backend;
  for (const auto& m : report.methods) {
    j["methods"][std::string(baselines::to_string(m.method))] = {{"seconds", m.seconds},
                                                                  {"forward_passes", m.forward_passes}};
  }
  return j.dump(2) + "\n";
}

std::string metrics_csv(const RunReport& report) {
  std::string out = "method,t,PA,PU,PAvPU\n";
  for (const auto& m : report.methods) {
    for (const auto& row : m.sweep) {
      char t[32];
      std::snprintf(t, sizeof t, "%.4g", row.t);
      out += std::string(baselines::to_string(m.method)) + "," + t + "," + csv_cell(row.scores.pa) + "," +
             csv_cell(row.scores.pu) + "," + csv_cell(row.scores.pavpu) + "\n";
    }
  }
  return out;
}

void export_report(const RunReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
  auto write_text = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + p.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + p.string());
  };
  write_text(out_dir / "metrics.csv", metrics_csv(report));
  write_text(out_dir / "report.json", report_json(report));
  write_text(out_dir / "timings.json", timings_json(report));
  for (const auto& m : report.methods) {
    for (std::size_t f = 0; f < m.test_maps.size(); ++f) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_test%02zu.pgm", std::string(baselines::to_string(m.method)).c_str(), f);
      io::write_pgm(m.test_maps[f], out_dir / name);
    }
  }
  if (const auto* q = report.find(Method::Qipf)) {
    for (std::size_t f = 0; f < q->test_errors.size(); ++f) {
      Grid<double> err(q->test_errors[f].rows(), q->test_errors[f].cols());
      for (std::size_t i = 0; i < err.size(); ++i) err.data()[i] = q->test_errors[f].data()[i] ? 1.0 : 0.0;
      char name[64];
      std::snprintf(name, sizeof name, "error_test%02zu.pgm", f);
      io::write_pgm(err, out_dir / name);
    }
  }
}

double time_qipf_evaluation(std::size_t n, int m, std::size_t d, std::size_t points, std::uint64_t seed,
                            int repeats) {
  Rng rng(seed);
  std::vector<double> flat(n * d);
  for (double& v : flat) v = rng.normal();
  const kde::SampleSet samples(n, d, std::move(flat));
  const auto model = decomp::fit(samples, kde::silverman_bandwidth(samples), m);
  std::vector<double> pts(points * d);
  for (double& v : pts) v = 1.5 * rng.normal();

  double best = std::numeric_limits<double>::infinity();
  volatile double sink = 0.0;
  for (int rep = 0; rep < repeats; ++rep) {
    const auto start = Clock::now();
    double acc = 0.0;
    for (std::size_t p = 0; p < points; ++p) {
      const auto spectrum = decomp::moments(model, std::span<const double>(pts.data() + p * d, d));
      acc += decomp::uncertainty_index(spectrum);
    }
    best = std::min(best, seconds_since(start));
    sink = sink + acc;
  }
  return best;
}

BenchResult run_benchmark(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto train_scenes = make_scenes(cfg, SeedStream::TrainScenes, cfg.train_frames, false);
  const auto test_scenes = make_scenes(cfg, SeedStream::TestScenes, cfg.test_frames, cfg.ood_test);
  const auto model = toy::train(train_scenes, cfg.hyper, derive_seed(cfg.seed, SeedStream::ClassifierInit));
  std::vector<toy::FeatureTensor> train_ft;
  for (const auto& s : train_scenes) train_ft.push_back(toy::forward(model, s));
  const auto fields = fit_qipf_per_pixel(train_ft, cfg.qipf, cfg.qipf.silverman_factor,
                                         derive_seed(cfg.seed, SeedStream::Subsample), cfg.threads);

  BenchResult b;
  std::atomic<std::uint64_t> n_qipf{0}, n_mc{0};
  auto start = Clock::now();
  for (const auto& s : test_scenes) {
    const auto ft = toy::forward(model, s, {.counter = &n_qipf});
    (void)qipf_uncertainty_map(fields, ft, cfg.threads);
  }
  b.qipf_seconds = seconds_since(start);
  start = Clock::now();
  for (std::size_t f = 0; f < test_scenes.size(); ++f) {
    (void)baselines::mc_dropout_uncertainty(model, test_scenes[f], cfg.mc_passes,
                                            derive_seed(cfg.seed, SeedStream::McDropout, f), &n_mc);
  }
  b.mc_dropout_seconds = seconds_since(start);
  b.qipf_forward_passes = n_qipf.load();
  b.mc_forward_passes = n_mc.load();

  const std::size_t d = static_cast<std::size_t>(cfg.scene.classes);
  const std::size_t points = 4096;
  const double base = time_qipf_evaluation(cfg.qipf.n_max, cfg.qipf.modes, d, points, cfg.seed);
  b.n_doubling_ratio = time_qipf_evaluation(2 * cfg.qipf.n_max, cfg.qipf.modes, d, points, cfg.seed) / base;
  const int m2 = std::min(2 * cfg.qipf.modes, decomp::kMaxHermiteOrder);
  b.m_doubling_ratio = time_qipf_evaluation(cfg.qipf.n_max, m2, d, points, cfg.seed) / base;
  return b;
}

ExportedFeatures generate_features(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<toy::SceneSample> scenes = make_scenes(cfg, SeedStream::TrainScenes, cfg.train_frames, false);
  const auto model = toy::train(scenes, cfg.hyper, derive_seed(cfg.seed, SeedStream::ClassifierInit));
  for (auto& s : make_scenes(cfg, SeedStream::ValScenes, cfg.val_frames, cfg.ood_val)) scenes.push_back(std::move(s));
  for (auto& s : make_scenes(cfg, SeedStream::TestScenes, cfg.test_frames, cfg.ood_test)) scenes.push_back(std::move(s));
  ExportedFeatures out;
  for (const auto& s : scenes) {
    out.frames.push_back(toy::forward(model, s));
    out.labels.push_back(s.labels);
  }
  return out;
}

}  // namespace qipf::pipeline
