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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qipf/baselines.hpp"
#include "qipf/decomposition.hpp"
#include "qipf/error.hpp"
#include "qipf/hermite.hpp"
#include "qipf/io.hpp"
#include "qipf/kde.hpp"
#include "qipf/metrics.hpp"
#include "qipf/pipeline.hpp"
#include "qipf/rng.hpp"

using namespace qipf;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

kde::SampleSet normal_set(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<double> v(n * d);
  for (double& x : v) x = rng.normal();
  return kde::SampleSet(n, d, std::move(v));
}

Outcome derivative_oracle() {
  const auto t0 = Clock::now();
  Rng rng(20240601);
  long double worst = 0.0L;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng.below(8);
    const std::size_t n = 1 + rng.below(50);
    const auto s = normal_set(rng, n, d);
    const double sigma = rng.uniform(0.3, 2.0);
    std::vector<double> p(d);
    const auto anchor = s.row(rng.below(n));
    for (std::size_t j = 0; j < d; ++j) p[j] = anchor[j] + 0.5 * sigma * rng.normal();
    const auto f = kde::ipf_eval(s, kde::Bandwidth(sigma), p);
    const auto fd = oracle::field_fd(s.row_major(), d, sigma, p, 1e-5L * sigma);
    // Relative error, with an absolute floor for components that vanish.
    auto rel = [](long double a, long double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-3L); };
    for (std::size_t j = 0; j < d; ++j) worst = std::max(worst, rel(f.gradient[j], fd.gradient[j]));
    worst = std::max(worst, rel(f.laplacian, fd.laplacian));
  }
  const double secs = elapsed(t0);
  return {worst <= 1e-6L && secs < 10.0, fmt("max rel err %.2Le over 200 configs, %.2f s", worst, secs)};
}

Outcome hermite_identities() {
  Rng rng(12);
  long double worst = 0.0L;
  for (int p = 0; p < 20; ++p) {
    const double x = rng.uniform(-3.0, 3.0);
    for (int k = 0; k <= 12; ++k) {
      const auto c = oracle::hermite_coefficients(k);
      const auto c1 = oracle::differentiate(c);
      const auto c2 = oracle::differentiate(c1);
      const auto v = decomp::hermite_eval(k, x);
      auto rel = [](long double a, long double b) {
        return b == 0.0L ? std::abs(a) : std::abs(a - b) / std::abs(b);
      };
      worst = std::max({worst, rel(v.h, oracle::horner(c, x)), rel(v.first, oracle::horner(c1, x)),
                        rel(v.second, oracle::horner(c2, x))});
      // The derivative identities, on the recurrence values themselves.
      if (k >= 1) worst = std::max(worst, rel(v.first, 2.0L * k * decomp::hermite_eval(k - 1, x).h));
      if (k >= 2) worst = std::max(worst, rel(v.second, 4.0L * k * (k - 1) * decomp::hermite_eval(k - 2, x).h));
    }
  }
  return {worst <= 1e-9L, fmt("max rel err %.2Le, k <= 12 at 20 points", worst)};
}

Outcome lower_bound_contract() {
  Rng rng(31337);
  double most_negative = 0.0, worst_min = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.below(3);
    const std::size_t n = 2 + rng.below(99);
    const auto s = normal_set(rng, n, d);
    const int m = 1 + static_cast<int>(rng.below(12));
    const auto model = decomp::fit(s, kde::silverman_bandwidth(s), m);
    std::vector<double> lowest(static_cast<std::size_t>(m), INFINITY);
    for (std::size_t i = 0; i < n; ++i) {
      const auto raw = decomp::raw_moments(model, s.row(i));
      for (int k = 0; k < m; ++k) {
        most_negative = std::min(most_negative, raw[k]);
        lowest[k] = std::min(lowest[k], raw[k]);
      }
    }
    for (double v : lowest) worst_min = std::max(worst_min, std::abs(v));
  }
  return {most_negative >= -1e-9 && worst_min <= 1e-9,
          fmt("most negative moment %.2e, largest |per-mode minimum| %.2e, 100 fits", most_negative, worst_min)};
}

Outcome tail_alignment() {
  const auto t0 = Clock::now();
  int hits = 0;
  std::string indices;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(7, 0, seed));
    const auto s = normal_set(rng, 500, 1);
    const auto model = decomp::fit(s, kde::silverman_bandwidth(s), 12);
    auto index_at = [&](double z) {
      return decomp::uncertainty_index(decomp::moments(model, std::vector<double>{z}));
    };
    const int centre = index_at(0.0), left = index_at(-3.5), right = index_at(3.5);
    if (left > centre && right > centre) ++hits;
    indices += fmt(" %d/%d/%d", left, centre, right);
  }
  const double secs = elapsed(t0);
  return {hits >= 19 && secs < 30.0,
          fmt("%d/20 seeds aligned, %.2f s; index at -3.5/0/+3.5:%s", hits, secs, indices.c_str())};
}

Outcome metrics_oracle() {
  Rng rng(5);
  bool ok = true;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t n = rng.below(150);
    std::vector<bool> acc(n);
    std::vector<double> unc(n);
    Grid<bool> ag(1, n);
    Grid<double> ug(1, n);
    for (std::size_t i = 0; i < n; ++i) {
      acc[i] = rng.uniform() < 0.65;
      unc[i] = static_cast<double>(rng.below(11)) / 10.0;
      ag(0, i) = acc[i];
      ug(0, i) = unc[i];
    }
    const double u_th = static_cast<double>(rng.below(11)) / 10.0;
    const auto c = metrics::confusion(ag, ug, u_th);
    const auto o = oracle::recount(acc, unc, u_th);
    ok = ok && c.n_ac == o.ac && c.n_au == o.au && c.n_ic == o.ic && c.n_iu == o.iu;
    const auto s = metrics::scores(c);
    auto agree = [](const std::optional<double>& v, std::uint64_t num, std::uint64_t den) {
      if (den == 0) return !v.has_value();
      return v.has_value() && std::abs(*v - static_cast<double>(num) / static_cast<double>(den)) <= 1e-12;
    };
    ok = ok && agree(s.pa, o.ac, o.ac + o.ic) && agree(s.pu, o.iu, o.ic + o.iu) && agree(s.pavpu, o.ac + o.iu, n);
  }
  const auto ex = metrics::scores({3, 1, 1, 2});
  const bool example = ex.pa && ex.pu && ex.pavpu && std::abs(*ex.pa - 0.75) < 5e-5 &&
                       std::abs(*ex.pu - 0.6667) < 5e-5 && std::abs(*ex.pavpu - 0.7143) < 5e-5;
  return {ok && example, fmt("1000 instances %s; example PA=%.4f PU=%.4f PAvPU=%.4f", ok ? "match" : "MISMATCH",
                             ex.pa.value_or(NAN), ex.pu.value_or(NAN), ex.pavpu.value_or(NAN))};
}

Outcome kde_consistency() {
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto mae = [&](std::size_t n) {
      Rng rng(derive_seed(seed, 0, n));
      const auto s = normal_set(rng, n, 1);
      const auto sigma = kde::silverman_bandwidth(s);
      const double norm = 1.0 / (sigma.sigma() * std::sqrt(2.0 * 3.14159265358979323846));
      double err = 0.0;
      for (int i = 0; i <= 160; ++i) {
        const double x = -4.0 + 0.05 * i;
        err += std::abs(kde::ipf_eval(s, sigma, std::vector<double>{x}).value * norm - oracle::normal_pdf(x));
      }
      return err / 161.0;
    };
    if (mae(2000) < mae(100)) ++improved;
  }
  return {improved >= 45, fmt("MAE decreased in %d/50 seeds", improved)};
}

Outcome end_to_end() {
  const ExperimentConfig cfg;  // 32x32, 3 classes, 20/5/10 frames, OOD test regions
  const auto t0 = Clock::now();
  const auto a = pipeline::run_experiment(cfg);
  const double secs = elapsed(t0);
  const auto b = pipeline::run_experiment(cfg);
  const bool identical = pipeline::report_json(a) == pipeline::report_json(b);
  const double q = a.find(baselines::Method::Qipf)->average.pavpu.value_or(NAN);
  const double s = a.find(baselines::Method::Softmax)->average.pavpu.value_or(NAN);
  const bool ordered = q >= s - 0.02;

  auto alt = cfg;
  alt.qipf.granularity = Granularity::Class;
  alt.qipf.normalization = decomp::Normalization::Max;
  const auto c = pipeline::run_experiment(alt);
  std::printf("INFO  class fields with max normalization: QIPF PAvPU %.4f, softmax %.4f\n",
              c.find(baselines::Method::Qipf)->average.pavpu.value_or(NAN),
              c.find(baselines::Method::Softmax)->average.pavpu.value_or(NAN));

  return {secs < 300.0 && ordered && identical,
          fmt("%.1f s; mean PAvPU QIPF %.4f vs softmax %.4f; report %s", secs, q, s,
              identical ? "byte-identical" : "DIFFERS")};
}

Outcome single_shot() {
  const ExperimentConfig cfg;
  std::vector<toy::SceneSample> train;
  for (std::size_t i = 0; i < cfg.train_frames; ++i)
    train.push_back(toy::generate_scene(derive_seed(cfg.seed, SeedStream::TrainScenes, i), cfg.scene));
  const auto model = toy::train(train, cfg.hyper, derive_seed(cfg.seed, SeedStream::ClassifierInit, 0));
  auto scene_cfg = cfg.scene;
  scene_cfg.ood = true;
  const auto frame = toy::generate_scene(derive_seed(cfg.seed, SeedStream::TestScenes, 0), scene_cfg);

  std::atomic<std::uint64_t> q{0}, mc{0};
  (void)toy::forward(model, frame, {.counter = &q});
  (void)baselines::mc_dropout_uncertainty(model, frame, cfg.mc_passes, 1, &mc);

  const auto bench = pipeline::run_benchmark(cfg);
  const bool ok = q.load() == 1 && mc.load() == 100 && bench.qipf_seconds < bench.mc_dropout_seconds &&
                  bench.n_doubling_ratio < 2.5 && bench.m_doubling_ratio < 2.5;
  return {ok, fmt("passes %llu vs %llu; phase %.4f s vs %.4f s; ratio 2n %.2f, 2m %.2f",
                  static_cast<unsigned long long>(q.load()), static_cast<unsigned long long>(mc.load()),
                  bench.qipf_seconds, bench.mc_dropout_seconds, bench.n_doubling_ratio, bench.m_doubling_ratio)};
}

Outcome ften_round_trip() {
  Rng rng(99);
  bool same = true;
  for (int i = 0; i < 100; ++i) {
    io::Tensor t;
    std::size_t count = 1;
    const std::size_t rank = 1 + rng.below(4);
    for (std::size_t r = 0; r < rank; ++r) {
      t.dims.push_back(static_cast<std::uint32_t>(1 + rng.below(7)));
      count *= t.dims.back();
    }
    for (std::size_t k = 0; k < count; ++k) {
      double v = std::bit_cast<double>(rng.next_u64());
      t.data.push_back(std::isfinite(v) ? v : rng.normal());
    }
    const auto back = io::decode_ften(io::encode_ften(t));
    same = same && back.dims == t.dims &&
           std::memcmp(back.data.data(), t.data.data(), t.data.size() * sizeof(double)) == 0;
  }

  const auto good = io::encode_ften(io::Tensor{{2, 2}, {1, 2, 3, 4}});
  auto code_of = [](std::vector<std::uint8_t> bytes) {
    try {
      io::decode_ften(bytes);
    } catch (const Error& e) {
      return std::string(to_string(e.code()));
    }
    return std::string("none");
  };
  auto magic = good;
  magic[1] = 'X';
  auto claims_more = good;
  claims_more[12] = 9;
  auto deep = good;
  deep[8] = 9;
  const bool errors = code_of(magic) == "BadMagic" && code_of(claims_more) == "TruncatedFile" &&
                      code_of({good.begin(), good.begin() + 6}) == "TruncatedFile" &&
                      code_of(deep) == "DimensionOverflow";
  return {same && errors, fmt("100 tensors %s; corrupted headers %s", same ? "bit-identical" : "DIFFER",
                              errors ? "raise documented errors" : "WRONG errors")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"derivative oracle", derivative_oracle},
      {"hermite identities", hermite_identities},
      {"lower-bound contract", lower_bound_contract},
      {"tail alignment", tail_alignment},
      {"metrics oracle", metrics_oracle},
      {"KDE consistency", kde_consistency},
      {"end-to-end experiment", end_to_end},
      {"single-shot and complexity", single_shot},
      {"FTEN round trip", ften_round_trip},
  };
  int failed = 0;
  int idx = 0;
  for (const auto& [name, run] : criteria) {
    ++idx;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %d %s: %s\n", o.pass ? "PASS" : "FAIL", idx, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
