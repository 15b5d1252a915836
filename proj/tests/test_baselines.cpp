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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

#include "qipf/baselines.hpp"
#include "qipf/error.hpp"
#include "qipf/rng.hpp"

using namespace qipf;
using namespace qipf::baselines;
using toy::FeatureTensor;

namespace {

// One-pixel tensor with the given probabilities.
FeatureTensor probs_tensor(std::vector<double> p) {
  FeatureTensor ft;
  ft.probs = Image(1, 1, p.size());
  ft.features = Image(1, 1, p.size());
  ft.preds = Grid<int>(1, 1, 0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    ft.probs(0, 0, k) = p[k];
    ft.features(0, 0, k) = std::log(std::max(p[k], 1e-300));
  }
  ft.preds(0, 0) = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  return ft;
}

struct Fixture {
  std::vector<toy::SceneSample> train_scenes;
  toy::SceneSample test_scene;
  toy::PixelClassifier model;

  Fixture() {
    toy::SceneConfig cfg;
    for (std::uint64_t i = 0; i < 3; ++i) train_scenes.push_back(toy::generate_scene(derive_seed(1, 0, i), cfg));
    cfg.ood = true;
    test_scene = toy::generate_scene(derive_seed(1, 2, 0), cfg);
    toy::TrainHyper hyper;
    hyper.epochs = 4;
    model = toy::train(train_scenes, hyper, 21);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void check_unit_range(const UncertaintyMap& m) {
  for (double v : m.values.data()) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

}  // namespace

TEST_CASE("method names") {
  CHECK(to_string(Method::Qipf) == "qipf");
  CHECK(to_string(Method::Softmax) == "softmax");
  CHECK(to_string(Method::McDropout) == "mc_dropout");
  CHECK(to_string(Method::Ensemble) == "ensemble");
}

TEST_CASE("softmax uncertainty examples") {
  CHECK(softmax_uncertainty(probs_tensor({0.25, 0.25, 0.25, 0.25})).values(0, 0) == 0.75);
  CHECK(softmax_uncertainty(probs_tensor({0.0, 1.0, 0.0})).values(0, 0) == 0.0);
  CHECK(softmax_uncertainty(probs_tensor({0.5, 0.3, 0.2})).values(0, 0) == 0.5);
  CHECK(softmax_uncertainty(probs_tensor({0.5, 0.3, 0.2})).method == Method::Softmax);
}

TEST_CASE("mean entropy of a uniform softmax is one") {
  const std::vector<FeatureTensor> passes = {probs_tensor({1.0 / 3, 1.0 / 3, 1.0 / 3}),
                                             probs_tensor({1.0 / 3, 1.0 / 3, 1.0 / 3})};
  CHECK(mean_entropy_uncertainty(passes).values(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  // Disagreeing confident passes average to uniform too.
  const std::vector<FeatureTensor> split = {probs_tensor({1.0, 0.0}), probs_tensor({0.0, 1.0})};
  CHECK(mean_entropy_uncertainty(split).values(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mc dropout") {
  const auto& f = fixture();
  SUBCASE("needs two passes") {
    try {
      mc_dropout_uncertainty(f.model, f.test_scene, 1, 1);
      FAIL("expected InvalidPasses");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidPasses);
    }
  }
  SUBCASE("rate zero gives the deterministic entropy") {
    toy::PixelClassifier plain(toy::kPixelFeatureCount, f.model.hidden(), 3, 0.0, 0);
    plain.w1 = f.model.w1;
    plain.b1 = f.model.b1;
    plain.w2 = f.model.w2;
    plain.b2 = f.model.b2;
    const auto mc = mc_dropout_uncertainty(plain, f.test_scene, 5, 9);
    const std::vector<FeatureTensor> one = {toy::forward(plain, f.test_scene), toy::forward(plain, f.test_scene)};
    const auto expected = mean_entropy_uncertainty(one);
    for (std::size_t i = 0; i < mc.values.size(); ++i)
      CHECK(mc.values.data()[i] == doctest::Approx(expected.values.data()[i]).epsilon(1e-12));
  }
  SUBCASE("deterministic with counted passes") {
    std::atomic<std::uint64_t> counter{0};
    const auto a = mc_dropout_uncertainty(f.model, f.test_scene, 100, 4, &counter);
    CHECK(counter.load() == 100);
    const auto b = mc_dropout_uncertainty(f.model, f.test_scene, 100, 4);
    CHECK(a == b);
    CHECK(a.method == Method::McDropout);
    check_unit_range(a);
  }
  SUBCASE("converges as passes grow") {
    const auto a = mc_dropout_uncertainty(f.model, f.test_scene, 100, 4);
    const auto b = mc_dropout_uncertainty(f.model, f.test_scene, 200, 5);
    double mad = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) mad += std::abs(a.values.data()[i] - b.values.data()[i]);
    mad /= static_cast<double>(a.values.size());
    CHECK(mad < 0.05);
  }
}

TEST_CASE("ensemble examples") {
  const std::vector<FeatureTensor> split = {probs_tensor({1.0, 0.0}), probs_tensor({0.0, 1.0})};
  CHECK(ensemble_uncertainty(split).values(0, 0) == 1.0);
  const std::vector<FeatureTensor> same = {probs_tensor({0.6, 0.4}), probs_tensor({0.6, 0.4}),
                                           probs_tensor({0.6, 0.4})};
  CHECK(ensemble_uncertainty(same).values(0, 0) == 0.0);

  const std::vector<FeatureTensor> lonely = {probs_tensor({0.6, 0.4})};
  CHECK_THROWS_AS(ensemble_uncertainty(lonely), Error);
  const std::vector<FeatureTensor> mixed = {probs_tensor({0.6, 0.4}), probs_tensor({0.2, 0.3, 0.5})};
  try {
    ensemble_uncertainty(mixed);
    FAIL("expected HeterogeneousEnsemble");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HeterogeneousEnsemble);
  }
}

TEST_CASE("ensemble of trained members") {
  const auto& f = fixture();
  toy::TrainHyper hyper;
  hyper.epochs = 2;
  std::vector<toy::PixelClassifier> members;
  for (std::uint64_t k = 0; k < 8; ++k) members.push_back(toy::train(f.train_scenes, hyper, derive_seed(3, 5, k)));

  std::atomic<std::uint64_t> counter{0};
  const auto a = ensemble_uncertainty(members, f.test_scene, &counter);
  CHECK(counter.load() == 8);
  CHECK(a == ensemble_uncertainty(members, f.test_scene));
  CHECK(a.method == Method::Ensemble);
  check_unit_range(a);

  auto reversed = members;
  std::reverse(reversed.begin(), reversed.end());
  const auto b = ensemble_uncertainty(reversed, f.test_scene);
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(b.values.data()[i] == doctest::Approx(a.values.data()[i]).epsilon(1e-12));

  const std::vector<toy::PixelClassifier> identical(3, members[0]);
  const auto flat = ensemble_uncertainty(identical, f.test_scene);
  for (double v : flat.values.data()) CHECK(v == 0.0);

  std::vector<toy::PixelClassifier> odd = {members[0], toy::PixelClassifier(toy::kPixelFeatureCount, 5, 3, 0.1, 1)};
  CHECK_THROWS_AS(ensemble_uncertainty(odd, f.test_scene), Error);
}

TEST_CASE("softmax map on a trained model") {
  const auto& f = fixture();
  check_unit_range(softmax_uncertainty(toy::forward(f.model, f.test_scene)));
}
