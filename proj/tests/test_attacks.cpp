// Copyright 2026 The advlens Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>

#include <random>

#include "advlens/attacks/registry.hpp"
#include "advlens/attacks/uea.hpp"
#include "advlens/attacks/universal.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace advlens {
namespace {

double linf(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.pixels.v.size(); ++i) m = std::max(m, std::abs(a.pixels.v[i] - b.pixels.v[i]));
  return m;
}

TEST(ProjectAndClip, WorkedExamples) {
  Image adv(1, 1, 0.7), ref(1, 1, 0.5);
  EXPECT_NEAR(project_and_clip(adv, ref, 0.031).pixels.v[0], 0.531, 1e-12);
  adv = Image(1, 1, 0.2);
  EXPECT_NEAR(project_and_clip(adv, ref, 0.031).pixels.v[0], 0.469, 1e-12);
  adv = Image(1, 1, 1.2);
  ref = Image(1, 1, 0.99);
  EXPECT_EQ(project_and_clip(adv, ref, 0.031).pixels.v[0], 1.0);
  EXPECT_THROW(project_and_clip(adv, ref, -0.1), ValidationError);
  EXPECT_THROW(project_and_clip(Image(2, 2), Image(2, 3), 0.1), ShapeMismatchError);
}

TEST(ProjectAndClip, IdentityAndIdempotence) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.2);
  for (int t = 0; t < 1000; ++t) {
    const Image ref = oracle::random_image(rng, 3, 3);
    EXPECT_EQ(project_and_clip(ref, ref, 0.031).pixels, ref.pixels);
    Image adv = ref;
    for (double& v : adv.pixels.v) v += n(rng);
    const Image once = project_and_clip(adv, ref, 0.031);
    EXPECT_EQ(project_and_clip(once, ref, 0.031).pixels, once.pixels);
    EXPECT_LE(linf(once, ref), 0.031 + 1e-15);
  }
}

TEST(Tog, NoIterationsOrZeroBudgetLeavesInputUnchanged) {
  const auto m = testing::fresh(Family::OnePhase);
  const auto x = generate_shapes_dataset(5, 1, {64, 64}, 3).images[0];
  AttackConfig cfg;
  cfg.iterations = 0;
  EXPECT_EQ(tog_fabrication(*m, x, cfg).adversarial.pixels, x.pixels);
  cfg.iterations = 5;
  cfg.eps = 0.0;
  EXPECT_EQ(tog_fabrication(*m, x, cfg).adversarial.pixels, x.pixels);
}

TEST(Tog, OutputStaysInBallAndIsDeterministic) {
  const auto& m = testing::one_phase();
  const auto& ts = testing::test_set();
  for (const char* name : {"tog-untargeted", "tog-vanishing", "tog-fabrication", "tog-mislabeling-ml"}) {
    for (std::size_t i = 0; i < 3; ++i) {
      const auto a = run_attack(name, m, ts.images[i], default_config_for(name));
      const auto b = run_attack(name, m, ts.images[i], default_config_for(name));
      EXPECT_EQ(a.adversarial.pixels, b.adversarial.pixels) << name;
      EXPECT_LE(linf(a.adversarial, ts.images[i]), 0.031 + 1e-12) << name;
      for (double v : a.adversarial.pixels.v) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
      EXPECT_EQ(a.adversarial.provenance, Provenance::Adversarial);
    }
  }
}

TEST(Tog, EmptyAnchorSkipsVanishingAndMislabeling) {
  // untrained head sits at objectness sigmoid(-3), below every anchor threshold
  const auto m = testing::fresh(Family::OnePhase);
  const Image x(64, 64, 0.5);
  for (const char* name : {"tog-vanishing", "tog-mislabeling-ml", "tog-mislabeling-ll"}) {
    const auto r = run_attack(name, *m, x, default_config_for(name));
    EXPECT_TRUE(r.empty_anchor) << name;
    EXPECT_EQ(r.iterations_used, 0) << name;
    EXPECT_EQ(r.adversarial.pixels, x.pixels) << name;
  }
}

TEST(Tog, VanishingObjectiveMostlyDecreases) {
  const auto& m = testing::one_phase();
  const auto& ts = testing::test_set();
  int steps = 0, down = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    const auto r = tog_vanishing(m, ts.images[i]);
    for (std::size_t t = 1; t < r.trace.size(); ++t) {
      ++steps;
      down += r.trace[t] <= r.trace[t - 1];
    }
  }
  ASSERT_GT(steps, 0);
  EXPECT_GE(down, steps * 8 / 10);
}

TEST(Tog, RejectsL2Norm) {
  const auto m = testing::fresh(Family::OnePhase);
  AttackConfig cfg;
  cfg.norm = AttackNorm::L2;
  EXPECT_THROW(tog_vanishing(*m, Image(64, 64, 0.5), cfg), ValidationError);
}

TEST(Tog, BadTargetMapIsRejected) {
  const auto m = testing::fresh(Family::OnePhase);
  AttackConfig cfg;
  cfg.target_map = std::vector<int>{0, 2, 1};
  EXPECT_THROW(run_attack("tog-mislabeling-ml", *m, Image(64, 64), cfg), ValidationError);
  cfg.target_map = std::vector<int>{1, 2};
  EXPECT_THROW(run_attack("tog-mislabeling-ml", *m, Image(64, 64), cfg), ValidationError);
}

TEST(TargetClass, MostAndLeastLikely) {
  const DetectedObject d{{10, 10, 4, 4}, 0, 0.7, {0.7, 0.2, 0.1}};
  EXPECT_EQ(pick_target_class(d, 3, TargetMode::MostLikely, std::nullopt), 1);
  EXPECT_EQ(pick_target_class(d, 3, TargetMode::LeastLikely, std::nullopt), 2);
  EXPECT_EQ(pick_target_class(d, 3, TargetMode::ClassMap, std::vector<int>{2, 0, 1}), 2);
  const DetectedObject bare{{10, 10, 4, 4}, 0, 0.7, {}};
  EXPECT_THROW(pick_target_class(bare, 3, TargetMode::MostLikely, std::nullopt), ValidationError);
}

TEST(Tog, MislabelingTargetsDifferFromBenignClass) {
  const auto& m = testing::one_phase();
  const auto& ts = testing::test_set();
  for (std::size_t i = 0; i < 4; ++i) {
    const auto r = tog_mislabeling(m, ts.images[i]);
    ASSERT_EQ(r.target_labels.size(), r.anchor_detections.size());
    for (std::size_t k = 0; k < r.target_labels.size(); ++k)
      EXPECT_NE(r.target_labels[k], r.anchor_detections[k].class_id);
  }
}

TEST(Universal, ZeroEpochsGiveZeroDelta) {
  const auto m = testing::fresh(Family::OnePhase);
  const auto ds = generate_shapes_dataset(3, 4, {64, 64}, 3);
  const auto up = tog_universal_train(*m, ds, AttackConfig{}, 0, TogVariant::Vanishing);
  for (double v : up.delta.v) ASSERT_EQ(v, 0.0);
  EXPECT_EQ(apply_universal(ds.images[0], up).pixels, ds.images[0].pixels);
}

TEST(Universal, DeltaStaysWithinBudget) {
  const auto m = testing::fresh(Family::OnePhase);
  const auto ds = generate_shapes_dataset(3, 8, {64, 64}, 3);
  AttackConfig cfg;
  cfg.universal_batch = 4;
  for (auto mode : {TogVariant::Vanishing, TogVariant::Fabrication}) {
    const auto up = tog_universal_train(*m, ds, cfg, 30, mode);
    double mx = 0.0;
    for (double v : up.delta.v) mx = std::max(mx, std::abs(v));
    EXPECT_LE(mx, cfg.eps + 1e-15);
    EXPECT_GT(mx, 0.0);
    for (double v : apply_universal(ds.images[1], up).pixels.v) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
  }
}

TEST(Universal, OtherModesAreNotApplicable) {
  const auto m = testing::fresh(Family::OnePhase);
  const auto ds = generate_shapes_dataset(3, 2, {64, 64}, 3);
  EXPECT_THROW(tog_universal_train(*m, ds, AttackConfig{}, 1, TogVariant::Mislabeling), ApplicabilityError);
  EXPECT_THROW(tog_universal_train(*m, ds, AttackConfig{}, 1, TogVariant::Untargeted), ApplicabilityError);
}

TEST(TwoPhaseAttacks, NotApplicableToOnePhase) {
  const auto m = testing::fresh(Family::OnePhase);
  EXPECT_THROW(dag_attack(*m, Image(64, 64, 0.5)), ApplicabilityError);
  EXPECT_THROW(rap_attack(*m, Image(64, 64, 0.5)), ApplicabilityError);
  EXPECT_THROW(run_attack("dag", *m, Image(64, 64, 0.5), dag_defaults()), ApplicabilityError);
}

TEST(TwoPhaseAttacks, DagStopsWhenNothingIsCorrectlyClassified) {
  const auto m = testing::fresh(Family::TwoPhase);
  const Image x(64, 64, 0.5);
  const auto r = dag_attack(*m, x);
  EXPECT_EQ(r.iterations_used, 0);
  EXPECT_EQ(r.adversarial.pixels, x.pixels);
}

TEST(TwoPhaseAttacks, IterationBudgetIsRespectedAndRunsRepeat) {
  const auto& m = testing::two_phase();
  const auto& x = testing::test_set().images[0];
  AttackConfig dag = dag_defaults(), rap = rap_defaults();
  dag.iterations = rap.iterations = 5;
  const auto a = dag_attack(m, x, dag), b = dag_attack(m, x, dag);
  EXPECT_LE(a.iterations_used, 5);
  EXPECT_EQ(a.adversarial.pixels, b.adversarial.pixels);
  const auto c = rap_attack(m, x, rap);
  EXPECT_LE(c.iterations_used, 5);
  for (double v : c.adversarial.pixels.v) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
}

TEST(Uea, TwoByTwoFeatureLoss) {
  Tensor f(1, 2, 2), r(1, 2, 2), a(1, 2, 2);
  f.v = {1.0, 2.0, 3.0, 4.0};
  r.v = {0.0, 0.0, 1.0, 1.0};
  a.v = {1.0, 0.0, 1.0, 1.0};
  const std::vector<Tensor> fs{f}, rs{r}, as{a};
  // weighted differences 1, 0, 2, 3
  EXPECT_NEAR(attention_feature_loss(fs, rs, as), std::sqrt(14.0), 1e-12);
  EXPECT_EQ(attention_feature_loss(fs, fs, as), 0.0);
  const std::vector<Tensor> zero{Tensor(1, 2, 2)};
  EXPECT_EQ(attention_feature_loss(fs, rs, zero), 0.0);
  const std::vector<Tensor> wrong{Tensor(1, 3, 2)};
  EXPECT_THROW(attention_feature_loss(fs, rs, wrong), ShapeMismatchError);
  EXPECT_THROW(attention_feature_loss(fs, std::vector<Tensor>{}, as), ShapeMismatchError);
}

TEST(Uea, AttentionMapsFollowFeatureGrids) {
  const auto& m = testing::two_phase();
  const auto& x = testing::test_set().images[0];
  const auto maps = uea_attention_maps(m, x);
  const auto feats = m.backbone_features(x);
  ASSERT_EQ(maps.size(), feats.size());
  for (std::size_t i = 0; i < maps.size(); ++i) {
    EXPECT_EQ(maps[i].h, feats[i].h);
    for (double v : maps[i].v) EXPECT_TRUE(v == 0.0 || v == 1.0);
  }
  EXPECT_EQ(uea_feature_loss(m, x, feats, maps), 0.0);
}

TEST(Registry, UnknownNameListsValidAttacks) {
  try {
    check_attack_name("fgsm");
    FAIL();
  } catch (const ValidationError& e) {
    for (const auto& n : attack_names()) EXPECT_NE(std::string(e.what()).find(n), std::string::npos);
  }
  EXPECT_EQ(default_config_for("tog-mislabeling-ll").target_mode, TargetMode::LeastLikely);
  EXPECT_EQ(default_config_for("dag").iterations, 40);
}

}  // namespace
}  // namespace advlens
