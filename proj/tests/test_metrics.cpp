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

#include "advlens/metrics/ap.hpp"
#include "advlens/metrics/asr.hpp"
#include "advlens/metrics/distortion.hpp"
#include "advlens/metrics/report.hpp"
#include "advlens/metrics/timing.hpp"
#include "oracles.hpp"

namespace advlens {
namespace {

TEST(AveragePrecision, PerfectDetectorScoresOne) {
  GroundTruthSet gt{{{{10, 10, 6, 6}, 0}}, {{{20, 20, 8, 8}, 0}}};
  std::vector<std::vector<DetectedObject>> det{{{{10, 10, 6, 6}, 0, 0.9, {}}}, {{{20, 20, 8, 8}, 0, 0.8, {}}}};
  const auto r = evaluate_map(det, gt, 1);
  EXPECT_DOUBLE_EQ(r.map, 1.0);
}

TEST(AveragePrecision, NoDetectionsScoresZero) {
  GroundTruthSet gt{{{{10, 10, 6, 6}, 0}}};
  EXPECT_DOUBLE_EQ(evaluate_map({{}}, gt, 1).map, 0.0);
}

TEST(AveragePrecision, SingleHitAtHalfRecall) {
  // one top-ranked hit at recall 1/2 only covers the recall levels 0..0.5
  GroundTruthSet gt{{{{10, 10, 6, 6}, 0}, {{30, 30, 6, 6}, 0}}};
  std::vector<std::vector<DetectedObject>> det{{{{10, 10, 6, 6}, 0, 0.9, {}}}};
  const auto ap = average_precision(std::vector<RankedDetection>{{det[0][0], 0}}, gt, 0);
  EXPECT_NEAR(*ap, 6.0 / 11.0, 1e-12);
}

TEST(AveragePrecision, DuplicateDetectionIsFalsePositive) {
  GroundTruthSet gt{{{{10, 10, 6, 6}, 0}}};
  std::vector<RankedDetection> d{{{{10, 10, 6, 6}, 0, 0.9, {}}, 0}, {{{10, 10, 6, 6}, 0, 0.8, {}}, 0}};
  std::vector<PRCurvePoint> curve;
  average_precision(d, gt, 0, 0.5, Interpolation::ElevenPoint, &curve);
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_DOUBLE_EQ(curve[1].precision, 0.5);
  EXPECT_DOUBLE_EQ(curve[1].recall, 1.0);
}

TEST(AveragePrecision, ClassWithoutTruthIsExcludedFromMean) {
  GroundTruthSet gt{{{{10, 10, 6, 6}, 0}}};
  std::vector<std::vector<DetectedObject>> det{{{{10, 10, 6, 6}, 0, 0.9, {}}, {{30, 30, 6, 6}, 1, 0.9, {}}}};
  const auto r = evaluate_map(det, gt, 2);
  EXPECT_FALSE(r.per_class_ap[1].has_value());
  EXPECT_DOUBLE_EQ(r.map, 1.0);
}

TEST(AveragePrecision, MeanRequiresSomeDefinedClass) {
  const std::vector<std::optional<double>> none{std::nullopt, std::nullopt};
  EXPECT_THROW(mean_ap(none), ValidationError);
}

TEST(AveragePrecision, ElevenPointMatchesThresholdSweep) {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 100; ++t) {
    const auto in = oracle::random_ap_instance(rng, 3, 2, 10, 5);
    const auto r = evaluate_map(in.detections, in.truth, 2);
    for (int k = 0; k < 2; ++k) {
      const double ref = oracle::eleven_point_ap(in, k, 0.5);
      if (ref < 0) {
        EXPECT_FALSE(r.per_class_ap[k].has_value());
      } else {
        ASSERT_TRUE(r.per_class_ap[k].has_value());
        EXPECT_NEAR(*r.per_class_ap[k], ref, 1e-9);
      }
    }
  }
}

TEST(AveragePrecision, AllPointsStaysCloseToElevenPoint) {
  // both summarize the same envelope; all-points is the exact area, so the
  // two stay within one recall step of each other
  std::mt19937_64 rng(102);
  for (int t = 0; t < 50; ++t) {
    const auto in = oracle::random_ap_instance(rng, 2, 1, 10, 5);
    const double e = evaluate_map(in.detections, in.truth, 1, 0.5, Interpolation::ElevenPoint).map;
    const double a = evaluate_map(in.detections, in.truth, 1, 0.5, Interpolation::AllPoints).map;
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
    EXPECT_NEAR(a, e, 0.2);
  }
}

TEST(Asr, MatchesEnumeration) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto in = oracle::random_asr_instance(rng, 3, 3);
    const auto c = oracle::enumerate_asr(in, 0.5);
    EXPECT_EQ(asr_vanishing(in.benign, in.adversarial, 0.5), static_cast<double>(c.vanished) / c.total);
    EXPECT_EQ(asr_fabrication(in.benign, in.adversarial), static_cast<double>(c.fabricated_images) / c.images);
    EXPECT_EQ(asr_mislabeling(in.benign, in.adversarial, in.targets, 0.5), static_cast<double>(c.relabeled) / c.total);
    EXPECT_EQ(misdetection_rate(in.benign, in.adversarial, 0.5), static_cast<double>(c.misdetected) / c.total);
  }
}

TEST(Asr, MisdetectionBoundsMislabeling) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 200; ++t) {
    const auto in = oracle::random_asr_instance(rng, 4, 3);
    EXPECT_GE(misdetection_rate(in.benign, in.adversarial), asr_mislabeling(in.benign, in.adversarial, in.targets));
  }
}

TEST(Asr, EdgeCases) {
  const DetectionsPerImage ben{{{{20, 20, 8, 8}, 0, 0.9, {}}}};
  const DetectionsPerImage none{{}};
  EXPECT_DOUBLE_EQ(asr_vanishing(ben, none), 1.0);
  EXPECT_DOUBLE_EQ(asr_vanishing(ben, ben), 0.0);
  EXPECT_DOUBLE_EQ(asr_fabrication(ben, ben), 0.0);
  const std::vector<int> map{1, 0};
  const DetectionsPerImage relabeled{{{{20, 20, 8, 8}, 1, 0.9, {}}}};
  EXPECT_DOUBLE_EQ(asr_mislabeling(ben, relabeled, std::span<const int>(map)), 1.0);
  EXPECT_THROW(asr_vanishing(none, none), ValidationError);
  EXPECT_THROW(asr_vanishing({}, {}), ValidationError);
  EXPECT_THROW(asr_fabrication(ben, {}), ValidationError);
}

TEST(Distortion, SsimMatchesDirectFormula) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const Image a = oracle::random_image(rng, 16, 12);
    Image b = a;
    std::normal_distribution<double> n(0.0, 0.05 * (t + 1));
    for (double& v : b.pixels.v) v = std::clamp(v + n(rng), 0.0, 1.0);
    EXPECT_NEAR(global_ssim(a, b), oracle::ssim(a, b), 1e-6);
  }
}

TEST(Distortion, IdenticalImages) {
  std::mt19937_64 rng(32);
  const Image a = oracle::random_image(rng, 8, 8);
  const auto d = distortion(a, a);
  EXPECT_DOUBLE_EQ(d.ssim, 1.0);
  EXPECT_EQ(d.linf, 0.0);
  EXPECT_EQ(d.l2_per_pixel, 0.0);
  EXPECT_EQ(d.l0_fraction, 0.0);
}

TEST(Distortion, HalfPixelsChanged) {
  Image a(4, 4, 0.5), b(4, 4, 0.5);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 4; ++x) b.at(1, y, x) = 0.6;
  const auto d = distortion(a, b);
  EXPECT_EQ(d.l0_fraction, 0.5);
  EXPECT_NEAR(d.linf, 0.1, 1e-12);
  EXPECT_NEAR(d.l2_per_pixel, std::sqrt(8 * 0.01) / 16.0, 1e-12);
}

TEST(Distortion, SubQuantumChangeIsNotCounted) {
  Image a(2, 2, 0.5), b(2, 2, 0.5 + 0.4 / 255.0);
  EXPECT_EQ(distortion(a, b).l0_fraction, 0.0);
  EXPECT_GT(distortion(a, b).linf, 0.0);
}

TEST(Distortion, ShapeMismatch) {
  EXPECT_THROW(distortion(Image(4, 4), Image(4, 5)), ShapeMismatchError);
}

TEST(Timing, MedianAndTotals) {
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  const std::vector<TimingRecord> r{make_timing(1, 10), make_timing(3, 30), make_timing(2, 20)};
  const auto m = median_timing(r);
  EXPECT_DOUBLE_EQ(m.detection_time_s, 2.0);
  EXPECT_DOUBLE_EQ(m.attack_time_s, 20.0);
  EXPECT_DOUBLE_EQ(m.total_time_s, 22.0);
  const auto [v, s] = timing_wrap([] { return 42; });
  EXPECT_EQ(v, 42);
  EXPECT_GE(s, 0.0);
}

TEST(Timing, ObjectCountFallsWithThreshold) {
  std::vector<std::vector<DetectionCandidate>> raw(1);
  for (int i = 0; i < 5; ++i) raw[0].push_back({{10.0 + 12 * i, 10, 6, 6}, 0.2 * i + 0.1, {1.0}});
  const std::vector<double> th{0.0, 0.35, 0.75};
  const auto n = objects_vs_threshold(raw, th);
  EXPECT_EQ(n, (std::vector<double>{5, 3, 1}));
}

EvaluationReport sample_report() {
  EvaluationReport r;
  r.attack = "tog-vanishing";
  r.model = "m";
  r.class_names = {"circle", "square"};
  r.benign_per_class_ap = {0.8, 0.6};
  r.per_class_ap = {0.1, std::nullopt};
  r.benign_map = 0.7;
  r.map_value = 0.1;
  r.asr = 0.95;
  r.asr_kind = "vanishing";
  r.distortion = {0.031, 0.001, 0.4, 0.9};
  r.timing = make_timing(0.01, 0.2);
  r.images = 10;
  return r;
}

TEST(Report, JsonValidatesAndRoundTrips) {
  const auto r = sample_report();
  const auto j = to_json(r);
  EXPECT_TRUE(report_schema_errors(j).empty());
  const auto back = report_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_FALSE(to_json(r, false).contains("timing"));
}

TEST(Report, SchemaRejectsBrokenReports) {
  auto j = to_json(sample_report());
  j["map"] = 0.5;
  EXPECT_FALSE(report_schema_errors(j).empty());
  j = to_json(sample_report());
  j.erase("attack");
  EXPECT_FALSE(report_schema_errors(j).empty());
  j = to_json(sample_report());
  j["asr"] = 1.5;
  EXPECT_FALSE(report_schema_errors(j).empty());
  EXPECT_THROW(report_from_json(nlohmann::json::array()), ValidationError);
}

TEST(Report, CsvHasClassAndSummaryRows) {
  const std::string csv = to_csv(sample_report());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find("summary,tog-vanishing,m"), std::string::npos);
}

}  // namespace
}  // namespace advlens
