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
// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance <advlens-cli> <default-config> [criterion ...]

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "advlens/attacks/registry.hpp"
#include "advlens/io/binary.hpp"
#include "advlens/metrics/asr.hpp"
#include "advlens/metrics/distortion.hpp"
#include "advlens/metrics/evaluate.hpp"
#include "advlens/transfer/matrix.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace {

using namespace advlens;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double linf(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.pixels.v.size(); ++i) m = std::max(m, std::abs(a.pixels.v[i] - b.pixels.v[i]));
  return m;
}

const EvalSettings kEval{};

double map_of(const DetectorModel& m, const std::vector<Image>& xs) {
  return evaluate_detections(detect_all(m, xs, kEval), testing::test_set().annotations, testing::kClasses, kEval).map;
}

std::vector<Image> attack_all(const std::string& name, const DetectorModel& m, const AttackConfig& cfg) {
  return generate_adversarial(name, m, testing::test_set().images, cfg, 1);
}

// 1: AP and ASR/MR against brute-force oracles.
Outcome metric_oracles() {
  std::mt19937_64 rng(2026);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto in = oracle::random_ap_instance(rng, 3, 2, 10, 5);
    const auto r = evaluate_map(in.detections, in.truth, 2);
    for (int k = 0; k < 2; ++k) {
      const double ref = oracle::eleven_point_ap(in, k, 0.5);
      if ((ref < 0) != !r.per_class_ap[k].has_value()) return {false, fmt("AP definedness differs on instance %d", t)};
      if (ref >= 0) worst = std::max(worst, std::abs(*r.per_class_ap[k] - ref));
    }
  }
  int mismatches = 0;
  for (int t = 0; t < 50; ++t) {
    const auto in = oracle::random_asr_instance(rng, 3, 3);
    const auto c = oracle::enumerate_asr(in, 0.5);
    mismatches += asr_vanishing(in.benign, in.adversarial) != static_cast<double>(c.vanished) / c.total;
    mismatches += asr_fabrication(in.benign, in.adversarial) != static_cast<double>(c.fabricated_images) / c.images;
    mismatches += asr_mislabeling(in.benign, in.adversarial, in.targets) != static_cast<double>(c.relabeled) / c.total;
    mismatches += misdetection_rate(in.benign, in.adversarial) != static_cast<double>(c.misdetected) / c.total;
  }
  return {worst <= 1e-9 && mismatches == 0, fmt("max AP error %.2e over 100 instances, %d ASR/MR mismatches in 50", worst, mismatches)};
}

// 2: analytic input gradients against central differences.
Outcome gradient_check() {
  constexpr double kStep = 1e-4, kFloor = 1e-8;
  double worst = 0.0;
  int checked = 0;
  std::mt19937_64 rng(77);
  for (int s = 0; s < 10; ++s) {
    const Family fam = s % 2 ? Family::TwoPhase : Family::OnePhase;
    const auto m = testing::fresh(fam, 1000 + s, 64, s % 4 < 2 ? "b3" : "b4");
    const auto ds = generate_shapes_dataset(500 + s, 1, {64, 64}, 3);
    Image x = ds.images[0];
    const auto& t = ds.annotations[0];
    std::uniform_int_distribution<std::size_t> pick(0, x.pixels.v.size() - 1);
    for (unsigned which : {unsigned{kLossObj}, unsigned{kLossBBox}, unsigned{kLossCls}}) {
      const Tensor g = m->input_gradient(x, t, which);
      auto part = [&](const Image& im) {
        const LossBundle lb = m->loss_components(im, t);
        return which == kLossObj ? lb.obj : which == kLossBBox ? lb.bbox : lb.cls;
      };
      for (int k = 0; k < 20; ++k) {
        const std::size_t i = pick(rng);
        const double v = x.pixels.v[i];
        x.pixels.v[i] = v + kStep;
        const double up = part(x);
        x.pixels.v[i] = v - kStep;
        const double down = part(x);
        x.pixels.v[i] = v;
        const double fd = (up - down) / (2 * kStep);
        const double err = std::abs(fd - g.v[i]) / std::max({std::abs(fd), std::abs(g.v[i]), kFloor});
        worst = std::max(worst, err);
        ++checked;
      }
    }
  }
  return {worst < 1e-3, fmt("max relative error %.2e over %d checks (h=1e-4)", worst, checked)};
}

// 3: every TOG output inside the eps-ball and [0,1]; projection idempotent.
Outcome ball_invariants() {
  int outputs = 0, violations = 0;
  const auto& ts = testing::test_set();
  for (const DetectorModel* m : {&testing::one_phase(), &testing::two_phase()})
    for (const char* name : {"tog-untargeted", "tog-vanishing", "tog-fabrication", "tog-mislabeling-ml", "tog-mislabeling-ll"})
      for (std::size_t i = 0; i < 20; ++i) {
        const AttackConfig cfg = default_config_for(name);
        const Image a = run_attack(name, *m, ts.images[i], cfg).adversarial;
        ++outputs;
        bool ok = linf(a, ts.images[i]) <= cfg.eps + 1e-9;
        for (double v : a.pixels.v) ok = ok && v >= 0.0 && v <= 1.0;
        violations += !ok;
      }
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.3);
  std::uniform_real_distribution<double> e(0.0, 0.1);
  int not_idem = 0;
  for (int t = 0; t < 1000; ++t) {
    const Image ref = oracle::random_image(rng, 4, 4);
    Image adv = ref;
    for (double& v : adv.pixels.v) v += n(rng);
    const double eps = e(rng);
    const Image once = project_and_clip(adv, ref, eps);
    not_idem += !(project_and_clip(once, ref, eps).pixels == once.pixels);
  }
  return {violations == 0 && not_idem == 0,
          fmt("%d/%d TOG outputs violate the ball or range, %d/1000 projections not idempotent", violations, outputs,
              not_idem)};
}

// 4: TOG untargeted and vanishing collapse the one-phase mAP.
Outcome map_collapse() {
  const auto& m = testing::one_phase();
  const double benign = map_of(m, testing::test_set().images);
  const double untargeted = map_of(m, attack_all("tog-untargeted", m, tog_defaults()));
  const double vanishing = map_of(m, attack_all("tog-vanishing", m, tog_defaults()));
  const bool pass = benign >= 0.70 && untargeted <= 0.10 * benign && vanishing <= 0.10 * benign;
  return {pass, fmt("benign %.4f, untargeted %.4f (%.1f%%), vanishing %.4f (%.1f%%); limit 10%%", benign, untargeted,
                    100 * untargeted / benign, vanishing, 100 * vanishing / benign)};
}

// 5: attack-specific success rates on the one-phase detector.
Outcome targeted_specificity() {
  const auto& m = testing::one_phase();
  const auto& ts = testing::test_set();
  const auto ben = detect_all(m, ts.images, kEval);
  const auto run = [&](const std::string& name) { return detect_all(m, attack_all(name, m, default_config_for(name)), kEval); };
  auto count = [](const DetectionsPerImage& d) {
    std::size_t n = 0;
    for (const auto& v : d) n += v.size();
    return static_cast<double>(n) / static_cast<double>(d.size());
  };
  const double van = asr_vanishing(ben, run("tog-vanishing"), kEval.t_iou);
  const auto fab_d = run("tog-fabrication");
  const double fab = asr_fabrication(ben, fab_d);
  const double ratio = count(fab_d) / count(ben);
  const auto ml_d = run("tog-mislabeling-ml");
  std::vector<std::vector<int>> targets(ben.size());
  for (std::size_t i = 0; i < ben.size(); ++i)
    for (const auto& b : ben[i]) targets[i].push_back(pick_target_class(b, testing::kClasses, TargetMode::MostLikely, std::nullopt));
  const double ml = asr_mislabeling(ben, ml_d, targets, kEval.t_iou);
  const double mr = misdetection_rate(ben, ml_d, kEval.t_iou);
  const bool pass = van >= 0.9 && fab >= 0.9 && ratio >= 2.0 && ml >= 0.5 && mr >= ml;
  return {pass, fmt("vanishing ASR %.3f, fabrication ASR %.3f with %.2fx objects, ML ASR %.3f, MR %.3f", van, fab, ratio,
                    ml, mr)};
}

// 6: DAG and RAP on the two-phase detector; both refuse the one-phase one.
Outcome two_phase_attacks() {
  const auto& m = testing::two_phase();
  const double benign = map_of(m, testing::test_set().images);
  const AttackConfig dag = dag_defaults(), rap = rap_defaults();
  const double dag_map = map_of(m, attack_all("dag", m, dag));
  const double rap_map = map_of(m, attack_all("rap", m, rap));
  bool refused = true;
  for (const char* name : {"dag", "rap"}) {
    try {
      run_attack(name, testing::one_phase(), testing::test_set().images[0], default_config_for(name));
      refused = false;
    } catch (const ApplicabilityError&) {
    }
  }
  const bool pass = dag.iterations <= 40 && rap.iterations <= 40 && dag.iou_nms_attack == 0.9 &&
                    dag_map <= 0.5 * benign && rap_map <= 0.5 * benign && refused;
  return {pass, fmt("benign %.4f, DAG %.4f (-%.1f%%), RAP %.4f (-%.1f%%), one-phase refused: %s", benign, dag_map,
                    100 * (1 - dag_map / benign), rap_map, 100 * (1 - rap_map / benign), refused ? "yes" : "no")};
}

bool diagonal_is_row_minimum(const std::vector<TransferCell>& cells, bool by_resolution, std::string& where) {
  bool ok = true;
  for (const auto& d : cells) {
    const bool diag = by_resolution ? d.source_resolution == d.target_resolution : d.source_model_id == d.target_model_id;
    if (!diag) continue;
    for (const auto& c : cells) {
      const bool same_row = c.source_model_id == d.source_model_id && c.source_resolution == d.source_resolution;
      if (same_row && c.error.empty() && c.adversarial_map < d.adversarial_map) {
        ok = false;
        where += " " + d.source_model_id + "@" + std::to_string(d.source_resolution);
      }
    }
  }
  return ok;
}

// 7: transfer matrices over two families x two backbones and four resolutions.
Outcome transfer_structure() {
  std::vector<NamedModel> models;
  for (auto fam : {Family::OnePhase, Family::TwoPhase})
    for (const char* bb : {"b3", "b4"})
      models.push_back({std::string(to_string(fam)) + "-" + bb, &testing::trained(fam, bb)});
  const auto& ts = testing::test_set();
  const AttackConfig cfg = tog_defaults();
  const auto cm = cross_model_matrix("tog-untargeted", models, models, ts, cfg, kEval);
  std::string where;
  const bool model_diag = diagonal_is_row_minimum(cm, false, where);
  const auto cr = cross_resolution_matrix("tog-untargeted", testing::one_phase(), "one-phase-b3", ts, {48, 64, 80, 96},
                                          cfg, kEval);
  const bool res_diag = diagonal_is_row_minimum(cr, true, where);
  const auto dir = resize_direction_means(cr);
  const bool pass = model_diag && res_diag && dir.upsizing <= dir.downsizing;
  std::string detail = fmt("model diagonal %s, resolution diagonal %s, upsizing mean %.2f vs downsizing %.2f",
                           model_diag ? "ok" : "broken", res_diag ? "ok" : "broken", dir.upsizing, dir.downsizing);
  if (!where.empty()) detail += "; rows:" + where;
  return {pass, detail};
}

// 8: SSIM against a direct evaluation, identity, and the half-pixels case.
Outcome distortion_reporting() {
  std::mt19937_64 rng(8);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Image a = oracle::random_image(rng, 24, 24);
    Image b = a;
    std::normal_distribution<double> n(0.0, 0.02 * (t + 1));
    for (double& v : b.pixels.v) v = std::clamp(v + n(rng), 0.0, 1.0);
    worst = std::max(worst, std::abs(global_ssim(a, b) - oracle::ssim(a, b)));
  }
  const Image x = oracle::random_image(rng, 16, 16);
  const double self = global_ssim(x, x);
  Image half = x;
  for (int y = 0; y < 8; ++y)
    for (int c = 0; c < 16; ++c) half.at(2, y, c) = half.at(2, y, c) > 0.5 ? 0.0 : 1.0;
  const double l0 = distortion(x, half).l0_fraction;
  return {worst <= 1e-6 && self == 1.0 && l0 == 0.5,
          fmt("max SSIM difference %.2e, ssim(x,x) = %.17g, half-pixels l0 = %.17g", worst, self, l0)};
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " -q";
  const int s = std::system(cmd.c_str());
  return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

nlohmann::json without_timing(nlohmann::json j) {
  if (j.is_object()) {
    j.erase("timing");
    for (auto& [k, v] : j.items()) v = without_timing(v);
  } else if (j.is_array()) {
    for (auto& v : j) v = without_timing(v);
  }
  return j;
}

std::string normalized(const fs::path& p) {
  const std::string text = io::read_file(p);
  if (p.extension() != ".jsonl") return without_timing(nlohmann::json::parse(text)).dump();
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (!line.empty()) out += without_timing(nlohmann::json::parse(line)).dump() + "\n";
  return out;
}

// 9: two full default runs agree on every results.jsonl and report.json.
Outcome determinism(const std::string& cli, const std::string& config) {
  const fs::path root = fs::absolute("acceptance-runs");
  fs::remove_all(root);
  for (const char* run : {"a", "b"})
    for (const char* verb : {"generate", "train", "attack", "evaluate"}) {
      const int rc = run_cli(cli, std::string(verb) + " --config \"" + config + "\" --out \"" + (root / run).string() + "\"");
      if (rc != 0) return {false, fmt("run %s: %s exited with %d", run, verb, rc)};
    }
  int files = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    const std::string name = e.path().filename().string();
    if (name != "results.jsonl" && name != "report.json") continue;
    ++files;
    const fs::path other = root / "b" / fs::relative(e.path(), root / "a");
    differ += !fs::exists(other) || normalized(e.path()) != normalized(other);
  }
  if (differ == 0) fs::remove_all(root);
  return {files > 0 && differ == 0, fmt("%d of %d compared files differ", differ, files)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <advlens-cli> <default-config> [criterion ...]\n");
    return 2;
  }
  const std::string cli = argv[1], config = argv[2];
  std::set<int> only;
  for (int i = 3; i < argc; ++i) only.insert(std::atoi(argv[i]));

  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_s;                  // 0: no runtime bound
    std::function<void()> prepare;    // trained detectors, built outside the timed region
  };
  const auto op = [] { testing::one_phase(); };
  const auto both = [] {
    testing::one_phase();
    testing::two_phase();
  };
  const auto all4 = [] {
    for (auto fam : {Family::OnePhase, Family::TwoPhase})
      for (const char* bb : {"b3", "b4"}) testing::trained(fam, bb);
  };
  const std::vector<Criterion> criteria = {
      {"metric oracles", metric_oracles, 10, nullptr},
      {"input gradients", gradient_check, 60, nullptr},
      {"ball and range", ball_invariants, 0, both},
      {"mAP collapse", map_collapse, 300, op},
      {"targeted specificity", targeted_specificity, 0, op},
      {"two-phase attacks", two_phase_attacks, 0, both},
      {"transfer structure", transfer_structure, 1200, all4},
      {"distortion reporting", distortion_reporting, 0, nullptr},
      {"determinism", [&] { return determinism(cli, config); }, 0, nullptr},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    const Criterion& c = criteria[k];
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      if (c.prepare) {
        const auto p0 = std::chrono::steady_clock::now();
        c.prepare();
        const double p = std::chrono::duration<double>(std::chrono::steady_clock::now() - p0).count();
        if (p > 1.0) std::printf("criterion %d: detector fixtures ready after %.1f s\n", id, p);
      }
      t0 = std::chrono::steady_clock::now();
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && s > c.budget_s) {
      o.pass = false;
      o.detail += fmt("; runtime over the %.0f s budget", c.budget_s);
    }
    failed += !o.pass;
    std::printf("criterion %d %-22s %s  %s  [%.1f s]\n", id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), s);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
