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
#pragma once

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "advlens/attacks/registry.hpp"
#include "advlens/cli/config.hpp"
#include "advlens/io/checkpoint.hpp"
#include "advlens/io/dataset_io.hpp"
#include "advlens/io/plot.hpp"
#include "advlens/metrics/distortion.hpp"
#include "advlens/metrics/report.hpp"
#include "advlens/metrics/timing.hpp"
#include "advlens/transfer/matrix.hpp"

namespace advlens::cli {

namespace fs = std::filesystem;

struct RunOptions {
  bool force = false;
  bool plots = false;
  bool quiet = false;
};

/// Output tree of one experiment directory.
struct RunPaths {
  fs::path root;

  fs::path data() const { return root / "data"; }
  fs::path train_data() const { return data() / "train"; }
  fs::path test_data() const { return data() / "test"; }
  fs::path models() const { return root / "models"; }
  fs::path checkpoint(const std::string& id) const { return models() / (id + ".ckpt"); }
  fs::path attacks() const { return root / "attacks"; }
  fs::path attack_dir(const std::string& attack, const std::string& model) const { return attacks() / attack / model; }
  fs::path eval() const { return root / "eval"; }
  fs::path transfer() const { return root / "transfer"; }
};

/// Builds a stage directory under a temp name and renames it into place on commit.
class StagedDir {
 public:
  StagedDir(fs::path final_dir, bool force) : final_(std::move(final_dir)) {
    if (fs::exists(final_) && !fs::is_empty(final_) && !force)
      throw ValidationError(final_.string() + " exists and is not empty (use --force to replace it)");
    fs::create_directories(final_.parent_path());
    tmp_ = final_.parent_path() / ("." + final_.filename().string() + ".tmp-" + std::to_string(::getpid()));
    fs::remove_all(tmp_);
    fs::create_directories(tmp_);
  }
  StagedDir(const StagedDir&) = delete;
  StagedDir& operator=(const StagedDir&) = delete;
  ~StagedDir() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(tmp_, ec);
    }
  }

  const fs::path& path() const { return tmp_; }

  void commit() {
    fs::remove_all(final_);
    fs::rename(tmp_, final_);
    committed_ = true;
  }

 private:
  fs::path final_;
  fs::path tmp_;
  bool committed_ = false;
};

namespace detail {

inline void log(const RunOptions& o, const std::string& msg) {
  if (!o.quiet) std::fprintf(stderr, "%s\n", msg.c_str());
}

inline void echo_config(const ExperimentConfig& c) {
  io::write_file_atomic(fs::path(c.output) / "effective_config.json", to_json(c).dump(2) + "\n");
}

inline ShapesDataset load_dataset(const fs::path& dir) {
  if (!fs::exists(dir / "annotations.jsonl"))
    throw ValidationError("dataset " + dir.string() + " not found (run generate first)");
  return io::read_dataset(dir);
}

inline std::unique_ptr<DetectorModel> load_model(const RunPaths& p, const ModelEntry& m) {
  const fs::path ck = p.checkpoint(m.id);
  if (!fs::exists(ck)) throw ValidationError("checkpoint " + ck.string() + " not found (run train first)");
  auto loaded = io::load_checkpoint(ck);
  if (!(loaded.model->spec() == m.spec))
    throw ValidationError("checkpoint " + ck.string() + " does not match model '" + m.id + "' in the config");
  return std::move(loaded.model);
}

inline nlohmann::json box_json(const BoundingBox& b) { return {b.cx, b.cy, b.w, b.h}; }

inline nlohmann::json detections_json(const std::vector<DetectedObject>& dets) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& d : dets)
    a.push_back({{"box", box_json(d.box)}, {"class_id", d.class_id}, {"confidence", d.confidence}});
  return a;
}

inline std::vector<std::string> models_for(const ExperimentConfig& c, const AttackEntry& a) {
  if (!a.models.empty()) return a.models;
  std::vector<std::string> ids;
  for (const auto& m : c.models) ids.push_back(m.id);
  return ids;
}

inline std::string asr_kind(const std::string& attack) {
  if (attack == "tog-vanishing") return "vanishing";
  if (attack == "tog-fabrication") return "fabrication";
  if (attack.rfind("tog-mislabeling", 0) == 0) return "mislabeling";
  return "";
}

inline std::string image_stem(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return buf;
}

inline std::string csv_line(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s + "\n";
}

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace detail

inline void cmd_generate(const ExperimentConfig& c, const RunOptions& o) {
  validate(c);
  const RunPaths p{c.output};
  StagedDir stage(p.data(), o.force);
  const auto& d = c.dataset;
  const Resolution r{d.resolution, d.resolution};
  detail::log(o, "generate: " + std::to_string(d.train_count) + " train images (seed " + std::to_string(d.train_seed) + ")");
  io::write_dataset(stage.path() / "train", generate_shapes_dataset(d.train_seed, d.train_count, r, d.num_classes));
  detail::log(o, "generate: " + std::to_string(d.test_count) + " test images (seed " + std::to_string(d.test_seed) + ")");
  io::write_dataset(stage.path() / "test", generate_shapes_dataset(d.test_seed, d.test_count, r, d.num_classes));
  stage.commit();
  detail::echo_config(c);
}

inline void cmd_train(const ExperimentConfig& c, const RunOptions& o) {
  validate(c);
  if (c.models.empty()) throw ValidationError("no models configured");
  const RunPaths p{c.output};
  const ShapesDataset train_ds = detail::load_dataset(p.train_data());
  if (train_ds.num_classes() != c.dataset.num_classes) throw ValidationError("training set class count differs from config");
  StagedDir stage(p.models(), o.force);
  for (std::size_t i = 0; i < c.models.size(); ++i) {
    const auto& m = c.models[i];
    auto model = make_detector(m.spec, c.seed * 7919 + i + 1);
    TrainConfig tc = c.train;
    tc.seed = c.seed;
    tc.jobs = c.jobs;
    detail::log(o, "train: " + m.id + " (" + std::to_string(tc.epochs) + " epochs)");
    const TrainResult tr = train(*model, train_ds, tc);
    nlohmann::json log = {{"model", m.id}, {"initial_loss", tr.initial_loss}, {"epoch_loss", tr.epoch_loss}};
    io::save_checkpoint(stage.path() / (m.id + ".ckpt"), *model, {{"id", m.id}, {"seed", c.seed}});
    io::write_file_atomic(stage.path() / (m.id + ".train.json"), log.dump(2) + "\n");
    if (!tr.epoch_loss.empty())
      detail::log(o, "train: " + m.id + " loss " + detail::num(tr.initial_loss) + " -> " +
                         detail::num(tr.epoch_loss.back()));
  }
  stage.commit();
  detail::echo_config(c);
}

inline void cmd_attack(const ExperimentConfig& c, const RunOptions& o) {
  validate(c);
  if (c.attacks.empty()) throw ValidationError("no attacks configured");
  const RunPaths p{c.output};
  // preflight: inputs and applicability before any output is written
  const ShapesDataset test = detail::load_dataset(p.test_data());
  std::map<std::string, std::unique_ptr<DetectorModel>> models;
  for (const auto& a : c.attacks)
    for (const auto& id : detail::models_for(c, a)) {
      if (!models.count(id)) models[id] = detail::load_model(p, c.model(id));
      if ((a.name == "dag" || a.name == "rap") && !models[id]->supports_proposals())
        throw ApplicabilityError(a.name + " is only applicable to two-phase detectors; model '" + id + "' is " +
                                 models[id]->architecture_tag());
    }

  StagedDir stage(p.attacks(), o.force);
  for (const auto& a : c.attacks) {
    for (const auto& id : detail::models_for(c, a)) {
      const DetectorModel& model = *models[id];
      detail::log(o, "attack: " + a.name + " on " + id);
      const fs::path dir = stage.path() / a.name / id;
      fs::create_directories(dir / "adv");
      std::vector<std::string> lines(test.size());
      parallel_for(test.size(), c.jobs, [&](std::size_t i) {
        AttackConfig ac = a.config;
        ac.rng_seed = a.config.rng_seed + c.seed * 1000003ULL + i;
        const Image& x = test.images[i];
        auto [benign_dets, det_s] = timing_wrap([&] { return model.detect(x, ac.anchor_confidence, ac.anchor_nms_iou); });
        const AttackResult r = run_attack(a.name, model, x, ac);
        const auto adv_dets = model.detect(r.adversarial, ac.anchor_confidence, ac.anchor_nms_iou);
        const TimingRecord t = make_timing(det_s, r.attack_time_s);
        const DistortionRecord d = distortion(r.benign, r.adversarial);
        const std::string stem = detail::image_stem(i);
        io::save_tensor(dir / "adv" / (stem + ".f64"), r.adversarial.pixels);
        io::write_png(dir / "adv" / (stem + ".png"), r.adversarial);
        nlohmann::json rec = {{"image", i},
                              {"attack", a.name},
                              {"model", id},
                              {"iterations_used", r.iterations_used},
                              {"empty_anchor", r.empty_anchor},
                              {"trace", r.trace},
                              {"benign_detections", detail::detections_json(benign_dets)},
                              {"adversarial_detections", detail::detections_json(adv_dets)},
                              {"target_labels", r.target_labels},
                              {"distortion",
                               {{"linf", d.linf},
                                {"l2_per_pixel", d.l2_per_pixel},
                                {"l0_fraction", d.l0_fraction},
                                {"ssim", d.ssim}}},
                              {"adversarial", "adv/" + stem + ".f64"},
                              {"timing",
                               {{"detection_time_s", t.detection_time_s},
                                {"attack_time_s", t.attack_time_s},
                                {"total_time_s", t.total_time_s}}}};
        lines[i] = rec.dump() + "\n";
      });
      std::string all;
      for (const auto& l : lines) all += l;
      io::write_file_atomic(dir / "results.jsonl", all);
      nlohmann::json manifest = attack_to_json(a);
      manifest["model"] = id;
      manifest["checkpoint"] = p.checkpoint(id).string();
      manifest["dataset"] = p.test_data().string();
      manifest["output"] = p.attack_dir(a.name, id).string();
      io::write_file_atomic(dir / "attack.json", manifest.dump(2) + "\n");
    }
  }
  stage.commit();
  detail::echo_config(c);
}

struct AttackRecords {
  std::vector<Image> adversarial;
  std::vector<TimingRecord> timing;
};

inline AttackRecords read_attack_records(const fs::path& dir, const ShapesDataset& test) {
  AttackRecords r;
  r.adversarial.resize(test.size());
  r.timing.resize(test.size());
  std::vector<bool> seen(test.size(), false);
  std::istringstream in(io::read_file(dir / "results.jsonl"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const std::size_t i = j.at("image");
    if (i >= test.size()) throw ValidationError(dir.string() + ": image index out of range");
    Image img(io::load_tensor(dir / j.at("adversarial").get<std::string>()), Provenance::Adversarial);
    require_same_shape(img.pixels, test.images[i].pixels, "adversarial image");
    r.adversarial[i] = std::move(img);
    const auto& t = j.at("timing");
    r.timing[i] = make_timing(t.at("detection_time_s"), t.at("attack_time_s"));
    seen[i] = true;
  }
  for (bool s : seen)
    if (!s) throw ValidationError(dir.string() + ": results.jsonl does not cover every test image");
  return r;
}

/// Report of one (attack, model) pair; benign-only when `adv` is null.
inline EvaluationReport evaluate_pair(const std::string& attack, const std::string& model_id, const DetectorModel& model,
                                      const ShapesDataset& test, const AttackRecords* adv, const AttackConfig* acfg,
                                      const EvalSettings& es, int jobs) {
  EvaluationReport rep;
  rep.attack = attack;
  rep.model = model_id;
  rep.class_names = test.class_names;
  rep.images = test.size();
  rep.t_iou = es.t_iou;
  rep.confidence_threshold = es.confidence_threshold;
  const int K = test.num_classes();
  std::vector<double> det_times(test.size());
  DetectionsPerImage ben(test.size());
  parallel_for(test.size(), jobs, [&](std::size_t i) {
    auto [d, s] = timing_wrap([&] { return model.detect(test.images[i], es.confidence_threshold, es.nms_iou); });
    ben[i] = std::move(d);
    det_times[i] = s;
  });
  const MapResult bm = evaluate_detections(ben, test.annotations, K, es);
  rep.benign_per_class_ap = bm.per_class_ap;
  rep.benign_map = bm.map;
  if (!adv) {
    rep.per_class_ap = bm.per_class_ap;
    rep.map_value = bm.map;
    rep.timing = make_timing(median(det_times), 0.0);
    return rep;
  }
  const DetectionsPerImage advd = detect_all(model, adv->adversarial, es, jobs);
  const MapResult am = evaluate_detections(advd, test.annotations, K, es);
  rep.per_class_ap = am.per_class_ap;
  rep.map_value = am.map;
  rep.asr_kind = detail::asr_kind(attack);
  std::size_t nben = 0;
  for (const auto& b : ben) nben += b.size();
  if (rep.asr_kind == "fabrication") rep.asr = asr_fabrication(ben, advd);
  if (rep.asr_kind == "vanishing" && nben > 0) rep.asr = asr_vanishing(ben, advd, es.t_iou);
  if (rep.asr_kind == "mislabeling" && nben > 0) {
    std::vector<std::vector<int>> targets(ben.size());
    for (std::size_t i = 0; i < ben.size(); ++i)
      for (const auto& b : ben[i]) targets[i].push_back(pick_target_class(b, K, acfg->target_mode, acfg->target_map));
    rep.asr = asr_mislabeling(ben, advd, targets, es.t_iou);
    rep.mr = misdetection_rate(ben, advd, es.t_iou);
  }
  DistortionRecord mean{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < test.size(); ++i) {
    const DistortionRecord d = distortion(test.images[i], adv->adversarial[i]);
    mean.linf += d.linf;
    mean.l2_per_pixel += d.l2_per_pixel;
    mean.l0_fraction += d.l0_fraction;
    mean.ssim += d.ssim;
  }
  const double n = static_cast<double>(test.size());
  rep.distortion = {mean.linf / n, mean.l2_per_pixel / n, mean.l0_fraction / n, mean.ssim / n};
  rep.timing = median_timing(adv->timing);
  return rep;
}

inline std::string curve_csv(const std::vector<double>& thresholds, const std::vector<double>& benign,
                             const std::vector<double>* adversarial) {
  std::string s = adversarial ? "threshold,benign,adversarial\n" : "threshold,benign\n";
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    s += detail::num(thresholds[i]) + "," + detail::num(benign[i]);
    if (adversarial) s += "," + detail::num((*adversarial)[i]);
    s += "\n";
  }
  return s;
}

inline std::vector<std::vector<DetectionCandidate>> candidates_all(const DetectorModel& m, const std::vector<Image>& xs,
                                                                   int jobs) {
  std::vector<std::vector<DetectionCandidate>> out(xs.size());
  parallel_for(xs.size(), jobs, [&](std::size_t i) { out[i] = m.candidates(xs[i]); });
  return out;
}

inline void write_report(const fs::path& dir, const EvaluationReport& r, const std::string& curve) {
  io::write_file_atomic(dir / "report.json", to_json(r).dump(2) + "\n");
  io::write_file_atomic(dir / "report.csv", to_csv(r));
  io::write_file_atomic(dir / "curve.csv", curve);
}

inline void cmd_evaluate(const ExperimentConfig& c, const RunOptions& o) {
  validate(c);
  if (c.models.empty()) throw ValidationError("no models configured");
  const RunPaths p{c.output};
  const ShapesDataset test = detail::load_dataset(p.test_data());
  std::map<std::string, std::unique_ptr<DetectorModel>> models;
  for (const auto& m : c.models) models[m.id] = detail::load_model(p, m);

  StagedDir stage(p.eval(), o.force);
  std::string summary =
      "attack,model,benign_map,adversarial_map,asr_kind,asr,mr,linf,l2_per_pixel,l0_fraction,ssim,detection_time_s,"
      "attack_time_s,total_time_s\n";
  auto add_summary = [&](const EvaluationReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? detail::num(*v) : std::string(); };
    summary += detail::csv_line({r.attack, r.model, detail::num(r.benign_map), detail::num(r.map_value), r.asr_kind,
                                 opt(r.asr), opt(r.mr), detail::num(r.distortion.linf),
                                 detail::num(r.distortion.l2_per_pixel), detail::num(r.distortion.l0_fraction),
                                 detail::num(r.distortion.ssim), detail::num(r.timing.detection_time_s),
                                 detail::num(r.timing.attack_time_s), detail::num(r.timing.total_time_s)});
  };
  std::map<std::string, std::vector<double>> benign_curves;
  for (const auto& m : c.models) {
    detail::log(o, "evaluate: benign " + m.id);
    const EvaluationReport r = evaluate_pair("benign", m.id, *models[m.id], test, nullptr, nullptr, c.metrics, c.jobs);
    benign_curves[m.id] =
        objects_vs_threshold(candidates_all(*models[m.id], test.images, c.jobs), c.curve_thresholds, c.metrics.nms_iou);
    const fs::path dir = stage.path() / "benign" / m.id;
    fs::create_directories(dir);
    write_report(dir, r, curve_csv(c.curve_thresholds, benign_curves[m.id], nullptr));
    add_summary(r);
  }
  for (const auto& a : c.attacks) {
    for (const auto& id : detail::models_for(c, a)) {
      const fs::path src = p.attack_dir(a.name, id);
      if (!fs::exists(src / "results.jsonl")) {
        detail::log(o, "evaluate: no results for " + a.name + " on " + id + ", skipped");
        continue;
      }
      detail::log(o, "evaluate: " + a.name + " on " + id);
      const AttackRecords rec = read_attack_records(src, test);
      const EvaluationReport r = evaluate_pair(a.name, id, *models[id], test, &rec, &a.config, c.metrics, c.jobs);
      const auto adv_curve =
          objects_vs_threshold(candidates_all(*models[id], rec.adversarial, c.jobs), c.curve_thresholds, c.metrics.nms_iou);
      const fs::path dir = stage.path() / a.name / id;
      fs::create_directories(dir);
      write_report(dir, r, curve_csv(c.curve_thresholds, benign_curves[id], &adv_curve));
      add_summary(r);
    }
  }
  io::write_file_atomic(stage.path() / "summary.csv", summary);
  stage.commit();
  detail::echo_config(c);
}

inline void cmd_transfer(const ExperimentConfig& c, const RunOptions& o) {
  validate(c);
  if (!c.transfer) throw ValidationError("config has no transfer section");
  const TransferSpec& t = *c.transfer;
  const RunPaths p{c.output};
  const ShapesDataset test = detail::load_dataset(p.test_data());
  AttackConfig acfg = default_config_for(t.attack);
  for (const auto& a : c.attacks)
    if (a.name == t.attack) acfg = a.config;
  acfg.rng_seed += c.seed * 1000003ULL;
  acfg.jobs = c.jobs;

  std::map<std::string, std::unique_ptr<DetectorModel>> models;
  auto get = [&](const std::string& id) -> const DetectorModel& {
    if (!models.count(id)) models[id] = detail::load_model(p, c.model(id));
    return *models[id];
  };
  std::vector<NamedModel> sources, targets;
  for (const auto& id : t.source_models) sources.push_back({id, &get(id)});
  for (const auto& id : t.target_models) targets.push_back({id, &get(id)});
  if (!t.resolution_model.empty()) get(t.resolution_model);

  StagedDir stage(p.transfer(), o.force);
  detail::log(o, "transfer: cross-model " + t.attack);
  const auto cm = cross_model_matrix(t.attack, sources, targets, test, acfg, c.metrics, c.jobs);
  io::write_file_atomic(stage.path() / "cross_model.csv", matrix_csv(cm, false));
  io::write_file_atomic(stage.path() / "cross_model.json", matrix_json(cm).dump(2) + "\n");
  if (!t.resolution_model.empty()) {
    detail::log(o, "transfer: cross-resolution " + t.attack + " on " + t.resolution_model);
    const auto cr = cross_resolution_matrix(t.attack, get(t.resolution_model), t.resolution_model, test, t.resolutions,
                                            acfg, c.metrics, c.jobs);
    io::write_file_atomic(stage.path() / "cross_resolution.csv", matrix_csv(cr, true));
    io::write_file_atomic(stage.path() / "cross_resolution.json", matrix_json(cr).dump(2) + "\n");
  }
  stage.commit();
  detail::echo_config(c);
}

inline void plot_report_rows(const fs::path& dir, const std::vector<EvaluationReport>& rows) {
  io::Canvas bars(std::max(200, 40 * static_cast<int>(rows.size()) + 40), 200, 1.0);
  const double n = static_cast<double>(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double x0 = i / n;
    bars.bar(x0 + 0.1 / n, x0 + 0.45 / n, rows[i].benign_map, io::palette()[0]);
    bars.bar(x0 + 0.5 / n, x0 + 0.85 / n, rows[i].map_value, io::palette()[1]);
  }
  io::write_png(dir / "map_bars.png", bars.image());
}

inline void plot_curve(const fs::path& csv, const fs::path& png) {
  std::istringstream in(io::read_file(csv));
  std::string line;
  std::getline(in, line);
  std::vector<double> th, b, a;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() < 2) continue;
    th.push_back(v[0]);
    b.push_back(v[1]);
    if (v.size() > 2) a.push_back(v[2]);
  }
  double ymax = 0.0;
  for (double v : b) ymax = std::max(ymax, v);
  for (double v : a) ymax = std::max(ymax, v);
  io::Canvas cv(240, 180, ymax * 1.05);
  cv.polyline(th, b, io::palette()[0]);
  if (!a.empty()) cv.polyline(th, a, io::palette()[1]);
  io::write_png(png, cv.image());
}

/// Side-by-side table of every evaluation report found in the run directories.
inline void cmd_report(const std::vector<fs::path>& runs, const fs::path& out, const RunOptions& o) {
  if (runs.empty()) throw ValidationError("report: no run directories given");
  struct Row {
    std::string run;
    EvaluationReport r;
    fs::path dir;
  };
  std::vector<Row> rows;
  for (const auto& run : runs) {
    const fs::path ev = run / "eval";
    if (!fs::is_directory(ev)) throw ValidationError("report: " + run.string() + " has no eval directory");
    std::vector<fs::path> reports;
    for (const auto& e : fs::recursive_directory_iterator(ev))
      if (e.path().filename() == "report.json") reports.push_back(e.path());
    std::sort(reports.begin(), reports.end());
    for (const auto& rp : reports)
      rows.push_back({run.string(), report_from_json(nlohmann::json::parse(io::read_file(rp))), rp.parent_path()});
  }
  if (rows.empty()) throw ValidationError("report: no evaluation reports found");
  // one row per (attack, model), one column group per run
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& row : rows) {
    const std::pair<std::string, std::string> k{row.r.attack, row.r.model};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  static const char* kFields[] = {"benign_map", "adversarial_map", "asr", "mr", "linf", "ssim", "attack_time_s"};
  StagedDir stage(out, o.force);
  std::vector<std::string> header{"attack", "model"};
  for (std::size_t r = 0; r < runs.size(); ++r)
    for (const char* f : kFields) header.push_back("run" + std::to_string(r + 1) + "_" + f);
  std::string csv = detail::csv_line(header);
  std::string index = "run,path\n";
  for (std::size_t r = 0; r < runs.size(); ++r) index += "run" + std::to_string(r + 1) + "," + runs[r].string() + "\n";
  io::write_file_atomic(stage.path() / "runs.csv", index);
  auto opt = [](const std::optional<double>& v) { return v ? detail::num(*v) : std::string(); };
  for (const auto& [attack, model] : keys) {
    std::vector<std::string> cells{attack, model};
    for (const auto& run : runs) {
      const Row* hit = nullptr;
      for (const auto& row : rows)
        if (row.run == run.string() && row.r.attack == attack && row.r.model == model) hit = &row;
      if (!hit) {
        cells.insert(cells.end(), std::size(kFields), "");
        continue;
      }
      const auto& r = hit->r;
      cells.insert(cells.end(), {detail::num(r.benign_map), detail::num(r.map_value), opt(r.asr), opt(r.mr),
                                 detail::num(r.distortion.linf), detail::num(r.distortion.ssim),
                                 detail::num(r.timing.attack_time_s)});
    }
    csv += detail::csv_line(cells);
  }
  io::write_file_atomic(stage.path() / "comparison.csv", csv);
  if (o.plots) {
    std::vector<EvaluationReport> reps;
    for (const auto& row : rows) reps.push_back(row.r);
    plot_report_rows(stage.path(), reps);
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (fs::exists(rows[i].dir / "curve.csv"))
        plot_curve(rows[i].dir / "curve.csv",
                   stage.path() / ("curve_" + std::to_string(i) + "_" + rows[i].r.attack + "_" + rows[i].r.model + ".png"));
  }
  stage.commit();
}

}  // namespace advlens::cli
