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

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "advlens/metrics/distortion.hpp"
#include "advlens/metrics/timing.hpp"

namespace advlens {

inline constexpr int kReportSchemaVersion = 1;

struct EvaluationReport {
  std::string attack;  // "benign" for clean evaluation
  std::string model;
  std::vector<std::string> class_names;
  std::vector<std::optional<double>> benign_per_class_ap;
  std::vector<std::optional<double>> per_class_ap;
  double benign_map = 0.0;
  double map_value = 0.0;
  std::optional<double> asr;
  std::string asr_kind;  // vanishing | fabrication | mislabeling | empty
  std::optional<double> mr;
  DistortionRecord distortion;  // mean over images
  TimingRecord timing;          // medians over images
  std::size_t images = 0;
  double t_iou = 0.5;
  double confidence_threshold = 0.5;
};

namespace detail {

inline nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

inline std::optional<double> json_opt(const nlohmann::json& j) {
  return j.is_null() ? std::nullopt : std::optional<double>(j.get<double>());
}

inline std::string csv_num(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(10);
  os << *v;
  return os.str();
}

}  // namespace detail

inline nlohmann::json to_json(const EvaluationReport& r, bool include_timing = true) {
  using nlohmann::json;
  json classes = json::array();
  for (std::size_t k = 0; k < r.class_names.size(); ++k)
    classes.push_back({{"class_id", k},
                       {"name", r.class_names[k]},
                       {"benign_ap", detail::opt_json(k < r.benign_per_class_ap.size() ? r.benign_per_class_ap[k]
                                                                                         : std::nullopt)},
                       {"ap", detail::opt_json(k < r.per_class_ap.size() ? r.per_class_ap[k] : std::nullopt)}});
  json j = {{"schema_version", kReportSchemaVersion},
            {"attack", r.attack},
            {"model", r.model},
            {"images", r.images},
            {"t_iou", r.t_iou},
            {"confidence_threshold", r.confidence_threshold},
            {"classes", classes},
            {"benign_map", r.benign_map},
            {"map", r.map_value},
            {"asr", detail::opt_json(r.asr)},
            {"asr_kind", r.asr_kind},
            {"mr", detail::opt_json(r.mr)},
            {"distortion",
             {{"linf", r.distortion.linf},
              {"l2_per_pixel", r.distortion.l2_per_pixel},
              {"l0_fraction", r.distortion.l0_fraction},
              {"ssim", r.distortion.ssim}}}};
  if (include_timing)
    j["timing"] = {{"detection_time_s", r.timing.detection_time_s},
                   {"attack_time_s", r.timing.attack_time_s},
                   {"total_time_s", r.timing.total_time_s}};
  return j;
}

/// Returns the list of schema violations; empty when `j` is a valid report.
inline std::vector<std::string> report_schema_errors(const nlohmann::json& j) {
  std::vector<std::string> err;
  auto need = [&](const char* key, auto pred, const char* what) {
    if (!j.contains(key) || !pred(j.at(key))) err.push_back(std::string(key) + ": expected " + what);
  };
  auto is_num = [](const nlohmann::json& v) { return v.is_number(); };
  auto is_num_or_null = [](const nlohmann::json& v) { return v.is_number() || v.is_null(); };
  auto is_str = [](const nlohmann::json& v) { return v.is_string(); };
  auto unit = [](const nlohmann::json& v) { return v.is_number() && v.get<double>() >= 0.0 && v.get<double>() <= 1.0; };
  if (!j.is_object()) return {"report must be an object"};
  need("schema_version", [](const nlohmann::json& v) { return v.is_number_integer() && v.get<int>() == kReportSchemaVersion; },
       "current schema version");
  need("attack", is_str, "string");
  need("model", is_str, "string");
  need("images", [](const nlohmann::json& v) { return v.is_number_unsigned() || v.is_number_integer(); }, "integer");
  need("t_iou", unit, "number in [0,1]");
  need("confidence_threshold", unit, "number in [0,1]");
  need("benign_map", unit, "number in [0,1]");
  need("map", unit, "number in [0,1]");
  need("asr", [&](const nlohmann::json& v) { return v.is_null() || unit(v); }, "null or number in [0,1]");
  need("mr", [&](const nlohmann::json& v) { return v.is_null() || unit(v); }, "null or number in [0,1]");
  need("asr_kind", is_str, "string");
  need("classes", [](const nlohmann::json& v) { return v.is_array() && !v.empty(); }, "nonempty array");
  if (j.contains("classes") && j["classes"].is_array()) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : j["classes"]) {
      if (!c.is_object() || !c.contains("class_id") || !c.contains("name") || !c.contains("ap") ||
          !c.contains("benign_ap") || !is_num_or_null(c["ap"]) || !is_num_or_null(c["benign_ap"])) {
        err.push_back("classes: malformed entry");
        continue;
      }
      if (c["ap"].is_number()) {
        sum += c["ap"].get<double>();
        ++n;
      }
    }
    if (n > 0 && j.contains("map") && is_num(j["map"]) && std::abs(sum / n - j["map"].get<double>()) > 1e-9)
      err.push_back("map: not the mean of per-class APs");
  }
  need("distortion", [](const nlohmann::json& v) { return v.is_object(); }, "object");
  if (j.contains("distortion") && j["distortion"].is_object()) {
    const auto& d = j["distortion"];
    for (const char* k : {"linf", "l2_per_pixel", "l0_fraction", "ssim"})
      if (!d.contains(k) || !d[k].is_number()) err.push_back(std::string("distortion.") + k + ": expected number");
    if (d.contains("l0_fraction") && !unit(d["l0_fraction"])) err.push_back("distortion.l0_fraction: out of range");
    if (d.contains("ssim") && d["ssim"].is_number() && std::abs(d["ssim"].get<double>()) > 1.0)
      err.push_back("distortion.ssim: out of range");
  }
  if (j.contains("timing")) {
    const auto& t = j["timing"];
    for (const char* k : {"detection_time_s", "attack_time_s", "total_time_s"})
      if (!t.contains(k) || !t[k].is_number()) err.push_back(std::string("timing.") + k + ": expected number");
  }
  return err;
}

inline EvaluationReport report_from_json(const nlohmann::json& j) {
  const auto errs = report_schema_errors(j);
  if (!errs.empty()) throw ValidationError("invalid report: " + errs.front());
  EvaluationReport r;
  r.attack = j["attack"];
  r.model = j["model"];
  r.images = j["images"];
  r.t_iou = j["t_iou"];
  r.confidence_threshold = j["confidence_threshold"];
  for (const auto& c : j["classes"]) {
    r.class_names.push_back(c["name"]);
    r.benign_per_class_ap.push_back(detail::json_opt(c["benign_ap"]));
    r.per_class_ap.push_back(detail::json_opt(c["ap"]));
  }
  r.benign_map = j["benign_map"];
  r.map_value = j["map"];
  r.asr = detail::json_opt(j["asr"]);
  r.asr_kind = j["asr_kind"];
  r.mr = detail::json_opt(j["mr"]);
  const auto& d = j["distortion"];
  r.distortion = {d["linf"], d["l2_per_pixel"], d["l0_fraction"], d["ssim"]};
  if (j.contains("timing")) {
    const auto& t = j["timing"];
    r.timing = {t["detection_time_s"], t["attack_time_s"], t["total_time_s"]};
  }
  return r;
}

/// One row per class followed by a summary row.
inline std::string to_csv(const EvaluationReport& r) {
  std::ostringstream os;
  os << "row,attack,model,class_id,class_name,benign_ap,adversarial_ap,asr,mr,linf,l2_per_pixel,l0_fraction,ssim,"
        "detection_time_s,attack_time_s,total_time_s\n";
  for (std::size_t k = 0; k < r.class_names.size(); ++k)
    os << "class," << r.attack << ',' << r.model << ',' << k << ',' << r.class_names[k] << ','
       << detail::csv_num(k < r.benign_per_class_ap.size() ? r.benign_per_class_ap[k] : std::nullopt) << ','
       << detail::csv_num(k < r.per_class_ap.size() ? r.per_class_ap[k] : std::nullopt) << ",,,,,,,,,\n";
  os << "summary," << r.attack << ',' << r.model << ",,," << detail::csv_num(r.benign_map) << ','
     << detail::csv_num(r.map_value) << ',' << detail::csv_num(r.asr) << ',' << detail::csv_num(r.mr) << ','
     << detail::csv_num(r.distortion.linf) << ',' << detail::csv_num(r.distortion.l2_per_pixel) << ','
     << detail::csv_num(r.distortion.l0_fraction) << ',' << detail::csv_num(r.distortion.ssim) << ','
     << detail::csv_num(r.timing.detection_time_s) << ',' << detail::csv_num(r.timing.attack_time_s) << ','
     << detail::csv_num(r.timing.total_time_s) << '\n';
  return os.str();
}

}  // namespace advlens
