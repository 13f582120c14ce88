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

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "advlens/core/detection.hpp"
#include "advlens/core/error.hpp"
#include "advlens/core/image.hpp"

namespace advlens {

enum class Family { OnePhase, TwoPhase };

inline const char* to_string(Family f) { return f == Family::OnePhase ? "one-phase" : "two-phase"; }

inline Family family_from_string(const std::string& s) {
  if (s == "one-phase") return Family::OnePhase;
  if (s == "two-phase") return Family::TwoPhase;
  throw ValidationError("unknown model family '" + s + "' (expected one-phase or two-phase)");
}

/// Per-task detection losses; `total` is always obj + bbox + cls.
struct LossBundle {
  double obj = 0.0;
  double bbox = 0.0;
  double cls = 0.0;
  double total = 0.0;

  void finalize() { total = obj + bbox + cls; }
};

/// Bit set selecting which loss terms are differentiated.
enum LossPart : unsigned { kLossObj = 1u, kLossBBox = 2u, kLossCls = 4u, kLossAll = 7u };

struct LossGradient {
  LossBundle loss;
  Tensor grad;  // same shape as the input image
};

struct ModelSpec {
  Family family = Family::OnePhase;
  std::string backbone = "b3";
  int resolution = 64;       // square input side the instance accepts
  int base_resolution = 64;  // resolution the anchors were sized for
  int num_classes = 3;

  bool operator==(const ModelSpec&) const = default;
};

/// One RPN proposal of a two-phase detector.
struct Proposal {
  int cell = 0;
  BoundingBox box;
  double objectness = 0.0;
  bool foreground = false;  // objectness >= 0.5
  std::vector<double> class_probs;
  std::array<double, 5> raw{};  // tx, ty, tw, th, objectness logit
};

struct ProposalSet {
  std::vector<Proposal> proposals;
  double nms_iou = 0.7;
  double stride = 8.0;
  int image_h = 0;
  int image_w = 0;
  int grid_rows = 0;
  int grid_cols = 0;
};

/// Gradient of some objective with respect to the raw RPN outputs of one cell.
struct RpnCellGrad {
  int cell = 0;
  std::array<double, 5> d{};
};

/// Common contract of both toy detector families. Instances are immutable
/// during inference; all const members may be called concurrently.
class DetectorModel {
 public:
  virtual ~DetectorModel() = default;

  const ModelSpec& spec() const { return spec_; }
  Family family() const { return spec_.family; }
  int num_classes() const { return spec_.num_classes; }
  Resolution resolution() const { return {spec_.resolution, spec_.resolution}; }
  const std::string& backbone_id() const { return spec_.backbone; }
  std::string architecture_tag() const { return std::string(to_string(spec_.family)) + "/" + spec_.backbone; }

  /// Capability query: only proposal-based detectors support DAG/RAP/UEA.
  virtual bool supports_proposals() const = 0;

  virtual std::vector<DetectionCandidate> candidates(const Image& x) const = 0;

  std::vector<DetectedObject> detect(const Image& x, double confidence_threshold = 0.5,
                                     double nms_iou = 0.5) const {
    const auto c = candidates(x);
    return nms(std::span<const DetectionCandidate>(c), nms_iou, confidence_threshold);
  }

  virtual LossBundle loss_components(const Image& x, std::span<const GroundTruthObject> targets) const = 0;

  /// Losses plus the gradient of the selected loss terms w.r.t. the input.
  virtual LossGradient loss_gradient(const Image& x, std::span<const GroundTruthObject> targets,
                                     unsigned which) const = 0;

  Tensor input_gradient(const Image& x, std::span<const GroundTruthObject> targets, unsigned which) const {
    return loss_gradient(x, targets, which).grad;
  }

  /// Adds d(total loss)/d(theta) into `grad` (sized like parameters()).
  virtual LossBundle accumulate_parameter_gradient(const Image& x, std::span<const GroundTruthObject> targets,
                                                   std::span<double> grad) const = 0;

  /// Activations of the two earliest convolutional stages.
  virtual std::vector<Tensor> backbone_features(const Image& x) const = 0;
  virtual std::vector<int> feature_strides() const { return {2, 4}; }

  /// `max_proposals` = 0 keeps the model's inference cap; attacks may raise it.
  virtual ProposalSet proposals(const Image&, double /*nms_iou*/, int /*max_proposals*/ = 0) const {
    throw ApplicabilityError(architecture_tag() + " has no region proposal stage");
  }

  /// Input gradient of sum_j sum_k coeffs[j][k] * p^k_j over the proposals of `ps`.
  virtual Tensor proposal_class_gradient(const Image&, const ProposalSet&,
                                         std::span<const std::vector<double>> /*coeffs*/) const {
    throw ApplicabilityError(architecture_tag() + " has no region proposal stage");
  }

  /// Input gradient of an objective whose derivatives w.r.t. raw RPN outputs are given.
  virtual Tensor rpn_output_gradient(const Image&, std::span<const RpnCellGrad>) const {
    throw ApplicabilityError(architecture_tag() + " has no region proposal stage");
  }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  virtual std::unique_ptr<DetectorModel> clone() const = 0;

  /// Same parameters, different input resolution (fully convolutional).
  std::unique_ptr<DetectorModel> at_resolution(int side) const {
    if (side < 32) throw ValidationError("resolution must be >= 32");
    auto m = clone();
    m->spec_.resolution = side;
    return m;
  }

 protected:
  explicit DetectorModel(ModelSpec spec) : spec_(std::move(spec)) {}

  void check_input(const Image& x) const {
    if (x.channels() != 3 || x.height() != spec_.resolution || x.width() != spec_.resolution)
      throw ValidationError("input resolution " + std::to_string(x.height()) + "x" + std::to_string(x.width()) +
                            " does not match model resolution " + std::to_string(spec_.resolution));
  }

  ModelSpec spec_;
  std::vector<double> params_;
};

}  // namespace advlens
