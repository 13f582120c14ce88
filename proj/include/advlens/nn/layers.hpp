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

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "advlens/core/image.hpp"

namespace advlens::nn {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const RowMat>;

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(sigmoid(x)), stable for large |x|.
inline double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

inline double silu(double x) { return x * sigmoid(x); }
inline double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

inline void softmax(std::span<const double> logits, std::span<double> out) {
  double m = logits[0];
  for (double l : logits) m = std::max(m, l);
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (out[i] = std::exp(logits[i] - m));
  for (double& o : out) o /= z;
}

/// Hands out contiguous slices of one flat parameter vector.
class ParamLayout {
 public:
  std::size_t allocate(std::size_t n) {
    const std::size_t off = size_;
    size_ += n;
    return off;
  }
  std::size_t size() const { return size_; }

 private:
  std::size_t size_ = 0;
};

struct ConvSpec {
  int cin = 0;
  int cout = 0;
  int stride = 1;
  int kernel = 3;
};

/// Square-kernel convolution with zero padding kernel/2.
class Conv2d {
 public:
  struct Cache {
    RowMat col;
    int in_h = 0, in_w = 0, out_h = 0, out_w = 0;
  };

  Conv2d() = default;
  Conv2d(ConvSpec spec, ParamLayout& layout) : spec_(spec) {
    w_off_ = layout.allocate(static_cast<std::size_t>(spec.cout) * fan_in());
    b_off_ = layout.allocate(static_cast<std::size_t>(spec.cout));
  }

  const ConvSpec& spec() const { return spec_; }
  int fan_in() const { return spec_.cin * spec_.kernel * spec_.kernel; }
  int pad() const { return spec_.kernel / 2; }
  int out_size(int in) const { return (in + 2 * pad() - spec_.kernel) / spec_.stride + 1; }

  void init(std::span<double> params, std::mt19937_64& rng) const {
    std::normal_distribution<double> nd(0.0, std::sqrt(2.0 / fan_in()));
    for (std::size_t i = 0; i < static_cast<std::size_t>(spec_.cout) * fan_in(); ++i) params[w_off_ + i] = nd(rng);
    for (int i = 0; i < spec_.cout; ++i) params[b_off_ + i] = 0.0;
  }
  double& bias(std::span<double> params, int ch) const { return params[b_off_ + ch]; }

  Tensor forward(std::span<const double> params, const Tensor& x, Cache* cache) const {
    if (x.c != spec_.cin) throw ShapeMismatchError("conv: channel mismatch");
    Cache local;
    Cache& cc = cache ? *cache : local;
    cc.in_h = x.h;
    cc.in_w = x.w;
    cc.out_h = out_size(x.h);
    cc.out_w = out_size(x.w);
    im2col(x, cc);
    Tensor y(spec_.cout, cc.out_h, cc.out_w);
    RowMap ym(y.v.data(), spec_.cout, static_cast<Eigen::Index>(cc.out_h) * cc.out_w);
    ym.noalias() = weights(params) * cc.col;
    for (int o = 0; o < spec_.cout; ++o) ym.row(o).array() += params[b_off_ + o];
    return y;
  }

  /// Returns dL/dx; accumulates dL/dtheta into `dparams` when non-empty.
  Tensor backward(std::span<const double> params, const Cache& cc, const Tensor& dy,
                  std::span<double> dparams, bool need_dx = true) const {
    const Eigen::Index n = static_cast<Eigen::Index>(cc.out_h) * cc.out_w;
    ConstRowMap dym(dy.v.data(), spec_.cout, n);
    if (!dparams.empty()) {
      RowMap dw(dparams.data() + w_off_, spec_.cout, fan_in());
      dw.noalias() += dym * cc.col.transpose();
      for (int o = 0; o < spec_.cout; ++o) dparams[b_off_ + o] += dym.row(o).sum();
    }
    Tensor dx(spec_.cin, cc.in_h, cc.in_w);
    if (!need_dx) return dx;
    RowMat dcol = weights(params).transpose() * dym;
    col2im(dcol, cc, dx);
    return dx;
  }

 private:
  ConstRowMap weights(std::span<const double> params) const {
    return ConstRowMap(params.data() + w_off_, spec_.cout, fan_in());
  }

  void im2col(const Tensor& x, Cache& cc) const {
    const int k = spec_.kernel, s = spec_.stride, p = pad();
    cc.col.setZero(fan_in(), static_cast<Eigen::Index>(cc.out_h) * cc.out_w);
    for (int ci = 0; ci < spec_.cin; ++ci) {
      const double* plane = x.channel(ci);
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          double* row = cc.col.row((ci * k + ky) * k + kx).data();
          for (int oy = 0; oy < cc.out_h; ++oy) {
            const int iy = oy * s + ky - p;
            if (iy < 0 || iy >= x.h) continue;
            double* dst = row + static_cast<std::size_t>(oy) * cc.out_w;
            const double* src = plane + static_cast<std::size_t>(iy) * x.w;
            for (int ox = 0; ox < cc.out_w; ++ox) {
              const int ix = ox * s + kx - p;
              if (ix >= 0 && ix < x.w) dst[ox] = src[ix];
            }
          }
        }
      }
    }
  }

  void col2im(const RowMat& dcol, const Cache& cc, Tensor& dx) const {
    const int k = spec_.kernel, s = spec_.stride, p = pad();
    for (int ci = 0; ci < spec_.cin; ++ci) {
      double* plane = dx.channel(ci);
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const double* row = dcol.row((ci * k + ky) * k + kx).data();
          for (int oy = 0; oy < cc.out_h; ++oy) {
            const int iy = oy * s + ky - p;
            if (iy < 0 || iy >= cc.in_h) continue;
            const double* src = row + static_cast<std::size_t>(oy) * cc.out_w;
            double* dst = plane + static_cast<std::size_t>(iy) * cc.in_w;
            for (int ox = 0; ox < cc.out_w; ++ox) {
              const int ix = ox * s + kx - p;
              if (ix >= 0 && ix < cc.in_w) dst[ix] += src[ox];
            }
          }
        }
      }
    }
  }

  ConvSpec spec_;
  std::size_t w_off_ = 0;
  std::size_t b_off_ = 0;
};

/// Fully connected layer y = W x + b.
class Linear {
 public:
  Linear() = default;
  Linear(int in, int out, ParamLayout& layout) : in_(in), out_(out) {
    w_off_ = layout.allocate(static_cast<std::size_t>(in) * out);
    b_off_ = layout.allocate(static_cast<std::size_t>(out));
  }
  int in() const { return in_; }
  int out() const { return out_; }

  void init(std::span<double> params, std::mt19937_64& rng) const {
    std::normal_distribution<double> nd(0.0, std::sqrt(2.0 / in_));
    for (std::size_t i = 0; i < static_cast<std::size_t>(in_) * out_; ++i) params[w_off_ + i] = nd(rng);
    for (int i = 0; i < out_; ++i) params[b_off_ + i] = 0.0;
  }

  std::vector<double> forward(std::span<const double> params, std::span<const double> x) const {
    std::vector<double> y(static_cast<std::size_t>(out_));
    for (int o = 0; o < out_; ++o) {
      const double* row = params.data() + w_off_ + static_cast<std::size_t>(o) * in_;
      double acc = params[b_off_ + o];
      for (int i = 0; i < in_; ++i) acc += row[i] * x[i];
      y[o] = acc;
    }
    return y;
  }

  std::vector<double> backward(std::span<const double> params, std::span<const double> x,
                               std::span<const double> dy, std::span<double> dparams) const {
    std::vector<double> dx(static_cast<std::size_t>(in_), 0.0);
    for (int o = 0; o < out_; ++o) {
      const double g = dy[o];
      if (g == 0.0) continue;
      const double* row = params.data() + w_off_ + static_cast<std::size_t>(o) * in_;
      for (int i = 0; i < in_; ++i) dx[i] += row[i] * g;
      if (!dparams.empty()) {
        double* drow = dparams.data() + w_off_ + static_cast<std::size_t>(o) * in_;
        for (int i = 0; i < in_; ++i) drow[i] += x[i] * g;
        dparams[b_off_ + o] += g;
      }
    }
    return dx;
  }

 private:
  int in_ = 0;
  int out_ = 0;
  std::size_t w_off_ = 0;
  std::size_t b_off_ = 0;
};

/// Chain of conv + SiLU layers grouped into blocks; block outputs are the
/// intermediate feature maps exposed to feature-space losses.
class ConvStack {
 public:
  struct Cache {
    std::vector<Conv2d::Cache> conv;
    std::vector<Tensor> pre;  // pre-activation per conv
  };

  ConvStack() = default;
  ConvStack(const std::vector<std::vector<ConvSpec>>& blocks, ParamLayout& layout) {
    for (const auto& block : blocks) {
      for (const auto& spec : block) convs_.emplace_back(spec, layout);
      block_end_.push_back(static_cast<int>(convs_.size()) - 1);
    }
  }

  int out_channels() const { return convs_.back().spec().cout; }
  int total_stride() const {
    int s = 1;
    for (const auto& c : convs_) s *= c.spec().stride;
    return s;
  }
  std::size_t num_blocks() const { return block_end_.size(); }

  void init(std::span<double> params, std::mt19937_64& rng) const {
    for (const auto& c : convs_) c.init(params, rng);
  }

  Tensor forward(std::span<const double> params, const Tensor& x, Cache* cache,
                 std::vector<Tensor>* block_outputs = nullptr) const {
    if (cache) {
      cache->conv.assign(convs_.size(), {});
      cache->pre.assign(convs_.size(), {});
    }
    Tensor cur = x;
    std::size_t next_block = 0;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      Tensor pre = convs_[i].forward(params, cur, cache ? &cache->conv[i] : nullptr);
      cur = pre;
      for (double& v : cur.v) v = silu(v);
      if (cache) cache->pre[i] = std::move(pre);
      if (block_outputs && next_block < block_end_.size() && block_end_[next_block] == static_cast<int>(i)) {
        block_outputs->push_back(cur);
        ++next_block;
      }
    }
    return cur;
  }

  Tensor backward(std::span<const double> params, const Cache& cache, Tensor dy, std::span<double> dparams,
                  bool need_dx = true) const {
    for (std::size_t i = convs_.size(); i-- > 0;) {
      const Tensor& pre = cache.pre[i];
      for (std::size_t j = 0; j < dy.v.size(); ++j) dy.v[j] *= silu_grad(pre.v[j]);
      dy = convs_[i].backward(params, cache.conv[i], dy, dparams, need_dx || i > 0);
    }
    return dy;
  }

 private:
  std::vector<Conv2d> convs_;
  std::vector<int> block_end_;
};

}  // namespace advlens::nn
