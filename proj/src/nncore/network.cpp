// Copyright 2026 The chanprune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nncore/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/rng.hpp"

namespace chanprune::nn {

using arch::LayerKind;
using arch::LayerSpec;

template <typename Real>
Param<Real>::Param(std::string n, std::vector<int> s) : name(std::move(n)), shape(std::move(s)) {
  std::size_t count = 1;
  for (int d : shape) count *= static_cast<std::size_t>(d);
  value.assign(count, Real(0));
  grad.assign(count, Real(0));
  velocity.assign(count, Real(0));
}

namespace {

template <typename Real>
void fill_kaiming(std::vector<Real>& w, int fan_in, Rng& rng) {
  const double stddev = std::sqrt(2.0 / fan_in);
  for (Real& v : w) v = static_cast<Real>(stddev * rng.normal());
}

template <typename Real>
class ConvLayer final : public Layer<Real> {
 public:
  ConvLayer(const LayerSpec& spec, const std::string& prefix, Rng& rng) : spec_(spec) {
    const int k = spec.in_channels * spec.kernel_h * spec.kernel_w;
    this->params_.emplace_back(prefix + ".weight",
                               std::vector<int>{spec.out_channels, spec.in_channels, spec.kernel_h,
                                                spec.kernel_w});
    fill_kaiming(this->params_[0].value, k, rng);
    if (spec.bias) this->params_.emplace_back(prefix + ".bias", std::vector<int>{spec.out_channels});
  }

  void forward(const Tensor4<Real>& in, Tensor4<Real>& out, Mode) override {
    const int ho = spec_.out_shape.height, wo = spec_.out_shape.width;
    const int oc = spec_.out_channels;
    const std::size_t k = col_rows(), p = static_cast<std::size_t>(ho) * wo;
    out.reshape(in.n, oc, ho, wo);
    const Real* weight = this->params_[0].value.data();
    for (int s = 0; s < in.n; ++s) {
      im2col(in, s);
      Real* dst = out.data.data() + out.index(s, 0, 0, 0);
      for (int o = 0; o < oc; ++o) {
        Real* row = dst + o * p;
        const Real b = spec_.bias ? this->params_[1].value[o] : Real(0);
        std::fill(row, row + p, b);
        const Real* wrow = weight + o * k;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const Real wv = wrow[kk];
          const Real* crow = col_.data() + kk * p;
          for (std::size_t q = 0; q < p; ++q) row[q] += wv * crow[q];
        }
      }
    }
  }

  void backward(const Tensor4<Real>& in, const Tensor4<Real>&, const Tensor4<Real>& grad_out,
                Tensor4<Real>& grad_in) override {
    const int oc = spec_.out_channels;
    const std::size_t k = col_rows();
    const std::size_t p = static_cast<std::size_t>(spec_.out_shape.height) * spec_.out_shape.width;
    auto& wp = this->params_[0];
    std::fill(wp.grad.begin(), wp.grad.end(), Real(0));
    if (spec_.bias) std::fill(this->params_[1].grad.begin(), this->params_[1].grad.end(), Real(0));
    grad_in.reshape(in.n, in.c, in.h, in.w);
    std::fill(grad_in.data.begin(), grad_in.data.end(), Real(0));
    dcol_.assign(k * p, Real(0));

    for (int s = 0; s < in.n; ++s) {
      im2col(in, s);
      std::fill(dcol_.begin(), dcol_.end(), Real(0));
      const Real* g = grad_out.data.data() + grad_out.index(s, 0, 0, 0);
      for (int o = 0; o < oc; ++o) {
        const Real* grow = g + o * p;
        Real* dw = wp.grad.data() + o * k;
        const Real* wrow = wp.value.data() + o * k;
        if (spec_.bias) {
          Real acc = 0;
          for (std::size_t q = 0; q < p; ++q) acc += grow[q];
          this->params_[1].grad[o] += acc;
        }
        for (std::size_t kk = 0; kk < k; ++kk) {
          const Real* crow = col_.data() + kk * p;
          Real* dcrow = dcol_.data() + kk * p;
          const Real wv = wrow[kk];
          Real acc = 0;
          for (std::size_t q = 0; q < p; ++q) {
            acc += grow[q] * crow[q];
            dcrow[q] += wv * grow[q];
          }
          dw[kk] += acc;
        }
      }
      col2im(grad_in, s);
    }
  }

 private:
  std::size_t col_rows() const {
    return static_cast<std::size_t>(spec_.in_channels) * spec_.kernel_h * spec_.kernel_w;
  }

  void im2col(const Tensor4<Real>& in, int s) {
    const int kh = spec_.kernel_h, kw = spec_.kernel_w, st = spec_.stride, pad = spec_.padding;
    const int ho = spec_.out_shape.height, wo = spec_.out_shape.width;
    const std::size_t p = static_cast<std::size_t>(ho) * wo;
    col_.resize(col_rows() * p);
    std::size_t row = 0;
    for (int ci = 0; ci < in.c; ++ci) {
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx, ++row) {
          Real* dst = col_.data() + row * p;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * st - pad + ky;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * st - pad + kx;
              dst[oy * wo + ox] = (iy >= 0 && iy < in.h && ix >= 0 && ix < in.w)
                                      ? in.at(s, ci, iy, ix)
                                      : Real(0);
            }
          }
        }
      }
    }
  }

  void col2im(Tensor4<Real>& grad_in, int s) const {
    const int kh = spec_.kernel_h, kw = spec_.kernel_w, st = spec_.stride, pad = spec_.padding;
    const int ho = spec_.out_shape.height, wo = spec_.out_shape.width;
    const std::size_t p = static_cast<std::size_t>(ho) * wo;
    std::size_t row = 0;
    for (int ci = 0; ci < grad_in.c; ++ci) {
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx, ++row) {
          const Real* src = dcol_.data() + row * p;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * st - pad + ky;
            if (iy < 0 || iy >= grad_in.h) continue;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * st - pad + kx;
              if (ix >= 0 && ix < grad_in.w) grad_in.at(s, ci, iy, ix) += src[oy * wo + ox];
            }
          }
        }
      }
    }
  }

  LayerSpec spec_;
  std::vector<Real> col_;
  std::vector<Real> dcol_;
};

template <typename Real>
class FcLayer final : public Layer<Real> {
 public:
  FcLayer(const LayerSpec& spec, const std::string& prefix, Rng& rng) : spec_(spec) {
    this->params_.emplace_back(prefix + ".weight",
                               std::vector<int>{spec.out_channels, spec.in_channels});
    fill_kaiming(this->params_[0].value, spec.in_channels, rng);
    if (spec.bias) this->params_.emplace_back(prefix + ".bias", std::vector<int>{spec.out_channels});
  }

  void forward(const Tensor4<Real>& in, Tensor4<Real>& out, Mode) override {
    const int k = spec_.in_channels, o = spec_.out_channels;
    out.reshape(in.n, o, 1, 1);
    const Real* weight = this->params_[0].value.data();
    for (int s = 0; s < in.n; ++s) {
      const Real* x = in.data.data() + s * in.sample_size();
      for (int j = 0; j < o; ++j) {
        const Real* wrow = weight + static_cast<std::size_t>(j) * k;
        Real acc = spec_.bias ? this->params_[1].value[j] : Real(0);
        for (int i = 0; i < k; ++i) acc += wrow[i] * x[i];
        out.data[static_cast<std::size_t>(s) * o + j] = acc;
      }
    }
  }

  void backward(const Tensor4<Real>& in, const Tensor4<Real>&, const Tensor4<Real>& grad_out,
                Tensor4<Real>& grad_in) override {
    const int k = spec_.in_channels, o = spec_.out_channels;
    auto& wp = this->params_[0];
    std::fill(wp.grad.begin(), wp.grad.end(), Real(0));
    if (spec_.bias) std::fill(this->params_[1].grad.begin(), this->params_[1].grad.end(), Real(0));
    grad_in.reshape(in.n, in.c, in.h, in.w);
    std::fill(grad_in.data.begin(), grad_in.data.end(), Real(0));
    for (int s = 0; s < in.n; ++s) {
      const Real* x = in.data.data() + s * in.sample_size();
      Real* dx = grad_in.data.data() + s * in.sample_size();
      for (int j = 0; j < o; ++j) {
        const Real g = grad_out.data[static_cast<std::size_t>(s) * o + j];
        if (spec_.bias) this->params_[1].grad[j] += g;
        Real* dw = wp.grad.data() + static_cast<std::size_t>(j) * k;
        const Real* wrow = wp.value.data() + static_cast<std::size_t>(j) * k;
        for (int i = 0; i < k; ++i) {
          dw[i] += g * x[i];
          dx[i] += g * wrow[i];
        }
      }
    }
  }

 private:
  LayerSpec spec_;
};

template <typename Real>
class BatchNormLayer final : public Layer<Real> {
 public:
  BatchNormLayer(const LayerSpec& spec, const std::string& prefix) : channels_(spec.out_channels) {
    this->params_.emplace_back(prefix + ".gamma", std::vector<int>{channels_});
    this->params_.emplace_back(prefix + ".beta", std::vector<int>{channels_});
    std::fill(this->params_[0].value.begin(), this->params_[0].value.end(), Real(1));
    this->buffers_.push_back({prefix + ".running_mean", {channels_},
                              std::vector<Real>(channels_, Real(0))});
    this->buffers_.push_back({prefix + ".running_var", {channels_},
                              std::vector<Real>(channels_, Real(1))});
  }

  void forward(const Tensor4<Real>& in, Tensor4<Real>& out, Mode mode) override {
    out.reshape(in.n, in.c, in.h, in.w);
    const std::size_t plane = in.plane_size();
    const double m = static_cast<double>(in.n) * plane;
    const auto& gamma = this->params_[0].value;
    const auto& beta = this->params_[1].value;
    auto& rmean = this->buffers_[0].value;
    auto& rvar = this->buffers_[1].value;
    if (mode == Mode::kTrain) {
      xhat_.reshape(in.n, in.c, in.h, in.w);
      inv_std_.assign(channels_, Real(0));
    }
    for (int ch = 0; ch < channels_; ++ch) {
      double mean, var;
      if (mode == Mode::kTrain) {
        double sum = 0;
        for (int s = 0; s < in.n; ++s)
          for (Real v : in.plane(s, ch)) sum += v;
        mean = sum / m;
        double sq = 0;
        for (int s = 0; s < in.n; ++s)
          for (Real v : in.plane(s, ch)) sq += (v - mean) * (v - mean);
        var = sq / m;
        const double unbiased = m > 1 ? var * m / (m - 1) : var;
        rmean[ch] = static_cast<Real>((1 - kBatchNormMomentum) * rmean[ch] + kBatchNormMomentum * mean);
        rvar[ch] = static_cast<Real>((1 - kBatchNormMomentum) * rvar[ch] + kBatchNormMomentum * unbiased);
      } else {
        mean = rmean[ch];
        var = rvar[ch];
      }
      const Real inv = static_cast<Real>(1.0 / std::sqrt(var + kBatchNormEps));
      const Real mu = static_cast<Real>(mean);
      if (mode == Mode::kTrain) inv_std_[ch] = inv;
      for (int s = 0; s < in.n; ++s) {
        const std::size_t base = in.index(s, ch, 0, 0);
        for (std::size_t q = 0; q < plane; ++q) {
          const Real xh = (in.data[base + q] - mu) * inv;
          if (mode == Mode::kTrain) xhat_.data[base + q] = xh;
          out.data[base + q] = gamma[ch] * xh + beta[ch];
        }
      }
    }
  }

  void backward(const Tensor4<Real>& in, const Tensor4<Real>&, const Tensor4<Real>& grad_out,
                Tensor4<Real>& grad_in) override {
    grad_in.reshape(in.n, in.c, in.h, in.w);
    const std::size_t plane = in.plane_size();
    const Real m = static_cast<Real>(static_cast<double>(in.n) * plane);
    auto& gp = this->params_[0];
    auto& bp = this->params_[1];
    for (int ch = 0; ch < channels_; ++ch) {
      Real dgamma = 0, dbeta = 0;
      for (int s = 0; s < in.n; ++s) {
        const std::size_t base = in.index(s, ch, 0, 0);
        for (std::size_t q = 0; q < plane; ++q) {
          dgamma += grad_out.data[base + q] * xhat_.data[base + q];
          dbeta += grad_out.data[base + q];
        }
      }
      gp.grad[ch] = dgamma;
      bp.grad[ch] = dbeta;
      const Real scale = gp.value[ch] * inv_std_[ch] / m;
      for (int s = 0; s < in.n; ++s) {
        const std::size_t base = in.index(s, ch, 0, 0);
        for (std::size_t q = 0; q < plane; ++q) {
          grad_in.data[base + q] =
              scale * (m * grad_out.data[base + q] - dbeta - xhat_.data[base + q] * dgamma);
        }
      }
    }
  }

 private:
  int channels_;
  Tensor4<Real> xhat_;
  std::vector<Real> inv_std_;
};

template <typename Real>
class ReluLayer final : public Layer<Real> {
 public:
  void forward(const Tensor4<Real>& in, Tensor4<Real>& out, Mode) override {
    out.reshape(in.n, in.c, in.h, in.w);
    for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = in.data[i] > Real(0) ? in.data[i] : Real(0);
  }
  void backward(const Tensor4<Real>& in, const Tensor4<Real>&, const Tensor4<Real>& grad_out,
                Tensor4<Real>& grad_in) override {
    grad_in.reshape(in.n, in.c, in.h, in.w);
    for (std::size_t i = 0; i < in.size(); ++i)
      grad_in.data[i] = in.data[i] > Real(0) ? grad_out.data[i] : Real(0);
  }
};

template <typename Real>
class MaxPoolLayer final : public Layer<Real> {
 public:
  explicit MaxPoolLayer(const LayerSpec& spec) : spec_(spec) {}

  void forward(const Tensor4<Real>& in, Tensor4<Real>& out, Mode) override {
    const int ho = spec_.out_shape.height, wo = spec_.out_shape.width;
    const int k = spec_.kernel_h, st = spec_.stride;
    out.reshape(in.n, in.c, ho, wo);
    argmax_.resize(out.size());
    std::size_t o = 0;
    for (int s = 0; s < in.n; ++s)
      for (int ch = 0; ch < in.c; ++ch)
        for (int oy = 0; oy < ho; ++oy)
          for (int ox = 0; ox < wo; ++ox, ++o) {
            std::size_t best = in.index(s, ch, oy * st, ox * st);
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const std::size_t idx = in.index(s, ch, oy * st + ky, ox * st + kx);
                if (in.data[idx] > in.data[best]) best = idx;
              }
            argmax_[o] = best;
            out.data[o] = in.data[best];
          }
  }

  void backward(const Tensor4<Real>& in, const Tensor4<Real>&, const Tensor4<Real>& grad_out,
                Tensor4<Real>& grad_in) override {
    grad_in.reshape(in.n, in.c, in.h, in.w);
    std::fill(grad_in.data.begin(), grad_in.data.end(), Real(0));
    for (std::size_t o = 0; o < grad_out.size(); ++o) grad_in.data[argmax_[o]] += grad_out.data[o];
  }

 private:
  LayerSpec spec_;
  std::vector<std::size_t> argmax_;
};

}  // namespace

template <typename Real>
LossResult<Real> compute_loss(const Tensor4<Real>& logits, std::span<const int> labels,
                              LossKind kind) {
  if (static_cast<std::size_t>(logits.n) != labels.size())
    throw StructuralError("label count does not match batch size");
  LossResult<Real> r;
  r.grad.reshape(logits.n, logits.c, logits.h, logits.w);
  const int classes = static_cast<int>(logits.sample_size());
  const double inv_n = 1.0 / logits.n;
  double total = 0;
  for (int s = 0; s < logits.n; ++s) {
    const Real* z = logits.data.data() + static_cast<std::size_t>(s) * classes;
    Real* g = r.grad.data.data() + static_cast<std::size_t>(s) * classes;
    const int y = labels[s];
    if (y < 0 || y >= classes) throw StructuralError("label out of range for classifier width");
    if (kind == LossKind::kSoftmaxCrossEntropy) {
      const double zmax = *std::max_element(z, z + classes);
      double denom = 0;
      for (int j = 0; j < classes; ++j) denom += std::exp(static_cast<double>(z[j]) - zmax);
      const double log_denom = std::log(denom);
      total += -(static_cast<double>(z[y]) - zmax - log_denom);
      for (int j = 0; j < classes; ++j) {
        const double p = std::exp(static_cast<double>(z[j]) - zmax - log_denom);
        g[j] = static_cast<Real>((p - (j == y ? 1.0 : 0.0)) * inv_n);
      }
    } else {
      for (int j = 0; j < classes; ++j) {
        const double diff = static_cast<double>(z[j]) - (j == y ? 1.0 : 0.0);
        total += 0.5 * diff * diff;
        g[j] = static_cast<Real>(diff * inv_n);
      }
    }
  }
  r.loss = total * inv_n;
  return r;
}

template <typename Real>
Tensor4<Real> softmax(const Tensor4<Real>& logits) {
  Tensor4<Real> p = logits;
  const std::size_t classes = logits.sample_size();
  for (int s = 0; s < logits.n; ++s) {
    Real* z = p.data.data() + s * classes;
    const double zmax = *std::max_element(z, z + classes);
    double denom = 0;
    for (std::size_t j = 0; j < classes; ++j) denom += std::exp(static_cast<double>(z[j]) - zmax);
    for (std::size_t j = 0; j < classes; ++j)
      z[j] = static_cast<Real>(std::exp(static_cast<double>(z[j]) - zmax) / denom);
  }
  return p;
}

template <typename Real>
Network<Real>::Network(const arch::ArchTemplate& tmpl, std::uint64_t seed) : tmpl_(tmpl) {
  Rng rng(seed);
  const auto& specs = tmpl_.layers();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i);
    switch (specs[i].kind) {
      case LayerKind::kConv:
        layers_.push_back(std::make_unique<ConvLayer<Real>>(specs[i], prefix, rng));
        break;
      case LayerKind::kFc:
      case LayerKind::kClassifier:
        layers_.push_back(std::make_unique<FcLayer<Real>>(specs[i], prefix, rng));
        break;
      case LayerKind::kBatchNorm:
        layers_.push_back(std::make_unique<BatchNormLayer<Real>>(specs[i], prefix));
        break;
      case LayerKind::kActivation:
        layers_.push_back(std::make_unique<ReluLayer<Real>>());
        break;
      case LayerKind::kPool:
        layers_.push_back(std::make_unique<MaxPoolLayer<Real>>(specs[i]));
        break;
    }
  }
  for (std::size_t idx : tmpl_.prunable_slots()) {
    if (specs[idx].kind != LayerKind::kConv) continue;
    std::size_t after = idx;
    while (after + 1 < specs.size() && (specs[after + 1].kind == LayerKind::kBatchNorm ||
                                         specs[after + 1].kind == LayerKind::kActivation))
      ++after;
    capture_slots_.push_back(idx);
    capture_after_.push_back(after);
  }
  acts_.resize(layers_.size() + 1);
  grads_.resize(layers_.size() + 1);
}

template <typename Real>
const Tensor4<Real>& Network<Real>::forward(const Tensor4<Real>& batch, Mode mode, bool capture) {
  const arch::Shape3& in = tmpl_.input_shape();
  if (batch.c != in.channels || batch.h != in.height || batch.w != in.width)
    throw StructuralError("input batch shape (" + std::to_string(batch.c) + "x" +
                          std::to_string(batch.h) + "x" + std::to_string(batch.w) +
                          ") does not match template input (" + std::to_string(in.channels) +
                          "x" + std::to_string(in.height) + "x" + std::to_string(in.width) + ")");
  acts_[0] = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->forward(acts_[i], acts_[i + 1], mode);
  captured_.clear();
  if (capture)
    for (std::size_t after : capture_after_) captured_.push_back(acts_[after + 1]);
  return acts_.back();
}

template <typename Real>
void Network<Real>::backward(const Tensor4<Real>& grad_logits) {
  if (!grad_logits.same_shape(acts_.back()))
    throw StructuralError("gradient shape does not match the last forward output");
  grads_.back() = grad_logits;
  for (std::size_t i = layers_.size(); i-- > 0;)
    layers_[i]->backward(acts_[i], acts_[i + 1], grads_[i + 1], grads_[i]);
}

template <typename Real>
std::vector<Param<Real>*> Network<Real>::params() {
  std::vector<Param<Real>*> out;
  for (auto& l : layers_)
    for (auto& p : l->params()) out.push_back(&p);
  return out;
}

template <typename Real>
std::vector<Buffer<Real>*> Network<Real>::buffers() {
  std::vector<Buffer<Real>*> out;
  for (auto& l : layers_)
    for (auto& b : l->buffers()) out.push_back(&b);
  return out;
}

template <typename Real>
std::size_t Network<Real>::param_count() {
  std::size_t n = 0;
  for (auto* p : params()) n += p->value.size();
  return n;
}

template <typename Real>
void Network<Real>::zero_velocity() {
  for (auto* p : params()) std::fill(p->velocity.begin(), p->velocity.end(), Real(0));
}

template struct Param<float>;
template struct Param<double>;
template class Network<float>;
template class Network<double>;
template LossResult<float> compute_loss(const Tensor4<float>&, std::span<const int>, LossKind);
template LossResult<double> compute_loss(const Tensor4<double>&, std::span<const int>, LossKind);
template Tensor4<float> softmax(const Tensor4<float>&);
template Tensor4<double> softmax(const Tensor4<double>&);

}  // namespace chanprune::nn
