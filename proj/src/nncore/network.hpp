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

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "archspec/archspec.hpp"
#include "nncore/tensor.hpp"

namespace chanprune::nn {

// A trainable array plus its gradient and SGD momentum buffer.
template <typename Real>
struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<Real> value;
  std::vector<Real> grad;
  std::vector<Real> velocity;

  Param(std::string n, std::vector<int> s);
};

// Non-trainable state saved with the model (batchnorm running statistics).
template <typename Real>
struct Buffer {
  std::string name;
  std::vector<int> shape;
  std::vector<Real> value;
};

enum class Mode { kTrain, kEval };

template <typename Real>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual void forward(const Tensor4<Real>& in, Tensor4<Real>& out, Mode mode) = 0;
  // Writes dL/d(in) and overwrites the gradients of this layer's parameters.
  virtual void backward(const Tensor4<Real>& in, const Tensor4<Real>& out,
                        const Tensor4<Real>& grad_out, Tensor4<Real>& grad_in) = 0;
  std::vector<Param<Real>>& params() { return params_; }
  std::vector<Buffer<Real>>& buffers() { return buffers_; }

 protected:
  std::vector<Param<Real>> params_;
  std::vector<Buffer<Real>> buffers_;
};

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

enum class LossKind { kSoftmaxCrossEntropy, kSquaredError };

template <typename Real>
struct LossResult {
  double loss = 0.0;
  Tensor4<Real> grad;  // dL/dlogits
};

// Mean over the batch. Squared error compares logits against one-hot targets
// with a 1/2 factor.
template <typename Real>
LossResult<Real> compute_loss(const Tensor4<Real>& logits, std::span<const int> labels,
                              LossKind kind = LossKind::kSoftmaxCrossEntropy);

template <typename Real>
Tensor4<Real> softmax(const Tensor4<Real>& logits);

template <typename Real>
class Network {
 public:
  // Builds layers for a concrete template and draws Kaiming-normal fan-in
  // weights from `seed`; biases and batchnorm shift start at zero.
  Network(const arch::ArchTemplate& tmpl, std::uint64_t seed);

  const arch::ArchTemplate& arch() const { return tmpl_; }

  // Logits of shape (n, classes, 1, 1). With `capture`, the post-activation
  // output of every prunable conv layer is stored and readable via captured().
  const Tensor4<Real>& forward(const Tensor4<Real>& batch, Mode mode, bool capture = false);
  const std::vector<Tensor4<Real>>& captured() const { return captured_; }
  // Layer indices of the conv slots captured by forward(), in slot order.
  const std::vector<std::size_t>& capture_slots() const { return capture_slots_; }

  // Backpropagates from dL/dlogits through the activations of the last forward.
  void backward(const Tensor4<Real>& grad_logits);

  std::vector<Param<Real>*> params();
  std::vector<Buffer<Real>*> buffers();
  std::size_t param_count();

  void zero_velocity();

 private:
  arch::ArchTemplate tmpl_;
  std::vector<std::unique_ptr<Layer<Real>>> layers_;
  std::vector<Tensor4<Real>> acts_;  // acts_[i] is the input of layer i
  std::vector<Tensor4<Real>> grads_;
  std::vector<std::size_t> capture_slots_;
  std::vector<std::size_t> capture_after_;  // layer whose output is captured
  std::vector<Tensor4<Real>> captured_;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace chanprune::nn
