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
#include <functional>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "nncore/dataset.hpp"
#include "nncore/network.hpp"

namespace chanprune::nn {

struct LrDrop {
  double epoch_fraction = 0.5;  // in (0, 1)
  double factor = 10.0;         // > 1
};

// Momentum SGD with an L2 term and step learning-rate drops at fixed
// fractions of the epoch budget.
struct TrainConfig {
  double initial_lr = 0.1;
  std::vector<LrDrop> lr_drops = {{0.5, 10.0}, {0.75, 10.0}};
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int epochs = 160;
  int batch_size = 128;
  std::uint64_t seed = 0;

  void validate() const;
  double lr_for_epoch(int epoch) const;
};

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double test_acc = 0.0;

  bool operator==(const EpochStats&) const = default;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Trains in place; `test` may be null, in which case test_acc is NaN.
// Throws NumericError naming the epoch and batch when the loss is not finite.
std::vector<EpochStats> train(Network<float>& net, const Dataset& train_set, const Dataset* test,
                              const TrainConfig& config, const EpochCallback& on_epoch = {});

// v <- momentum * v - lr * (grad + weight_decay * w);  w <- w + v
template <typename Real>
void sgd_step(Network<Real>& net, double lr, double momentum, double weight_decay);

std::vector<int> predict(Network<float>& net, const Dataset& data, int batch_size = 256);
double accuracy(std::span<const int> predictions, std::span<const int> labels);
double evaluate(Network<float>& net, const Dataset& data, int batch_size = 256);

// Fisher-Yates permutation of [0, n) drawn from `rng`.
std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

// CSV with header `epoch,lr,train_loss,test_acc`.
std::string trace_csv(const std::vector<EpochStats>& trace);

}  // namespace chanprune::nn
