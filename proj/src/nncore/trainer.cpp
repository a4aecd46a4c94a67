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

#include "nncore/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace chanprune::nn {

void TrainConfig::validate() const {
  if (!(initial_lr > 0)) throw InvalidArgument("initial_lr must be > 0");
  double prev = 0.0;
  for (const LrDrop& d : lr_drops) {
    if (!(d.epoch_fraction > prev && d.epoch_fraction < 1.0))
      throw InvalidArgument("lr drop fractions must lie in (0, 1) and strictly increase");
    if (!(d.factor > 1.0)) throw InvalidArgument("lr drop factors must be > 1");
    prev = d.epoch_fraction;
  }
  if (momentum < 0 || momentum >= 1) throw InvalidArgument("momentum must lie in [0, 1)");
  if (weight_decay < 0) throw InvalidArgument("weight_decay must be >= 0");
  if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
}

double TrainConfig::lr_for_epoch(int epoch) const {
  double lr = initial_lr;
  for (const LrDrop& d : lr_drops)
    if (epoch >= d.epoch_fraction * epochs) lr /= d.factor;
  return lr;
}

std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  return idx;
}

template <typename Real>
void sgd_step(Network<Real>& net, double lr, double momentum, double weight_decay) {
  const Real mu = static_cast<Real>(momentum);
  const Real eta = static_cast<Real>(lr);
  const Real lambda = static_cast<Real>(weight_decay);
  for (Param<Real>* p : net.params()) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      p->velocity[i] = mu * p->velocity[i] - eta * (p->grad[i] + lambda * p->value[i]);
      p->value[i] += p->velocity[i];
    }
  }
}

template void sgd_step(Network<float>&, double, double, double);
template void sgd_step(Network<double>&, double, double, double);

std::vector<int> predict(Network<float>& net, const Dataset& data, int batch_size) {
  std::vector<int> out;
  out.reserve(data.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(data.size(), start + static_cast<std::size_t>(batch_size));
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor4<float>& logits = net.forward(data.gather_images(idx), Mode::kEval);
    const std::size_t classes = logits.sample_size();
    for (int s = 0; s < logits.n; ++s) {
      const float* z = logits.data.data() + s * classes;
      out.push_back(static_cast<int>(std::max_element(z, z + classes) - z));
    }
  }
  return out;
}

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size())
    throw InvalidArgument("prediction and label counts differ");
  if (labels.empty()) throw InvalidArgument("accuracy of an empty set is undefined");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double evaluate(Network<float>& net, const Dataset& data, int batch_size) {
  if (data.empty()) throw InvalidArgument("evaluation set is empty");
  const auto preds = predict(net, data, batch_size);
  return accuracy(preds, data.labels);
}

std::vector<EpochStats> train(Network<float>& net, const Dataset& train_set, const Dataset* test,
                              const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw InvalidArgument("training set is empty");
  Rng rng(mix_seed(config.seed, 0x7261696e));
  std::vector<EpochStats> trace;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.lr_for_epoch(epoch);
    const auto order = permutation(train_set.size(), rng);
    double loss_sum = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::span<const std::size_t> idx(order.data() + start, end - start);
      const auto labels = train_set.gather_labels(idx);
      const Tensor4<float>& logits = net.forward(train_set.gather_images(idx), Mode::kTrain);
      const auto loss = compute_loss(logits, labels);
      if (!std::isfinite(loss.loss))
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) +
                           ", batch index " + std::to_string(batch_index));
      net.backward(loss.grad);
      sgd_step(net, lr, config.momentum, config.weight_decay);
      loss_sum += loss.loss * static_cast<double>(idx.size());
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.train_loss = loss_sum / static_cast<double>(train_set.size());
    stats.test_acc = test ? evaluate(net, *test) : std::numeric_limits<double>::quiet_NaN();
    trace.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return trace;
}

std::string trace_csv(const std::vector<EpochStats>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,lr,train_loss,test_acc\n";
  for (const auto& e : trace) os << e.epoch << ',' << e.lr << ',' << e.train_loss << ',' << e.test_acc << '\n';
  return os.str();
}

}  // namespace chanprune::nn
