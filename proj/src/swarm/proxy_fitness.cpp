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

#include "swarm/proxy_fitness.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "nncore/network.hpp"

namespace chanprune::swarm {

double proxy_fitness(const NetworkStructure& structure, const arch::ArchTemplate& tmpl,
                     const nn::Dataset& train_set, const nn::Dataset& test_set,
                     const nn::TrainConfig& recipe, int proxy_epochs, std::uint64_t seed) {
  if (proxy_epochs < 1) throw InvalidArgument("proxy_epochs must be >= 1");
  if (test_set.empty()) throw InvalidArgument("proxy fitness needs a non-empty test set");
  const std::uint64_t s = mix_seed(seed, fnv1a64(arch::to_string(structure)));
  nn::Network<float> net(tmpl.instantiate(structure), mix_seed(s, 1));
  nn::TrainConfig cfg = recipe;
  cfg.epochs = proxy_epochs;
  cfg.seed = mix_seed(s, 2);
  double best = 0.0;
  nn::train(net, train_set, &test_set, cfg,
            [&](const nn::EpochStats& e) { best = std::max(best, e.test_acc); });
  return best;
}

ProxyFitnessEvaluator::ProxyFitnessEvaluator(arch::ArchTemplate tmpl, const nn::Dataset& train_set,
                                             const nn::Dataset& test_set, nn::TrainConfig recipe,
                                             int proxy_epochs, std::uint64_t seed)
    : tmpl_(std::move(tmpl)),
      train_(train_set),
      test_(test_set),
      recipe_(std::move(recipe)),
      proxy_epochs_(proxy_epochs),
      seed_(seed) {}

double ProxyFitnessEvaluator::evaluate(const NetworkStructure& structure) {
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(structure.channels); it != cache_.end()) return it->second;
  }
  const double f = proxy_fitness(structure, tmpl_, train_, test_, recipe_, proxy_epochs_, seed_);
  std::lock_guard lock(mu_);
  cache_.emplace(structure.channels, f);
  return f;
}

std::size_t ProxyFitnessEvaluator::trainings() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

}  // namespace chanprune::swarm
