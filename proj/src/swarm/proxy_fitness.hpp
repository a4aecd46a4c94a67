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
#include <map>
#include <mutex>
#include <vector>

#include "archspec/archspec.hpp"
#include "nncore/dataset.hpp"
#include "nncore/trainer.hpp"
#include "swarm/swarm.hpp"

namespace chanprune::swarm {

// Trains `structure` from a fresh initialization for `proxy_epochs` using
// `recipe` (its lr drops rescaled to the shorter horizon) and returns the best
// test accuracy seen across those epochs. Initialization and shuffling seeds
// derive from `seed` and the structure, so equal inputs give equal fitness.
double proxy_fitness(const NetworkStructure& structure, const arch::ArchTemplate& tmpl,
                     const nn::Dataset& train_set, const nn::Dataset& test_set,
                     const nn::TrainConfig& recipe, int proxy_epochs, std::uint64_t seed);

// Memoizing evaluator over proxy_fitness; safe for concurrent use. The
// datasets are referenced, not copied, and must outlive the evaluator.
class ProxyFitnessEvaluator final : public FitnessEvaluator {
 public:
  ProxyFitnessEvaluator(arch::ArchTemplate tmpl, const nn::Dataset& train_set,
                        const nn::Dataset& test_set, nn::TrainConfig recipe, int proxy_epochs,
                        std::uint64_t seed);

  double evaluate(const NetworkStructure& structure) override;

  // Number of distinct structures actually trained.
  std::size_t trainings() const;

 private:
  arch::ArchTemplate tmpl_;
  const nn::Dataset& train_;
  const nn::Dataset& test_;
  nn::TrainConfig recipe_;
  int proxy_epochs_;
  std::uint64_t seed_;
  mutable std::mutex mu_;
  std::map<std::vector<int>, double> cache_;
};

}  // namespace chanprune::swarm
