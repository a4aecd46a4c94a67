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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nncore/tensor.hpp"

namespace chanprune::feat {

// Per-channel feature maps averaged over the sampled images of one layer.
struct ChannelMeanMaps {
  std::size_t layer_index = 0;
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;  // channels x height x width, row-major

  std::size_t map_size() const { return static_cast<std::size_t>(height) * width; }
  std::span<const double> map(int channel) const {
    return {values.data() + channel * map_size(), map_size()};
  }
};

// Running sum over captured batches; lets callers stream samples through a
// network without holding all activations at once.
class MeanMapAccumulator {
 public:
  template <typename Real>
  void add(const nn::Tensor4<Real>& captured);
  std::size_t samples() const { return samples_; }
  // Throws InvalidArgument when no sample has been added.
  ChannelMeanMaps finish(std::size_t layer_index = 0) const;

 private:
  int c_ = 0, h_ = 0, w_ = 0;
  std::size_t samples_ = 0;
  std::vector<double> sum_;
};

template <typename Real>
ChannelMeanMaps mean_maps(const nn::Tensor4<Real>& captured, std::size_t layer_index = 0);

enum class SimilarityMetric { kAbsCosine };

struct SimilarityMatrix {
  int size = 0;
  SimilarityMetric metric = SimilarityMetric::kAbsCosine;
  std::vector<double> entries;  // size x size

  double operator()(int i, int j) const { return entries[static_cast<std::size_t>(i) * size + j]; }
};

// |cos| between flattened mean maps. Each pair is computed once and mirrored.
// A zero-norm channel has similarity 0 to every other channel and 1 to itself.
SimilarityMatrix similarity(const ChannelMeanMaps& maps);

// d = 1 - similarity with an exact zero diagonal, as consumed by clustering.
std::vector<double> to_distances(const SimilarityMatrix& sim);

std::string similarity_csv(const SimilarityMatrix& sim);

}  // namespace chanprune::feat
