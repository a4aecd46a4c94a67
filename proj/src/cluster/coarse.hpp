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
#include <vector>

#include <json.hpp>

#include "archspec/archspec.hpp"
#include "cluster/dbscan.hpp"
#include "featstats/featstats.hpp"
#include "nncore/network.hpp"

namespace chanprune::cluster {

struct LayerCoarseReport {
  std::size_t slot = 0;
  std::size_t layer_index = 0;
  int original = 0;
  int clusters = 0;
  int noise = 0;
  int coarse = 0;

  bool operator==(const LayerCoarseReport&) const = default;
};

struct CoarseResult {
  NeighborhoodParams params;
  arch::NetworkStructure structure;  // the coarse structure C'
  std::vector<LayerCoarseReport> layers;
  std::vector<feat::SimilarityMatrix> similarities;  // per conv slot, slot order

  bool operator==(const CoarseResult& o) const {
    return params.epsilon == o.params.epsilon && params.min_pts == o.params.min_pts &&
           structure == o.structure && layers == o.layers;
  }
};

// Clusters one layer's captured activations into a retained width.
LayerCoarseReport cluster_layer(const feat::ChannelMeanMaps& maps, const NeighborhoodParams& params,
                                feat::SimilarityMatrix* similarity_out = nullptr);

// Streams `samples` through `model` (eval mode) in batches, captures every
// prunable conv layer, and clusters each one. Slots without feature maps
// (hidden fc layers) keep their original width.
CoarseResult coarse_prune(const arch::ArchTemplate& tmpl, nn::Network<float>& model,
                          const nn::Tensor4<float>& samples, const NeighborhoodParams& params,
                          int batch_size = 64);

nlohmann::json coarse_report_json(const CoarseResult& result);
CoarseResult coarse_report_from_json(const nlohmann::json& j);

}  // namespace chanprune::cluster
