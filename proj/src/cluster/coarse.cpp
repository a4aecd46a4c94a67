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

#include "cluster/coarse.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace chanprune::cluster {

LayerCoarseReport cluster_layer(const feat::ChannelMeanMaps& maps, const NeighborhoodParams& params,
                                feat::SimilarityMatrix* similarity_out) {
  LayerCoarseReport r;
  r.layer_index = maps.layer_index;
  r.original = maps.channels;
  if (maps.channels == 1) {
    r.noise = 1;
    r.coarse = 1;
    return r;
  }
  const auto sim = feat::similarity(maps);
  const auto assignment = dbscan(feat::to_distances(sim), static_cast<std::size_t>(sim.size), params);
  r.clusters = assignment.num_clusters();
  r.noise = assignment.num_noise();
  r.coarse = coarse_channel_count(assignment);
  if (similarity_out) *similarity_out = sim;
  return r;
}

CoarseResult coarse_prune(const arch::ArchTemplate& tmpl, nn::Network<float>& model,
                          const nn::Tensor4<float>& samples, const NeighborhoodParams& params,
                          int batch_size) {
  params.validate();
  if (!(model.arch() == tmpl))
    throw StructuralError("model architecture does not match the template being pruned");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");

  const auto& conv_slots = model.capture_slots();
  std::vector<feat::MeanMapAccumulator> acc(conv_slots.size());
  for (int start = 0; start < samples.n; start += batch_size) {
    const int count = std::min(batch_size, samples.n - start);
    nn::Tensor4<float> batch(count, samples.c, samples.h, samples.w);
    std::copy_n(samples.data.begin() + start * samples.sample_size(), batch.size(), batch.data.begin());
    model.forward(batch, nn::Mode::kEval, /*capture=*/true);
    for (std::size_t k = 0; k < conv_slots.size(); ++k) acc[k].add(model.captured()[k]);
  }

  CoarseResult out;
  out.params = params;
  out.structure = tmpl.original_structure();
  const auto& slots = tmpl.prunable_slots();
  for (std::size_t l = 0; l < slots.size(); ++l) {
    const auto it = std::find(conv_slots.begin(), conv_slots.end(), slots[l]);
    LayerCoarseReport r;
    if (it == conv_slots.end()) {
      r.layer_index = slots[l];
      r.original = r.coarse = r.noise = out.structure[l];
    } else {
      const auto k = static_cast<std::size_t>(it - conv_slots.begin());
      feat::SimilarityMatrix sim;
      r = cluster_layer(acc[k].finish(slots[l]), params, &sim);
      if (sim.size > 0) out.similarities.push_back(std::move(sim));
    }
    r.slot = l;
    out.structure.channels[l] = r.coarse;
    out.layers.push_back(r);
  }
  return out;
}

nlohmann::json coarse_report_json(const CoarseResult& result) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& r : result.layers) {
    layers.push_back({{"slot", r.slot},
                      {"layer_index", r.layer_index},
                      {"original_channels", r.original},
                      {"clusters", r.clusters},
                      {"noise", r.noise},
                      {"coarse_channels", r.coarse}});
  }
  return {{"epsilon", result.params.epsilon},
          {"min_pts", result.params.min_pts},
          {"structure", result.structure.channels},
          {"layers", layers}};
}

CoarseResult coarse_report_from_json(const nlohmann::json& j) {
  CoarseResult r;
  r.params.epsilon = j.at("epsilon").get<double>();
  r.params.min_pts = j.at("min_pts").get<int>();
  r.structure.channels = j.at("structure").get<std::vector<int>>();
  for (const auto& l : j.at("layers")) {
    r.layers.push_back({l.at("slot").get<std::size_t>(), l.at("layer_index").get<std::size_t>(),
                        l.at("original_channels").get<int>(), l.at("clusters").get<int>(),
                        l.at("noise").get<int>(), l.at("coarse_channels").get<int>()});
  }
  return r;
}

}  // namespace chanprune::cluster
