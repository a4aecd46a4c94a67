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
#include <vector>

namespace chanprune::cluster {

// Neighbourhood radius on d = 1 - |cos| and the minimum neighbourhood size,
// counting the point itself.
struct NeighborhoodParams {
  double epsilon = 0.02;
  int min_pts = 5;

  void validate() const;
};

inline constexpr int kNoise = -1;

struct ClusterAssignment {
  std::vector<int> labels;  // cluster id >= 0, or kNoise
  std::vector<bool> core;

  int num_clusters() const;
  int num_noise() const;
};

// DBSCAN over a precomputed n x n distance matrix (row-major). Seeds are
// visited in ascending index order and neighbourhoods expand breadth-first in
// ascending order, so a border point reachable from several clusters joins the
// one whose smallest core index is lowest.
// Throws StructuralError for a malformed matrix (wrong size, asymmetry above
// 1e-9, non-zero diagonal, entries outside [0, 1]).
ClusterAssignment dbscan(std::span<const double> distances, std::size_t n,
                         const NeighborhoodParams& params);

// Clusters plus noise channels: the retained width of a layer.
int coarse_channel_count(const ClusterAssignment& assignment);

}  // namespace chanprune::cluster
