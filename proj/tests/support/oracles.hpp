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
#include <string>
#include <vector>

#include "cluster/dbscan.hpp"
#include "common/rng.hpp"

namespace chanprune::testing {

// Textbook DBSCAN by exhaustive reachability: clusters are the connected
// components of core points, a border point joins the adjacent component with
// the smallest core index, everything else is noise.
std::vector<int> reference_dbscan(const std::vector<double>& d, std::size_t n, double epsilon,
                                  int min_pts);

// Equal up to a bijective relabelling of cluster ids; noise must match exactly.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b);

struct DistanceCase {
  std::string name;
  std::vector<double> d;
  std::size_t n = 0;
  double epsilon = 0.1;
  int min_pts = 2;
};

// Random symmetric matrix with zero diagonal and entries in [0, 1]. Styles
// rotate between clustered points, raw uniform entries and coarse quantised
// entries (so ties at exactly epsilon occur).
DistanceCase random_distance_case(Rng& rng, int index, std::size_t max_n = 12);

std::vector<DistanceCase> handcrafted_distance_cases();

// d = 1 - |cos| between random vectors, as produced by the feature pipeline.
std::vector<double> cosine_distances(const std::vector<std::vector<double>>& vectors);

}  // namespace chanprune::testing
