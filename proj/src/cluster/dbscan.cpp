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

#include "cluster/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "common/error.hpp"

namespace chanprune::cluster {

namespace {

constexpr int kUnvisited = -2;
constexpr double kTolerance = 1e-9;

void check_matrix(std::span<const double> d, std::size_t n) {
  if (n == 0) throw StructuralError("distance matrix is empty");
  if (d.size() != n * n)
    throw StructuralError("distance matrix has " + std::to_string(d.size()) +
                          " entries, expected " + std::to_string(n * n));
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(d[i * n + i]) > kTolerance)
      throw StructuralError("distance matrix diagonal is non-zero at " + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) {
      const double v = d[i * n + j];
      if (!(v >= -kTolerance && v <= 1.0 + kTolerance))
        throw StructuralError("distance (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") outside [0, 1]");
      if (std::abs(v - d[j * n + i]) > kTolerance)
        throw StructuralError("distance matrix is asymmetric at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
    }
  }
}

}  // namespace

void NeighborhoodParams::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in (0, 1]");
  if (min_pts < 1) throw InvalidArgument("min_pts must be >= 1");
}

int ClusterAssignment::num_clusters() const {
  int m = -1;
  for (int l : labels) m = std::max(m, l);
  return m + 1;
}

int ClusterAssignment::num_noise() const {
  return static_cast<int>(std::count(labels.begin(), labels.end(), kNoise));
}

ClusterAssignment dbscan(std::span<const double> distances, std::size_t n,
                         const NeighborhoodParams& params) {
  params.validate();
  check_matrix(distances, n);

  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (distances[i * n + j] <= params.epsilon) neighbors[i].push_back(j);

  ClusterAssignment out;
  out.core.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.core[i] = neighbors[i].size() >= static_cast<std::size_t>(params.min_pts);
  out.labels.assign(n, kUnvisited);

  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] != kUnvisited) continue;
    if (!out.core[i]) {
      out.labels[i] = kNoise;
      continue;
    }
    out.labels[i] = cluster;
    std::deque<std::size_t> frontier(neighbors[i].begin(), neighbors[i].end());
    while (!frontier.empty()) {
      const std::size_t q = frontier.front();
      frontier.pop_front();
      if (out.labels[q] == kNoise) out.labels[q] = cluster;
      if (out.labels[q] != kUnvisited) continue;
      out.labels[q] = cluster;
      if (out.core[q]) frontier.insert(frontier.end(), neighbors[q].begin(), neighbors[q].end());
    }
    ++cluster;
  }
  return out;
}

int coarse_channel_count(const ClusterAssignment& assignment) {
  return assignment.num_clusters() + assignment.num_noise();
}

}  // namespace chanprune::cluster
