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

#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "archspec/archspec.hpp"
#include "cluster/coarse.hpp"
#include "cluster/dbscan.hpp"
#include "common/error.hpp"
#include "nncore/network.hpp"
#include "oracles.hpp"

using namespace chanprune;
using namespace chanprune::cluster;
using chanprune::testing::reference_dbscan;
using chanprune::testing::same_partition;

namespace {

std::vector<double> filled(std::size_t n, double v) {
  std::vector<double> d(n * n, v);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0.0;
  return d;
}

std::vector<int> run(const chanprune::testing::DistanceCase& c) {
  return dbscan(c.d, c.n, {c.epsilon, c.min_pts}).labels;
}

// Three groups of sizes 4, 3, 5; intra distance 0.01, inter distance 0.5.
std::vector<double> three_groups(std::size_t& n) {
  const std::vector<int> group = {0, 1, 2, 0, 2, 1, 0, 2, 2, 1, 0, 2};
  n = group.size();
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = i == j ? 0.0 : (group[i] == group[j] ? 0.01 : 0.5);
  return d;
}

}  // namespace

TEST_CASE("degenerate matrices") {
  const auto same = dbscan(filled(6, 0.0), 6, {0.1, 3});
  CHECK(same.num_clusters() == 1);
  CHECK(same.num_noise() == 0);
  CHECK(coarse_channel_count(same) == 1);
  const auto far = dbscan(filled(6, 1.0), 6, {0.1, 2});
  CHECK(far.num_clusters() == 0);
  CHECK(far.num_noise() == 6);
  CHECK(coarse_channel_count(far) == 6);
}

TEST_CASE("two dense groups and an outlier") {
  const auto cases = chanprune::testing::handcrafted_distance_cases();
  const auto it = std::find_if(cases.begin(), cases.end(), [](const auto& c) { return c.name == "two-groups-outlier"; });
  REQUIRE(it != cases.end());
  const auto a = dbscan(it->d, it->n, {it->epsilon, it->min_pts});
  CHECK(a.num_clusters() == 2);
  CHECK(a.num_noise() == 1);
  CHECK(a.labels[7] == kNoise);
  CHECK(coarse_channel_count(a) == 3);
  CHECK(same_partition(a.labels, reference_dbscan(it->d, it->n, it->epsilon, it->min_pts)));
}

TEST_CASE("handcrafted cases agree with the reference") {
  for (const auto& c : chanprune::testing::handcrafted_distance_cases()) {
    INFO(c.name);
    CHECK(same_partition(run(c), reference_dbscan(c.d, c.n, c.epsilon, c.min_pts)));
  }
}

TEST_CASE("shared border goes to the earlier cluster") {
  const auto cases = chanprune::testing::handcrafted_distance_cases();
  const auto& c = *std::find_if(cases.begin(), cases.end(), [](const auto& x) { return x.name == "shared-border"; });
  const auto a = dbscan(c.d, c.n, {c.epsilon, c.min_pts});
  CHECK_FALSE(a.core[2]);
  CHECK(a.labels[2] == a.labels[1]);
  CHECK(a.labels[2] != a.labels[3]);
}

TEST_CASE("random matrices agree with the reference") {
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto c = chanprune::testing::random_distance_case(rng, i);
    INFO(c.name);
    CHECK(same_partition(run(c), reference_dbscan(c.d, c.n, c.epsilon, c.min_pts)));
  }
}

TEST_CASE("core flags follow the neighbourhood count") {
  Rng rng(12);
  for (int i = 0; i < 50; ++i) {
    const auto c = chanprune::testing::random_distance_case(rng, i);
    const auto a = dbscan(c.d, c.n, {c.epsilon, c.min_pts});
    for (std::size_t p = 0; p < c.n; ++p) {
      int count = 0;
      for (std::size_t q = 0; q < c.n; ++q) count += c.d[p * c.n + q] <= c.epsilon;
      CHECK(a.core[p] == (count >= c.min_pts));
      if (a.core[p]) CHECK(a.labels[p] >= 0);
    }
    const int k = coarse_channel_count(a);
    CHECK(k >= 1);
    CHECK(k <= static_cast<int>(c.n));
  }
}

TEST_CASE("channel permutation leaves the coarse count unchanged") {
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const auto c = chanprune::testing::random_distance_case(rng, i);
    std::vector<std::size_t> perm(c.n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t k = c.n; k > 1; --k) std::swap(perm[k - 1], perm[rng.uniform_index(k)]);
    std::vector<double> d(c.n * c.n);
    for (std::size_t p = 0; p < c.n; ++p)
      for (std::size_t q = 0; q < c.n; ++q) d[p * c.n + q] = c.d[perm[p] * c.n + perm[q]];
    CHECK(coarse_channel_count(dbscan(d, c.n, {c.epsilon, c.min_pts})) ==
          coarse_channel_count(dbscan(c.d, c.n, {c.epsilon, c.min_pts})));
  }
}

TEST_CASE("three well separated groups: counts fall as epsilon grows") {
  std::size_t n = 0;
  const auto d = three_groups(n);
  int prev = static_cast<int>(n) + 1;
  for (double eps : {0.005, 0.009, 0.02, 0.3, 0.49}) {
    const int k = coarse_channel_count(dbscan(d, n, {eps, 3}));
    CHECK(k <= prev);
    prev = k;
  }
  CHECK(coarse_channel_count(dbscan(d, n, {0.005, 3})) == 12);
  CHECK(coarse_channel_count(dbscan(d, n, {0.3, 3})) == 3);
  CHECK(coarse_channel_count(dbscan(d, n, {0.6, 3})) == 1);
}

TEST_CASE("malformed matrices and parameters") {
  auto d = filled(3, 0.5);
  d[1] += 1e-8;
  CHECK_THROWS_AS(dbscan(d, 3, {0.1, 2}), StructuralError);
  d = filled(3, 0.5);
  d[1] += 1e-12;
  CHECK_NOTHROW(dbscan(d, 3, {0.1, 2}));
  d = filled(3, 0.5);
  d[0] = 0.1;
  CHECK_THROWS_AS(dbscan(d, 3, {0.1, 2}), StructuralError);
  d = filled(3, 1.5);
  CHECK_THROWS_AS(dbscan(d, 3, {0.1, 2}), StructuralError);
  CHECK_THROWS_AS(dbscan(filled(3, 0.5), 4, {0.1, 2}), StructuralError);
  CHECK_THROWS_AS(dbscan(filled(3, 0.5), 3, {0.0, 2}), InvalidArgument);
  CHECK_THROWS_AS(dbscan(filled(3, 0.5), 3, {1.5, 2}), InvalidArgument);
  CHECK_THROWS_AS(dbscan(filled(3, 0.5), 3, {0.1, 0}), InvalidArgument);
}

TEST_CASE("single-channel layer keeps one channel") {
  feat::ChannelMeanMaps m;
  m.channels = 1;
  m.height = m.width = 2;
  m.values = {1, 2, 3, 4};
  const auto r = cluster_layer(m, {0.02, 5});
  CHECK(r.coarse == 1);
}

namespace {

nn::Tensor4<float> random_images(int n, std::uint64_t seed) {
  nn::Tensor4<float> t(n, 3, 16, 16);
  Rng rng(seed);
  for (auto& v : t.data) v = static_cast<float>(rng.normal());
  return t;
}

}  // namespace

TEST_CASE("coarse pruning limits") {
  const auto tmpl = arch::builtin_template("tiny4");
  nn::Network<float> net(tmpl, 1);
  const auto images = random_images(20, 2);
  const auto tight = coarse_prune(tmpl, net, images, {1e-12, 2});
  CHECK(tight.structure == tmpl.original_structure());
  const auto loose = coarse_prune(tmpl, net, images, {1.0, 1});
  for (int c : loose.structure.channels) CHECK(c == 1);
  CHECK(loose.similarities.size() == 4);
}

TEST_CASE("coarse pruning matches the per-layer oracle pipeline") {
  const auto tmpl = arch::builtin_template("tiny4");
  nn::Network<float> net(tmpl, 3);
  const auto images = random_images(24, 4);
  for (double eps : {0.02, 0.05, 0.2}) {
    const NeighborhoodParams params{eps, 5};
    const auto result = coarse_prune(tmpl, net, images, params, 7);

    net.forward(images, nn::Mode::kEval, true);
    const auto& caps = net.captured();
    REQUIRE(caps.size() == result.structure.size());
    for (std::size_t l = 0; l < caps.size(); ++l) {
      const auto& t = caps[l];
      std::vector<std::vector<double>> vectors(t.c, std::vector<double>(t.plane_size(), 0.0));
      for (int s = 0; s < t.n; ++s)
        for (int c = 0; c < t.c; ++c)
          for (std::size_t k = 0; k < t.plane_size(); ++k) vectors[c][k] += t.plane(s, c)[k] / t.n;
      const auto d = chanprune::testing::cosine_distances(vectors);
      const auto labels = reference_dbscan(d, t.c, eps, 5);
      int clusters = 0, noise = 0;
      std::vector<int> seen;
      for (int lab : labels) {
        if (lab < 0) ++noise;
        else if (std::find(seen.begin(), seen.end(), lab) == seen.end()) seen.push_back(lab), ++clusters;
      }
      CHECK(result.structure[l] == clusters + noise);
      CHECK(result.layers[l].clusters == clusters);
      CHECK(result.layers[l].noise == noise);
    }
  }
}

TEST_CASE("coarse report json round trip") {
  const auto tmpl = arch::builtin_template("tiny4");
  nn::Network<float> net(tmpl, 5);
  const auto r = coarse_prune(tmpl, net, random_images(8, 6), {0.05, 3});
  CHECK(coarse_report_from_json(coarse_report_json(r)) == r);
  for (std::size_t l = 0; l < r.structure.size(); ++l) {
    CHECK(r.structure[l] >= 1);
    CHECK(r.structure[l] <= tmpl.original_structure()[l]);
  }
}
