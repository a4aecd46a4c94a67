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

#include <cmath>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "featstats/featstats.hpp"

using namespace chanprune;
using namespace chanprune::feat;

namespace {

ChannelMeanMaps maps_from(std::vector<std::vector<double>> rows) {
  ChannelMeanMaps m;
  m.channels = static_cast<int>(rows.size());
  m.height = 1;
  m.width = static_cast<int>(rows[0].size());
  for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
  return m;
}

nn::Tensor4<double> random_tensor(Rng& rng, int n, int c, int h, int w) {
  nn::Tensor4<double> t(n, c, h, w);
  for (auto& v : t.data) v = rng.normal();
  return t;
}

}  // namespace

TEST_CASE("mean of a single sample is the sample") {
  Rng rng(1);
  const auto t = random_tensor(rng, 1, 3, 2, 2);
  const auto m = mean_maps(t, 4);
  CHECK(m.layer_index == 4);
  CHECK(m.values == t.data);
}

TEST_CASE("mean of a zero map and a two map is a one map") {
  nn::Tensor4<float> t(2, 1, 2, 3);
  for (int i = 0; i < 6; ++i) t.data[6 + i] = 2.0f;
  const auto m = mean_maps(t);
  for (double v : m.values) CHECK(v == 1.0);
}

TEST_CASE("mean maps match a per-element oracle and streaming accumulation") {
  Rng rng(2);
  const auto t = random_tensor(rng, 3, 4, 3, 2);
  const auto m = mean_maps(t);
  for (int c = 0; c < 4; ++c)
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 2; ++x) {
        const double expect = (t.at(0, c, y, x) + t.at(1, c, y, x) + t.at(2, c, y, x)) / 3.0;
        CHECK(m.values[(c * 3 + y) * 2 + x] == doctest::Approx(expect).epsilon(1e-14));
      }
  MeanMapAccumulator acc;
  nn::Tensor4<double> first(2, 4, 3, 2), second(1, 4, 3, 2);
  std::copy(t.data.begin(), t.data.begin() + 48, first.data.begin());
  std::copy(t.data.begin() + 48, t.data.end(), second.data.begin());
  acc.add(first);
  acc.add(second);
  CHECK(acc.samples() == 3);
  const auto streamed = acc.finish();
  for (std::size_t i = 0; i < m.values.size(); ++i)
    CHECK(streamed.values[i] == doctest::Approx(m.values[i]).epsilon(1e-14));
  CHECK_THROWS_AS(MeanMapAccumulator().finish(), InvalidArgument);
  CHECK_THROWS_AS(acc.add(nn::Tensor4<double>(1, 2, 3, 2)), StructuralError);
}

TEST_CASE("hand cosine values") {
  CHECK(similarity(maps_from({{1, 2, 3}, {1, 2, 3}}))(0, 1) == doctest::Approx(1.0));
  CHECK(similarity(maps_from({{1, -2, 3}, {-1, 2, -3}}))(0, 1) == doctest::Approx(1.0));
  CHECK(similarity(maps_from({{1, 0}, {0, 1}}))(0, 1) == 0.0);
  CHECK(similarity(maps_from({{1, 1}, {1, 0}}))(0, 1) == doctest::Approx(0.70710678).epsilon(1e-6));
}

TEST_CASE("zero-norm channels") {
  const auto s = similarity(maps_from({{0, 0}, {1, 2}, {0, 0}}));
  CHECK(s(0, 0) == 1.0);
  CHECK(s(2, 2) == 1.0);
  CHECK(s(0, 1) == 0.0);
  CHECK(s(0, 2) == 0.0);
  CHECK(s(1, 1) == 1.0);
  CHECK_THROWS_AS(similarity(maps_from({{1, 2}})), InvalidArgument);
}

TEST_CASE("similarity properties on random maps") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 2 + static_cast<int>(rng.uniform_index(10));
    auto m = mean_maps(random_tensor(rng, 2, c, 3, 3));
    const auto s = similarity(m);
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < c; ++j) {
        CHECK(s(i, j) == s(j, i));
        CHECK(s(i, j) >= 0.0);
        CHECK(s(i, j) <= 1.0);
      }
    const int ch = static_cast<int>(rng.uniform_index(c));
    const double k = (trial % 2 ? -1.0 : 1.0) * (0.1 + 10 * rng.uniform01());
    for (std::size_t i = 0; i < m.map_size(); ++i) m.values[ch * m.map_size() + i] *= k;
    const auto scaled = similarity(m);
    for (std::size_t i = 0; i < s.entries.size(); ++i)
      CHECK(scaled.entries[i] == doctest::Approx(s.entries[i]).epsilon(1e-12));
  }
}

TEST_CASE("distances and csv") {
  const auto s = similarity(maps_from({{1, 1}, {1, 0}, {0, 1}}));
  const auto d = to_distances(s);
  for (int i = 0; i < 3; ++i) CHECK(d[i * 3 + i] == 0.0);
  CHECK(d[1] == doctest::Approx(1.0 - s(0, 1)));
  const std::string csv = similarity_csv(s);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.rfind("1,", 0) == 0);
}
