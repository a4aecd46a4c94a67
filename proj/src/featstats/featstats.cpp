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

#include "featstats/featstats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chanprune::feat {

template <typename Real>
void MeanMapAccumulator::add(const nn::Tensor4<Real>& captured) {
  if (samples_ == 0) {
    c_ = captured.c;
    h_ = captured.h;
    w_ = captured.w;
    sum_.assign(captured.sample_size(), 0.0);
  } else if (captured.c != c_ || captured.h != h_ || captured.w != w_) {
    throw StructuralError("captured batch shape changed between accumulations");
  }
  const std::size_t stride = captured.sample_size();
  for (int s = 0; s < captured.n; ++s) {
    const Real* src = captured.data.data() + s * stride;
    for (std::size_t i = 0; i < stride; ++i) sum_[i] += static_cast<double>(src[i]);
  }
  samples_ += static_cast<std::size_t>(captured.n);
}

ChannelMeanMaps MeanMapAccumulator::finish(std::size_t layer_index) const {
  if (samples_ == 0) throw InvalidArgument("mean maps need at least one sample");
  ChannelMeanMaps out;
  out.layer_index = layer_index;
  out.channels = c_;
  out.height = h_;
  out.width = w_;
  out.values.resize(sum_.size());
  const double s = static_cast<double>(samples_);
  for (std::size_t i = 0; i < sum_.size(); ++i) out.values[i] = sum_[i] / s;
  return out;
}

template <typename Real>
ChannelMeanMaps mean_maps(const nn::Tensor4<Real>& captured, std::size_t layer_index) {
  MeanMapAccumulator acc;
  acc.add(captured);
  return acc.finish(layer_index);
}

template void MeanMapAccumulator::add(const nn::Tensor4<float>&);
template void MeanMapAccumulator::add(const nn::Tensor4<double>&);
template ChannelMeanMaps mean_maps(const nn::Tensor4<float>&, std::size_t);
template ChannelMeanMaps mean_maps(const nn::Tensor4<double>&, std::size_t);

SimilarityMatrix similarity(const ChannelMeanMaps& maps) {
  if (maps.channels < 2) throw InvalidArgument("similarity needs at least two channels");
  const int c = maps.channels;
  std::vector<double> norms(c);
  for (int i = 0; i < c; ++i) {
    double sq = 0;
    for (double v : maps.map(i)) sq += v * v;
    norms[i] = std::sqrt(sq);
  }
  SimilarityMatrix sim;
  sim.size = c;
  sim.entries.assign(static_cast<std::size_t>(c) * c, 0.0);
  for (int i = 0; i < c; ++i) {
    sim.entries[static_cast<std::size_t>(i) * c + i] = 1.0;
    for (int j = i + 1; j < c; ++j) {
      double s = 0.0;
      if (norms[i] > 0.0 && norms[j] > 0.0) {
        const auto a = maps.map(i);
        const auto b = maps.map(j);
        double dot = 0;
        for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
        s = std::min(1.0, std::abs(dot) / (norms[i] * norms[j]));
      }
      sim.entries[static_cast<std::size_t>(i) * c + j] = s;
      sim.entries[static_cast<std::size_t>(j) * c + i] = s;
    }
  }
  return sim;
}

std::vector<double> to_distances(const SimilarityMatrix& sim) {
  std::vector<double> d(sim.entries.size());
  for (int i = 0; i < sim.size; ++i)
    for (int j = 0; j < sim.size; ++j)
      d[static_cast<std::size_t>(i) * sim.size + j] = i == j ? 0.0 : 1.0 - sim(i, j);
  return d;
}

std::string similarity_csv(const SimilarityMatrix& sim) {
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < sim.size; ++i) {
    for (int j = 0; j < sim.size; ++j) os << (j ? "," : "") << sim(i, j);
    os << '\n';
  }
  return os.str();
}

}  // namespace chanprune::feat
