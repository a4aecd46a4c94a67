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

#include "nncore/dataset.hpp"

#include <algorithm>

namespace chanprune::nn {

Tensor4<float> Dataset::gather_images(std::span<const std::size_t> indices) const {
  Tensor4<float> out(static_cast<int>(indices.size()), images.c, images.h, images.w);
  const std::size_t stride = images.sample_size();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto src = images.sample(static_cast<int>(indices[i]));
    std::copy(src.begin(), src.end(), out.data.begin() + i * stride);
  }
  return out;
}

std::vector<int> Dataset::gather_labels(std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(labels[i]);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  return {gather_images(indices), gather_labels(indices), num_classes};
}

}  // namespace chanprune::nn
