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

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nncore/network.hpp"

namespace chanprune::nn {

inline constexpr std::size_t kGradCheckMaxParams = 10000;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  // Worst relative error per parameter tensor, in network order.
  std::vector<std::pair<std::string, double>> per_param;
};

// Compares backprop gradients against central finite differences for every
// scalar parameter, in training mode. Relative error per entry is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6); the floor keeps
// roundoff on vanishing gradients from dominating.
GradCheckResult gradient_check(Network<double>& net, const Tensor4<double>& batch,
                               std::span<const int> labels, double epsilon,
                               LossKind loss = LossKind::kSoftmaxCrossEntropy);

}  // namespace chanprune::nn
