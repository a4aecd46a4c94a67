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

#include "nncore/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace chanprune::nn {

GradCheckResult gradient_check(Network<double>& net, const Tensor4<double>& batch,
                               std::span<const int> labels, double epsilon, LossKind loss) {
  if (!(epsilon > 0)) throw InvalidArgument("gradient_check epsilon must be > 0");
  if (net.param_count() >= kGradCheckMaxParams)
    throw InvalidArgument("gradient_check is limited to models with fewer than 10^4 parameters");

  auto loss_at = [&] {
    return compute_loss(net.forward(batch, Mode::kTrain), labels, loss).loss;
  };

  {
    auto r = compute_loss(net.forward(batch, Mode::kTrain), labels, loss);
    net.backward(r.grad);
  }
  std::vector<std::vector<double>> analytic;
  for (auto* p : net.params()) analytic.push_back(p->grad);

  GradCheckResult result;
  auto params = net.params();
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Param<double>& p = *params[pi];
    double worst = 0.0;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + epsilon;
      const double up = loss_at();
      p.value[i] = saved - epsilon;
      const double down = loss_at();
      p.value[i] = saved;
      const double numeric = (up - down) / (2 * epsilon);
      const double a = analytic[pi][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    result.per_param.emplace_back(p.name, worst);
    if (worst >= result.max_rel_error) {
      result.max_rel_error = worst;
      result.worst_param = p.name;
    }
  }
  return result;
}

}  // namespace chanprune::nn
