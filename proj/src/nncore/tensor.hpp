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

#include "common/error.hpp"

namespace chanprune::nn {

// Dense NCHW tensor: (samples, channels, height, width), row-major.
template <typename Real>
struct Tensor4 {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<Real> data;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_, Real fill = Real(0)) : n(n_), c(c_), h(h_), w(w_) {
    if (n < 1 || c < 1 || h < 1 || w < 1)
      throw InvalidArgument("tensor dimensions must all be >= 1");
    data.assign(static_cast<std::size_t>(n) * c * h * w, fill);
  }

  std::size_t size() const { return data.size(); }
  std::size_t sample_size() const { return static_cast<std::size_t>(c) * h * w; }
  std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }

  std::size_t index(int s, int ch, int y, int x) const {
    return ((static_cast<std::size_t>(s) * c + ch) * h + y) * w + x;
  }
  Real& at(int s, int ch, int y, int x) { return data[index(s, ch, y, x)]; }
  Real at(int s, int ch, int y, int x) const { return data[index(s, ch, y, x)]; }

  std::span<Real> sample(int s) { return {data.data() + s * sample_size(), sample_size()}; }
  std::span<const Real> sample(int s) const {
    return {data.data() + s * sample_size(), sample_size()};
  }
  std::span<const Real> plane(int s, int ch) const {
    return {data.data() + index(s, ch, 0, 0), plane_size()};
  }

  bool same_shape(const Tensor4& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }

  // Resize without preserving contents; no-op when the shape already matches.
  void reshape(int n_, int c_, int h_, int w_) {
    n = n_;
    c = c_;
    h = h_;
    w = w_;
    data.resize(static_cast<std::size_t>(n) * c * h * w);
  }

  template <typename Other>
  Tensor4<Other> cast() const {
    Tensor4<Other> out;
    out.n = n;
    out.c = c;
    out.h = h;
    out.w = w;
    out.data.assign(data.begin(), data.end());
    return out;
  }
};

}  // namespace chanprune::nn
