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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nncore/dataset.hpp"

namespace chanprune::pipeline {

// CIFAR-10 binary record: 1 label byte, then 1024 red, 1024 green and 1024
// blue bytes, each plane row-major 32x32.
inline constexpr std::size_t kCifarImageSide = 32;
inline constexpr std::size_t kCifarPixels = 3 * kCifarImageSide * kCifarImageSide;
inline constexpr std::size_t kCifarRecordBytes = 1 + kCifarPixels;
inline constexpr int kCifarClasses = 10;

struct RawImages {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> labels;
  std::vector<std::uint8_t> pixels;  // records x channels x height x width

  std::size_t size() const { return labels.size(); }
};

// Parses one CIFAR-10 batch file image. Throws FormatError at the offending
// byte offset for an empty or truncated buffer or a label >= 10.
RawImages parse_cifar10_batch(std::string_view bytes);

// Per-channel standardization constants applied after scaling to [0, 1].
struct Normalization {
  std::vector<double> mean;
  std::vector<double> stddev;

  bool operator==(const Normalization&) const = default;
};

struct DatasetSpec {
  std::string name = "synthetic";  // "synthetic" or "cifar10"
  std::filesystem::path path;      // directory holding the cifar10 .bin files
  int classes = 4;                 // synthetic only
  int train_size = 800;            // 0 keeps every record (cifar10)
  int test_size = 200;
  int image_size = 16;             // synthetic only
  double noise = 0.35;             // synthetic only
  std::uint64_t seed = 1;          // synthetic only

  bool operator==(const DatasetSpec&) const = default;
};

struct LoadedData {
  nn::Dataset train;
  nn::Dataset test;
  Normalization normalization;
  std::string display_name;
};

// Scales bytes to [0, 1]; fills `norm` from the data when it is empty.
nn::Dataset to_dataset(const RawImages& raw, int num_classes, Normalization& norm);

// Reads data_batch_1..5.bin and test_batch.bin from `dir`.
LoadedData load_cifar10(const std::filesystem::path& dir, int train_limit = 0, int test_limit = 0);

// Class-conditional Gaussian blobs rendered as small RGB images.
LoadedData make_synthetic(const DatasetSpec& spec);

LoadedData load_dataset(const DatasetSpec& spec);

struct Sample {
  std::vector<std::size_t> indices;
  nn::Tensor4<float> images;
};

// Uniform sample of `count` training images without replacement.
Sample sample_images(const nn::Dataset& train_set, int count, std::uint64_t seed);

// round(baseline_epochs * original_flops / pruned_flops), at least baseline_epochs.
int retrain_epochs(int baseline_epochs, std::uint64_t original_flops, std::uint64_t pruned_flops);

}  // namespace chanprune::pipeline
