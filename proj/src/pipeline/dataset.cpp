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

#include "pipeline/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "common/fileio.hpp"
#include "common/rng.hpp"
#include "nncore/trainer.hpp"

namespace chanprune::pipeline {

RawImages parse_cifar10_batch(std::string_view bytes) {
  if (bytes.empty()) throw FormatError("empty CIFAR-10 batch", 0);
  if (bytes.size() % kCifarRecordBytes != 0) {
    const std::size_t partial = bytes.size() - bytes.size() % kCifarRecordBytes;
    throw FormatError("truncated CIFAR-10 record", partial);
  }
  RawImages raw;
  raw.channels = 3;
  raw.height = raw.width = static_cast<int>(kCifarImageSide);
  const std::size_t records = bytes.size() / kCifarRecordBytes;
  raw.labels.reserve(records);
  raw.pixels.reserve(records * kCifarPixels);
  for (std::size_t r = 0; r < records; ++r) {
    const std::size_t at = r * kCifarRecordBytes;
    const auto label = static_cast<std::uint8_t>(bytes[at]);
    if (label >= kCifarClasses)
      throw FormatError("CIFAR-10 label " + std::to_string(label) + " >= 10", at);
    raw.labels.push_back(label);
    const auto* px = reinterpret_cast<const std::uint8_t*>(bytes.data() + at + 1);
    raw.pixels.insert(raw.pixels.end(), px, px + kCifarPixels);
  }
  return raw;
}

nn::Dataset to_dataset(const RawImages& raw, int num_classes, Normalization& norm) {
  const std::size_t plane = static_cast<std::size_t>(raw.height) * raw.width;
  const std::size_t per_image = plane * raw.channels;
  if (norm.mean.empty()) {
    norm.mean.assign(raw.channels, 0.0);
    norm.stddev.assign(raw.channels, 0.0);
    const double count = static_cast<double>(raw.size() * plane);
    for (int c = 0; c < raw.channels; ++c) {
      double sum = 0, sq = 0;
      for (std::size_t i = 0; i < raw.size(); ++i)
        for (std::size_t p = 0; p < plane; ++p) {
          const double v = raw.pixels[i * per_image + c * plane + p] / 255.0;
          sum += v;
          sq += v * v;
        }
      norm.mean[c] = sum / count;
      norm.stddev[c] = std::sqrt(std::max(sq / count - norm.mean[c] * norm.mean[c], 1e-12));
    }
  }
  nn::Dataset ds;
  ds.num_classes = num_classes;
  ds.images = nn::Tensor4<float>(static_cast<int>(raw.size()), raw.channels, raw.height, raw.width);
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (int c = 0; c < raw.channels; ++c)
      for (std::size_t p = 0; p < plane; ++p) {
        const std::size_t k = i * per_image + c * plane + p;
        ds.images.data[k] = static_cast<float>((raw.pixels[k] / 255.0 - norm.mean[c]) / norm.stddev[c]);
      }
  ds.labels.assign(raw.labels.begin(), raw.labels.end());
  return ds;
}

namespace {

RawImages concat_batches(const std::vector<std::filesystem::path>& files, int limit) {
  RawImages all;
  for (const auto& f : files) {
    RawImages part;
    try {
      part = parse_cifar10_batch(read_file(f));
    } catch (const FormatError& e) {
      throw FormatError(f.filename().string() + ": " + e.what(), e.offset());
    }
    all.channels = part.channels;
    all.height = part.height;
    all.width = part.width;
    all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
    all.pixels.insert(all.pixels.end(), part.pixels.begin(), part.pixels.end());
    if (limit > 0 && all.size() >= static_cast<std::size_t>(limit)) break;
  }
  if (limit > 0 && all.size() > static_cast<std::size_t>(limit)) {
    all.labels.resize(limit);
    all.pixels.resize(static_cast<std::size_t>(limit) * kCifarPixels);
  }
  return all;
}

}  // namespace

LoadedData load_cifar10(const std::filesystem::path& dir, int train_limit, int test_limit) {
  std::vector<std::filesystem::path> train_files;
  for (int i = 1; i <= 5; ++i) train_files.push_back(dir / ("data_batch_" + std::to_string(i) + ".bin"));
  LoadedData out;
  out.display_name = "CIFAR-10";
  const RawImages train_raw = concat_batches(train_files, train_limit);
  const RawImages test_raw = concat_batches({dir / "test_batch.bin"}, test_limit);
  out.train = to_dataset(train_raw, kCifarClasses, out.normalization);
  out.test = to_dataset(test_raw, kCifarClasses, out.normalization);
  return out;
}

LoadedData make_synthetic(const DatasetSpec& spec) {
  if (spec.classes < 2 || spec.classes > 10) throw InvalidArgument("synthetic classes must be in [2, 10]");
  if (spec.train_size < 1 || spec.test_size < 1) throw InvalidArgument("synthetic split sizes must be >= 1");
  if (spec.image_size < 4) throw InvalidArgument("synthetic image_size must be >= 4");
  constexpr int kBlobs = 2;
  const int side = spec.image_size;
  struct Blob {
    double cy, cx, sigma;
    double color[3];
  };
  Rng rng(spec.seed);
  std::vector<std::array<Blob, kBlobs>> protos(spec.classes);
  for (auto& proto : protos)
    for (Blob& b : proto) {
      b.cy = rng.uniform(0.2, 0.8) * side;
      b.cx = rng.uniform(0.2, 0.8) * side;
      b.sigma = rng.uniform(0.08, 0.2) * side;
      for (double& c : b.color) c = rng.uniform(0.15, 1.0);
    }

  auto render = [&](int count) {
    RawImages raw;
    raw.channels = 3;
    raw.height = raw.width = side;
    const std::size_t plane = static_cast<std::size_t>(side) * side;
    raw.pixels.resize(static_cast<std::size_t>(count) * 3 * plane);
    for (int i = 0; i < count; ++i) {
      const int label = i % spec.classes;
      raw.labels.push_back(static_cast<std::uint8_t>(label));
      std::array<Blob, kBlobs> blobs = protos[label];
      for (Blob& b : blobs) {
        b.cy += rng.uniform(-1.0, 1.0);
        b.cx += rng.uniform(-1.0, 1.0);
      }
      const double gain = rng.uniform(0.8, 1.2);
      for (int c = 0; c < 3; ++c)
        for (int y = 0; y < side; ++y)
          for (int x = 0; x < side; ++x) {
            double v = 0;
            for (const Blob& b : blobs) {
              const double d2 = (y - b.cy) * (y - b.cy) + (x - b.cx) * (x - b.cx);
              v += b.color[c] * std::exp(-d2 / (2 * b.sigma * b.sigma));
            }
            v = gain * v + spec.noise * rng.normal() * 0.25;
            v = std::clamp(v, 0.0, 1.0);
            raw.pixels[(static_cast<std::size_t>(i) * 3 + c) * plane + y * side + x] =
                static_cast<std::uint8_t>(std::lround(v * 255.0));
          }
    }
    return raw;
  };

  LoadedData out;
  out.display_name = "synthetic";
  const RawImages train_raw = render(spec.train_size);
  const RawImages test_raw = render(spec.test_size);
  out.train = to_dataset(train_raw, spec.classes, out.normalization);
  out.test = to_dataset(test_raw, spec.classes, out.normalization);
  return out;
}

LoadedData load_dataset(const DatasetSpec& spec) {
  if (spec.name == "synthetic") return make_synthetic(spec);
  if (spec.name == "cifar10" || spec.name == "cifar-10")
    return load_cifar10(spec.path, spec.train_size, spec.test_size);
  throw InvalidArgument("unknown dataset '" + spec.name + "' (expected synthetic or cifar10)");
}

Sample sample_images(const nn::Dataset& train_set, int count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("sample count must be >= 1");
  if (static_cast<std::size_t>(count) > train_set.size())
    throw InvalidArgument("sample count " + std::to_string(count) + " exceeds training set size " +
                          std::to_string(train_set.size()));
  Rng rng(seed);
  auto order = nn::permutation(train_set.size(), rng);
  order.resize(count);
  Sample s;
  s.images = train_set.gather_images(order);
  s.indices = std::move(order);
  return s;
}

int retrain_epochs(int baseline_epochs, std::uint64_t original_flops, std::uint64_t pruned_flops) {
  if (original_flops == 0 || pruned_flops == 0) throw InvalidArgument("FLOP counts must be > 0");
  if (pruned_flops > original_flops)
    throw InvalidArgument("pruned FLOPs exceed the original network's FLOPs");
  if (baseline_epochs < 0) throw InvalidArgument("baseline_epochs must be >= 0");
  const double scaled = std::round(static_cast<double>(baseline_epochs) *
                                   static_cast<double>(original_flops) /
                                   static_cast<double>(pruned_flops));
  return std::max(baseline_epochs, static_cast<int>(scaled));
}

}  // namespace chanprune::pipeline
