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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chanprune::arch {

enum class LayerKind { kConv, kFc, kPool, kActivation, kBatchNorm, kClassifier };

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

// Activation shape flowing between layers. Fully connected outputs are
// represented as (features, 1, 1).
struct Shape3 {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::int64_t size() const { return std::int64_t{channels} * height * width; }
  bool operator==(const Shape3&) const = default;
};

// One layer of a plain feedforward chain. For conv/batchnorm/pool layers the
// channel fields count feature maps; for fc/classifier layers `in_channels`
// is the flattened input size and `out_channels` the number of units.
struct LayerSpec {
  LayerKind kind = LayerKind::kActivation;
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;
  bool bias = true;
  Shape3 in_shape;
  Shape3 out_shape;

  bool operator==(const LayerSpec&) const = default;
};

// Per-slot channel counts, one entry per prunable slot.
struct NetworkStructure {
  std::vector<int> channels;

  std::size_t size() const { return channels.size(); }
  int operator[](std::size_t i) const { return channels[i]; }
  bool operator==(const NetworkStructure&) const = default;
};

std::string to_string(const NetworkStructure& s);

enum class FlopConvention {
  kMac,     // one multiply-accumulate counts as one FLOP
  kMulAdd,  // multiply and add counted separately
};
inline constexpr FlopConvention kDefaultFlopConvention = FlopConvention::kMac;

// A user-facing layer declaration; shapes are derived when a template is built.
struct LayerDecl {
  LayerKind kind = LayerKind::kActivation;
  int out_channels = 0;  // conv / fc / classifier only
  int kernel = 3;
  int stride = 1;
  int padding = 0;
  bool bias = true;
};

class ArchTemplate {
 public:
  // Derives channel chaining and spatial sizes; throws StructuralError on an
  // inconsistent declaration (e.g. kernel larger than padded input).
  static ArchTemplate build(std::string name, Shape3 input, int num_classes,
                            const std::vector<LayerDecl>& decls);

  const std::string& name() const { return name_; }
  const Shape3& input_shape() const { return input_; }
  int num_classes() const { return num_classes_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<std::size_t>& prunable_slots() const { return slots_; }
  const std::vector<LayerDecl>& decls() const { return decls_; }

  // Channel vector of this template as built (the search upper bounds).
  NetworkStructure original_structure() const;

  // Throws BoundsError naming the slot when an entry is outside [1, original].
  void check_structure(const NetworkStructure& structure) const;

  // Returns a concrete template whose slot widths are replaced by `structure`.
  ArchTemplate instantiate(const NetworkStructure& structure) const;

  // Same layers with a different classifier width.
  ArchTemplate with_num_classes(int num_classes) const;

  std::uint64_t param_count() const;
  std::uint64_t flops_count(FlopConvention conv = kDefaultFlopConvention) const;

  // Canonical YAML; stable across runs and used for fingerprinting.
  std::string to_yaml() const;
  std::uint64_t fingerprint() const;

  bool operator==(const ArchTemplate& other) const {
    return name_ == other.name_ && input_ == other.input_ &&
           num_classes_ == other.num_classes_ && layers_ == other.layers_;
  }

 private:
  std::string name_;
  Shape3 input_;
  int num_classes_ = 0;
  std::vector<LayerDecl> decls_;
  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> slots_;
};

std::uint64_t param_count(const ArchTemplate& tmpl, const NetworkStructure& structure);
std::uint64_t flops_count(const ArchTemplate& tmpl, const NetworkStructure& structure,
                          FlopConvention conv = kDefaultFlopConvention);

struct CompressionReport {
  double param_drop_pct = 0.0;
  double flop_drop_pct = 0.0;
};

// Unrounded drop percentages, 100 * (1 - pruned / original).
CompressionReport compression_report(const ArchTemplate& tmpl, const NetworkStructure& original,
                                     const NetworkStructure& pruned);

// Round to `digits` decimals with ties going to the even neighbour.
double round_half_even(double value, int digits);

// Built-in templates: "vgg16-cifar" and "tiny4".
ArchTemplate builtin_template(std::string_view name);
std::vector<std::string> builtin_template_names();

ArchTemplate parse_template_yaml(std::string_view text);
ArchTemplate load_template_file(const std::filesystem::path& path);

// Name of a built-in, or a path to a YAML template file.
ArchTemplate resolve_template(const std::string& name_or_path);

}  // namespace chanprune::arch
