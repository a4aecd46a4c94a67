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

#include "archspec/archspec.hpp"

#include <cfenv>
#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "common/hash.hpp"

namespace chanprune::arch {

namespace {

constexpr struct {
  LayerKind kind;
  std::string_view name;
} kKindNames[] = {
    {LayerKind::kConv, "conv"},           {LayerKind::kFc, "fc"},
    {LayerKind::kPool, "pool"},           {LayerKind::kActivation, "relu"},
    {LayerKind::kBatchNorm, "batchnorm"}, {LayerKind::kClassifier, "classifier"},
};

int conv_out(int in, int kernel, int stride, int padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.name;
  return "unknown";
}

LayerKind layer_kind_from_string(std::string_view name) {
  for (const auto& k : kKindNames)
    if (k.name == name) return k.kind;
  if (name == "activation") return LayerKind::kActivation;
  if (name == "bn") return LayerKind::kBatchNorm;
  if (name == "maxpool") return LayerKind::kPool;
  throw InvalidArgument("unknown layer kind '" + std::string(name) + "'");
}

std::string to_string(const NetworkStructure& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

ArchTemplate ArchTemplate::build(std::string name, Shape3 input, int num_classes,
                                 const std::vector<LayerDecl>& decls) {
  if (input.channels < 1 || input.height < 1 || input.width < 1)
    throw StructuralError("input shape must be positive in every dimension");
  if (num_classes < 1) throw StructuralError("num_classes must be at least 1");
  if (decls.empty() || decls.back().kind != LayerKind::kClassifier)
    throw StructuralError("template must end with a classifier layer");

  ArchTemplate t;
  t.name_ = std::move(name);
  t.input_ = input;
  t.num_classes_ = num_classes;
  t.decls_ = decls;

  Shape3 cur = input;
  for (std::size_t i = 0; i < decls.size(); ++i) {
    const LayerDecl& d = decls[i];
    LayerSpec spec;
    spec.kind = d.kind;
    spec.in_shape = cur;
    const std::string where = "layer " + std::to_string(i) + " (" + std::string(to_string(d.kind)) + ")";
    switch (d.kind) {
      case LayerKind::kConv: {
        if (d.out_channels < 1) throw StructuralError(where + ": out_channels must be >= 1");
        if (d.kernel < 1 || d.stride < 1 || d.padding < 0)
          throw StructuralError(where + ": bad kernel/stride/padding");
        if (cur.height + 2 * d.padding < d.kernel || cur.width + 2 * d.padding < d.kernel)
          throw StructuralError(where + ": kernel exceeds padded input");
        spec.in_channels = cur.channels;
        spec.out_channels = d.out_channels;
        spec.kernel_h = spec.kernel_w = d.kernel;
        spec.stride = d.stride;
        spec.padding = d.padding;
        spec.bias = d.bias;
        cur = {d.out_channels, conv_out(cur.height, d.kernel, d.stride, d.padding),
               conv_out(cur.width, d.kernel, d.stride, d.padding)};
        break;
      }
      case LayerKind::kPool: {
        if (d.kernel < 1 || d.stride < 1) throw StructuralError(where + ": bad kernel/stride");
        if (cur.height < d.kernel || cur.width < d.kernel)
          throw StructuralError(where + ": pool window exceeds input");
        spec.in_channels = spec.out_channels = cur.channels;
        spec.kernel_h = spec.kernel_w = d.kernel;
        spec.stride = d.stride;
        spec.bias = false;
        cur = {cur.channels, conv_out(cur.height, d.kernel, d.stride, 0),
               conv_out(cur.width, d.kernel, d.stride, 0)};
        break;
      }
      case LayerKind::kFc:
      case LayerKind::kClassifier: {
        const int out = d.kind == LayerKind::kClassifier ? num_classes : d.out_channels;
        if (out < 1) throw StructuralError(where + ": out_channels must be >= 1");
        if (d.kind == LayerKind::kClassifier && i + 1 != decls.size())
          throw StructuralError(where + ": classifier must be the last layer");
        spec.in_channels = static_cast<int>(cur.size());
        spec.out_channels = out;
        spec.kernel_h = spec.kernel_w = 1;
        spec.bias = d.bias;
        cur = {out, 1, 1};
        break;
      }
      case LayerKind::kActivation:
      case LayerKind::kBatchNorm:
        spec.in_channels = spec.out_channels = cur.channels;
        spec.bias = false;
        break;
    }
    spec.out_shape = cur;
    if (d.kind == LayerKind::kConv || d.kind == LayerKind::kFc) t.slots_.push_back(i);
    t.layers_.push_back(spec);
  }
  return t;
}

NetworkStructure ArchTemplate::original_structure() const {
  NetworkStructure s;
  s.channels.reserve(slots_.size());
  for (std::size_t idx : slots_) s.channels.push_back(layers_[idx].out_channels);
  return s;
}

void ArchTemplate::check_structure(const NetworkStructure& structure) const {
  if (structure.size() != slots_.size())
    throw BoundsError("structure has " + std::to_string(structure.size()) +
                      " entries but template '" + name_ + "' has " +
                      std::to_string(slots_.size()) + " prunable slots");
  for (std::size_t l = 0; l < slots_.size(); ++l) {
    const int bound = layers_[slots_[l]].out_channels;
    if (structure[l] < 1 || structure[l] > bound)
      throw BoundsError("slot " + std::to_string(l) + " (layer " + std::to_string(slots_[l]) +
                        "): channel count " + std::to_string(structure[l]) +
                        " outside [1, " + std::to_string(bound) + "]");
  }
}

ArchTemplate ArchTemplate::instantiate(const NetworkStructure& structure) const {
  check_structure(structure);
  std::vector<LayerDecl> decls = decls_;
  for (std::size_t l = 0; l < slots_.size(); ++l) decls[slots_[l]].out_channels = structure[l];
  return build(name_, input_, num_classes_, decls);
}

ArchTemplate ArchTemplate::with_num_classes(int num_classes) const {
  return build(name_, input_, num_classes, decls_);
}

std::uint64_t ArchTemplate::param_count() const {
  std::uint64_t total = 0;
  for (const LayerSpec& l : layers_) {
    switch (l.kind) {
      case LayerKind::kConv:
        total += std::uint64_t(l.out_channels) * l.in_channels * l.kernel_h * l.kernel_w;
        if (l.bias) total += l.out_channels;
        break;
      case LayerKind::kFc:
      case LayerKind::kClassifier:
        total += std::uint64_t(l.out_channels) * l.in_channels;
        if (l.bias) total += l.out_channels;
        break;
      case LayerKind::kBatchNorm:
        // scale and shift; running statistics are buffers, not parameters
        total += 2 * std::uint64_t(l.out_channels);
        break;
      case LayerKind::kPool:
      case LayerKind::kActivation:
        break;
    }
  }
  return total;
}

std::uint64_t ArchTemplate::flops_count(FlopConvention conv) const {
  std::uint64_t macs = 0;
  for (const LayerSpec& l : layers_) {
    if (l.kind == LayerKind::kConv) {
      macs += std::uint64_t(l.out_channels) * l.in_channels * l.kernel_h * l.kernel_w *
              l.out_shape.height * l.out_shape.width;
    } else if (l.kind == LayerKind::kFc || l.kind == LayerKind::kClassifier) {
      macs += std::uint64_t(l.in_channels) * l.out_channels;
    }
  }
  return conv == FlopConvention::kMac ? macs : 2 * macs;
}

std::string ArchTemplate::to_yaml() const {
  std::ostringstream os;
  os << "name: " << name_ << "\n";
  os << "input: [" << input_.channels << ", " << input_.height << ", " << input_.width << "]\n";
  os << "classes: " << num_classes_ << "\n";
  os << "layers:\n";
  for (const LayerDecl& d : decls_) {
    os << "  - {kind: " << to_string(d.kind);
    switch (d.kind) {
      case LayerKind::kConv:
        os << ", out: " << d.out_channels << ", kernel: " << d.kernel << ", stride: " << d.stride
           << ", padding: " << d.padding << ", bias: " << (d.bias ? "true" : "false");
        break;
      case LayerKind::kFc:
        os << ", out: " << d.out_channels << ", bias: " << (d.bias ? "true" : "false");
        break;
      case LayerKind::kClassifier:
        os << ", bias: " << (d.bias ? "true" : "false");
        break;
      case LayerKind::kPool:
        os << ", kernel: " << d.kernel << ", stride: " << d.stride;
        break;
      default:
        break;
    }
    os << "}\n";
  }
  return os.str();
}

std::uint64_t ArchTemplate::fingerprint() const { return fnv1a64(to_yaml()); }

std::uint64_t param_count(const ArchTemplate& tmpl, const NetworkStructure& structure) {
  return tmpl.instantiate(structure).param_count();
}

std::uint64_t flops_count(const ArchTemplate& tmpl, const NetworkStructure& structure,
                          FlopConvention conv) {
  return tmpl.instantiate(structure).flops_count(conv);
}

CompressionReport compression_report(const ArchTemplate& tmpl, const NetworkStructure& original,
                                     const NetworkStructure& pruned) {
  const double p0 = static_cast<double>(param_count(tmpl, original));
  const double f0 = static_cast<double>(flops_count(tmpl, original));
  const double p1 = static_cast<double>(param_count(tmpl, pruned));
  const double f1 = static_cast<double>(flops_count(tmpl, pruned));
  return {100.0 * (1.0 - p1 / p0), 100.0 * (1.0 - f1 / f0)};
}

double round_half_even(double value, int digits) {
  const double scale = std::pow(10.0, digits);
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double r = std::nearbyint(value * scale) / scale;
  std::fesetround(saved);
  return r;
}

}  // namespace chanprune::arch
