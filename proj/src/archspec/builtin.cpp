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

#include <filesystem>
#include <yaml-cpp/yaml.h>

#include "archspec/archspec.hpp"
#include "common/error.hpp"
#include "common/fileio.hpp"

namespace chanprune::arch {

namespace {

LayerDecl conv3x3(int out) { return {LayerKind::kConv, out, 3, 1, 1, true}; }
LayerDecl batchnorm() { return {LayerKind::kBatchNorm}; }
LayerDecl relu() { return {LayerKind::kActivation}; }
LayerDecl maxpool2() { return {LayerKind::kPool, 0, 2, 2, 0, false}; }
LayerDecl classifier() { return {LayerKind::kClassifier}; }

// conv-bn-relu blocks from a width list; 0 marks a 2x2 max pool.
std::vector<LayerDecl> vgg_stack(std::initializer_list<int> cfg) {
  std::vector<LayerDecl> decls;
  for (int c : cfg) {
    if (c == 0) {
      decls.push_back(maxpool2());
    } else {
      decls.push_back(conv3x3(c));
      decls.push_back(batchnorm());
      decls.push_back(relu());
    }
  }
  decls.push_back(classifier());
  return decls;
}

}  // namespace

ArchTemplate builtin_template(std::string_view name) {
  if (name == "vgg16-cifar") {
    return ArchTemplate::build(
        "vgg16-cifar", {3, 32, 32}, 10,
        vgg_stack({64, 64, 0, 128, 128, 0, 256, 256, 256, 0, 512, 512, 512, 0, 512, 512, 512, 0}));
  }
  if (name == "tiny4") {
    return ArchTemplate::build("tiny4", {3, 16, 16}, 4, vgg_stack({16, 16, 0, 32, 32, 0}));
  }
  throw InvalidArgument("unknown built-in template '" + std::string(name) + "'");
}

std::vector<std::string> builtin_template_names() { return {"vgg16-cifar", "tiny4"}; }

ArchTemplate parse_template_yaml(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw StructuralError(std::string("template YAML: ") + e.what());
  }
  try {
    const std::string name = root["name"] ? root["name"].as<std::string>() : "custom";
    const YAML::Node in = root["input"];
    if (!in || !in.IsSequence() || in.size() != 3)
      throw StructuralError("template YAML: 'input' must be [channels, height, width]");
    const Shape3 input{in[0].as<int>(), in[1].as<int>(), in[2].as<int>()};
    if (!root["classes"]) throw StructuralError("template YAML: missing 'classes'");
    const int classes = root["classes"].as<int>();
    const YAML::Node layers = root["layers"];
    if (!layers || !layers.IsSequence()) throw StructuralError("template YAML: missing 'layers'");

    std::vector<LayerDecl> decls;
    for (const YAML::Node& n : layers) {
      LayerDecl d;
      d.kind = layer_kind_from_string(n["kind"].as<std::string>());
      if (d.kind == LayerKind::kPool) {
        d.kernel = 2;
        d.stride = 2;
      }
      if (n["out"]) d.out_channels = n["out"].as<int>();
      if (n["kernel"]) d.kernel = n["kernel"].as<int>();
      if (n["stride"]) d.stride = n["stride"].as<int>();
      if (n["padding"])
        d.padding = n["padding"].as<int>();
      else if (d.kind == LayerKind::kConv)
        d.padding = d.kernel / 2;  // "same" padding for odd kernels
      if (n["bias"]) d.bias = n["bias"].as<bool>();
      decls.push_back(d);
    }
    return ArchTemplate::build(name, input, classes, decls);
  } catch (const YAML::Exception& e) {
    throw StructuralError(std::string("template YAML: ") + e.what());
  }
}

ArchTemplate load_template_file(const std::filesystem::path& path) {
  return parse_template_yaml(read_file(path));
}

ArchTemplate resolve_template(const std::string& name_or_path) {
  for (const auto& n : builtin_template_names())
    if (n == name_or_path) return builtin_template(n);
  if (std::filesystem::exists(name_or_path)) return load_template_file(name_or_path);
  throw InvalidArgument("'" + name_or_path + "' is neither a built-in template nor a file");
}

}  // namespace chanprune::arch
