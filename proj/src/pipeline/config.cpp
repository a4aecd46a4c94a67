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

#include "pipeline/config.hpp"

#include <sstream>

#include <yaml-cpp/yaml.h>

#include "common/error.hpp"
#include "common/fileio.hpp"
#include "common/hash.hpp"

namespace chanprune::pipeline {

namespace {

std::string sync_name(swarm::GbestSync s) {
  return s == swarm::GbestSync::kImmediate ? "immediate" : "end-of-iteration";
}

swarm::GbestSync sync_from_name(const std::string& s) {
  if (s == "immediate") return swarm::GbestSync::kImmediate;
  if (s == "end-of-iteration") return swarm::GbestSync::kEndOfIteration;
  throw InvalidArgument("swarm.sync must be 'end-of-iteration' or 'immediate'");
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (node && node[key]) out = node[key].as<T>();
}

YAML::Emitter& emit(YAML::Emitter& e, const ExperimentConfig& c, bool canonical) {
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "template" << YAML::Value << c.template_name;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  if (!canonical) {
    e << YAML::Key << "out" << YAML::Value << c.output_dir.string();
    e << YAML::Key << "resume" << YAML::Value << c.resume;
    e << YAML::Key << "dump_similarity" << YAML::Value << c.dump_similarity;
  }
  e << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << c.dataset.name;
  e << YAML::Key << "path" << YAML::Value << c.dataset.path.string();
  e << YAML::Key << "classes" << YAML::Value << c.dataset.classes;
  e << YAML::Key << "train_size" << YAML::Value << c.dataset.train_size;
  e << YAML::Key << "test_size" << YAML::Value << c.dataset.test_size;
  e << YAML::Key << "image_size" << YAML::Value << c.dataset.image_size;
  e << YAML::Key << "noise" << YAML::Value << c.dataset.noise;
  e << YAML::Key << "seed" << YAML::Value << c.dataset.seed;
  e << YAML::EndMap;
  e << YAML::Key << "cluster" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "samples" << YAML::Value << c.sample_count;
  e << YAML::Key << "epsilon" << YAML::Value << c.neighborhood.epsilon;
  e << YAML::Key << "min_pts" << YAML::Value << c.neighborhood.min_pts;
  e << YAML::EndMap;
  e << YAML::Key << "swarm" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "particles" << YAML::Value << c.swarm.population;
  e << YAML::Key << "iterations" << YAML::Value << c.swarm.iterations;
  e << YAML::Key << "v_max" << YAML::Value << c.swarm.v_max;
  e << YAML::Key << "alpha1" << YAML::Value << c.swarm.alpha1;
  e << YAML::Key << "alpha2" << YAML::Value << c.swarm.alpha2;
  e << YAML::Key << "learning_rate" << YAML::Value << c.swarm.learning_rate;
  e << YAML::Key << "w_ini" << YAML::Value << c.swarm.w_ini;
  e << YAML::Key << "w_snd" << YAML::Value << c.swarm.w_snd;
  e << YAML::Key << "proxy_epochs" << YAML::Value << c.swarm.proxy_epochs;
  e << YAML::Key << "sync" << YAML::Value << sync_name(c.swarm.sync);
  if (!canonical) e << YAML::Key << "workers" << YAML::Value << c.swarm.workers;
  e << YAML::EndMap;
  e << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "lr" << YAML::Value << c.train.initial_lr;
  e << YAML::Key << "lr_drops" << YAML::Value << YAML::BeginSeq;
  for (const auto& d : c.train.lr_drops)
    e << YAML::Flow << YAML::BeginSeq << d.epoch_fraction << d.factor << YAML::EndSeq;
  e << YAML::EndSeq;
  e << YAML::Key << "momentum" << YAML::Value << c.train.momentum;
  e << YAML::Key << "weight_decay" << YAML::Value << c.train.weight_decay;
  e << YAML::Key << "batch_size" << YAML::Value << c.train.batch_size;
  e << YAML::Key << "baseline_epochs" << YAML::Value << c.baseline_epochs;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return e;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (template_name.empty()) throw InvalidArgument("template must be set");
  if (sample_count < 1) throw InvalidArgument("cluster.samples must be >= 1");
  if (baseline_epochs < 1) throw InvalidArgument("train.baseline_epochs must be >= 1");
  neighborhood.validate();
  swarm.validate();
  train.validate();
}

std::string ExperimentConfig::canonical_yaml() const {
  YAML::Emitter e;
  emit(e, *this, true);
  return e.c_str();
}

std::uint64_t ExperimentConfig::fingerprint() const { return fnv1a64(canonical_yaml()); }

std::filesystem::path ExperimentConfig::run_dir() const {
  const std::string stem = std::filesystem::path(template_name).stem().string();
  return output_dir / (stem + "-" + hex64(fingerprint()) + "-s" + std::to_string(seed));
}

ExperimentConfig parse_config_yaml(std::string_view text) {
  ExperimentConfig c;
  try {
    const YAML::Node root = YAML::Load(std::string(text));
    if (!root || root.IsNull()) return c;
    if (!root.IsMap()) throw InvalidArgument("config must be a YAML mapping");
    read(root, "template", c.template_name);
    read(root, "seed", c.seed);
    std::string out = c.output_dir.string();
    read(root, "out", out);
    c.output_dir = out;
    read(root, "resume", c.resume);
    read(root, "dump_similarity", c.dump_similarity);

    const YAML::Node ds = root["dataset"];
    read(ds, "name", c.dataset.name);
    std::string path = c.dataset.path.string();
    read(ds, "path", path);
    c.dataset.path = path;
    read(ds, "classes", c.dataset.classes);
    read(ds, "train_size", c.dataset.train_size);
    read(ds, "test_size", c.dataset.test_size);
    read(ds, "image_size", c.dataset.image_size);
    read(ds, "noise", c.dataset.noise);
    read(ds, "seed", c.dataset.seed);

    const YAML::Node cl = root["cluster"];
    read(cl, "samples", c.sample_count);
    read(cl, "epsilon", c.neighborhood.epsilon);
    read(cl, "min_pts", c.neighborhood.min_pts);

    const YAML::Node sw = root["swarm"];
    read(sw, "particles", c.swarm.population);
    read(sw, "iterations", c.swarm.iterations);
    read(sw, "v_max", c.swarm.v_max);
    read(sw, "alpha1", c.swarm.alpha1);
    read(sw, "alpha2", c.swarm.alpha2);
    read(sw, "learning_rate", c.swarm.learning_rate);
    read(sw, "w_ini", c.swarm.w_ini);
    read(sw, "w_snd", c.swarm.w_snd);
    read(sw, "proxy_epochs", c.swarm.proxy_epochs);
    read(sw, "workers", c.swarm.workers);
    if (sw && sw["sync"]) c.swarm.sync = sync_from_name(sw["sync"].as<std::string>());

    const YAML::Node tr = root["train"];
    read(tr, "lr", c.train.initial_lr);
    read(tr, "momentum", c.train.momentum);
    read(tr, "weight_decay", c.train.weight_decay);
    read(tr, "batch_size", c.train.batch_size);
    read(tr, "baseline_epochs", c.baseline_epochs);
    if (tr && tr["lr_drops"]) {
      c.train.lr_drops.clear();
      for (const auto& d : tr["lr_drops"]) {
        if (!d.IsSequence() || d.size() != 2)
          throw InvalidArgument("train.lr_drops entries must be [epoch_fraction, factor]");
        c.train.lr_drops.push_back({d[0].as<double>(), d[1].as<double>()});
      }
    }
  } catch (const YAML::Exception& e) {
    throw InvalidArgument(std::string("config YAML: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config_yaml(read_file(path));
}

std::string config_to_yaml(const ExperimentConfig& config) {
  YAML::Emitter e;
  emit(e, config, false);
  return std::string(e.c_str()) + "\n";
}

}  // namespace chanprune::pipeline
