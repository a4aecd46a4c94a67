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

#include "cluster/dbscan.hpp"
#include "nncore/trainer.hpp"
#include "pipeline/dataset.hpp"
#include "swarm/swarm.hpp"

namespace chanprune::pipeline {

struct ExperimentConfig {
  std::string template_name = "tiny4";  // built-in name or YAML path
  DatasetSpec dataset;
  int sample_count = 128;
  cluster::NeighborhoodParams neighborhood{0.02, 5};
  swarm::SwarmConfig swarm;
  nn::TrainConfig train;  // `epochs` is unused; see baseline_epochs
  int baseline_epochs = 160;
  std::filesystem::path output_dir = "runs";
  std::uint64_t seed = 0;
  bool resume = false;
  bool dump_similarity = false;

  void validate() const;

  // Canonical YAML of every result-affecting field (excludes output_dir,
  // resume, dump_similarity and swarm.workers).
  std::string canonical_yaml() const;
  std::uint64_t fingerprint() const;
  // <output_dir>/<template stem>-<fingerprint>-s<seed>
  std::filesystem::path run_dir() const;
};

// Reads the YAML config format; absent keys keep their defaults.
ExperimentConfig parse_config_yaml(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Full config as YAML, readable by parse_config_yaml.
std::string config_to_yaml(const ExperimentConfig& config);

}  // namespace chanprune::pipeline
