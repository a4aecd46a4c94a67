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
#include <map>
#include <string>

#include <json.hpp>

#include "archspec/archspec.hpp"
#include "pipeline/dataset.hpp"

namespace chanprune::pipeline {

struct Measurement {
  double accuracy = 0.0;  // fraction in [0, 1]
  std::uint64_t params = 0;
  std::uint64_t flops = 0;

  bool operator==(const Measurement&) const = default;
};

struct RunReport {
  std::string status = "partial";  // complete | partial | failed
  std::string failed_stage;
  std::string error;

  std::string template_name;
  std::string dataset_name;
  double epsilon = 0.0;
  int min_pts = 0;
  std::uint64_t seed = 0;
  std::string config_fingerprint;
  int batch_size = 0;
  int baseline_epochs = 0;
  int retrain_epochs = 0;
  std::string weight_init = "kaiming-normal-fan-in";
  Normalization normalization;

  bool has_baseline = false;
  Measurement baseline;
  arch::NetworkStructure original;
  bool has_coarse = false;
  arch::NetworkStructure coarse;
  bool has_search = false;
  arch::NetworkStructure final_structure;
  double search_fitness = 0.0;
  bool has_final = false;
  Measurement final_metrics;
  double param_drop_pct = 0.0;  // unrounded
  double flop_drop_pct = 0.0;

  std::map<std::string, double> stage_seconds;

  // Equality over everything except wall-clock timings.
  bool same_results(const RunReport& other) const;
};

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

// "14.73M", "152.64K" or a plain integer below one thousand.
std::string format_count(std::uint64_t count);

// Aligned text table with the columns Dataset, Model, Acc/%, Acc.drop/%,
// Parameters, Parameters.drop/%, FLOPs, FLOPs.drop/%: one base row and one
// row labelled "<epsilon>, <min_pts>" for the pruned network.
std::string report_table(const RunReport& report);

}  // namespace chanprune::pipeline
