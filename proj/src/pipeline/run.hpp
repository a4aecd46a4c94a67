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

#include <string_view>

#include "pipeline/config.hpp"
#include "pipeline/report.hpp"
#include "swarm/swarm.hpp"

namespace chanprune::pipeline {

enum class Stage { kBaseline = 0, kCoarse = 1, kSearch = 2, kRetrain = 3 };

std::string_view stage_name(Stage stage);

struct RunHooks {
  // Invoked after the swarm state of every completed iteration is persisted.
  swarm::IterationObserver after_search_iteration;
};

// Runs stages [first, last] and everything they depend on. Artifacts live in
// config.run_dir(). The baseline checkpoint is always reused when present;
// stages before `first` reuse their artifacts; the remaining stages reuse
// theirs only with config.resume, which also continues a partial swarm search.
// A stage failure is recorded in the returned (and persisted) report.
RunReport run_stages(const ExperimentConfig& config, Stage first, Stage last,
                     const RunHooks& hooks = {});

// All stages: baseline, coarse pruning, search, retrain, report.
RunReport run(const ExperimentConfig& config, const RunHooks& hooks = {});

RunReport load_report(const std::filesystem::path& run_dir);

}  // namespace chanprune::pipeline
