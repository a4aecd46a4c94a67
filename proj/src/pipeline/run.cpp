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

#include "pipeline/run.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include "cluster/coarse.hpp"
#include "common/error.hpp"
#include "common/fileio.hpp"
#include "common/hash.hpp"
#include "common/rng.hpp"
#include "nncore/checkpoint.hpp"
#include "nncore/network.hpp"
#include "nncore/trainer.hpp"
#include "swarm/proxy_fitness.hpp"

namespace chanprune::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kBaseline:
      return "baseline";
    case Stage::kCoarse:
      return "coarse";
    case Stage::kSearch:
      return "search";
    case Stage::kRetrain:
      return "retrain";
  }
  return "unknown";
}

namespace {

// Child seeds for each randomized step, derived from the run seed.
enum SeedTag : std::uint64_t {
  kBaselineInit = 1,
  kBaselineTrain,
  kSampling,
  kSwarm,
  kProxy,
  kFinalInit,
  kFinalTrain,
};

class Runner {
 public:
  Runner(const ExperimentConfig& config, const RunHooks& hooks)
      : cfg_(config), hooks_(hooks), dir_(config.run_dir()) {}

  RunReport execute(Stage first, Stage last) {
    cfg_.validate();
    report_.template_name = fs::path(cfg_.template_name).stem().string();
    report_.epsilon = cfg_.neighborhood.epsilon;
    report_.min_pts = cfg_.neighborhood.min_pts;
    report_.seed = cfg_.seed;
    report_.config_fingerprint = hex64(cfg_.fingerprint());
    report_.batch_size = cfg_.train.batch_size;
    report_.baseline_epochs = cfg_.baseline_epochs;
    fs::create_directories(dir_);
    write_file_atomic(dir_ / "config.yaml", config_to_yaml(cfg_));

    Stage current = Stage::kBaseline;
    try {
      data_ = load_dataset(cfg_.dataset);
      report_.dataset_name = data_.display_name;
      report_.normalization = data_.normalization;
      tmpl_ = arch::resolve_template(cfg_.template_name).with_num_classes(data_.train.num_classes);
      const arch::Shape3 in = tmpl_->input_shape();
      if (in.channels != data_.train.images.c || in.height != data_.train.images.h ||
          in.width != data_.train.images.w)
        throw StructuralError("template input shape does not match the dataset images");

      for (int s = 0; s <= static_cast<int>(last); ++s) {
        current = static_cast<Stage>(s);
        const bool reuse = current == Stage::kBaseline || cfg_.resume || current < first;
        const auto t0 = std::chrono::steady_clock::now();
        switch (current) {
          case Stage::kBaseline:
            baseline(reuse);
            break;
          case Stage::kCoarse:
            coarse(reuse);
            break;
          case Stage::kSearch:
            search(reuse);
            break;
          case Stage::kRetrain:
            retrain(reuse);
            break;
        }
        report_.stage_seconds[std::string(stage_name(current))] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
      report_.status = last == Stage::kRetrain ? "complete" : "partial";
    } catch (const std::exception& e) {
      report_.status = "failed";
      report_.failed_stage = std::string(stage_name(current));
      report_.error = e.what();
    }
    persist_report();
    return report_;
  }

 private:
  nn::TrainConfig recipe(int epochs, std::uint64_t seed) const {
    nn::TrainConfig t = cfg_.train;
    t.epochs = epochs;
    t.seed = seed;
    return t;
  }

  std::uint64_t seed(SeedTag tag) const { return mix_seed(cfg_.seed, tag); }

  void baseline(bool reuse) {
    const fs::path ckpt = dir_ / "baseline.ckpt";
    const fs::path meta = dir_ / "baseline.json";
    net_.emplace(*tmpl_, seed(kBaselineInit));
    if (reuse && fs::exists(ckpt) && fs::exists(meta)) {
      nn::load_checkpoint(*net_, ckpt);
      report_.baseline = measurement(json::parse(read_file(meta)));
    } else {
      const auto trace = nn::train(*net_, data_.train, &data_.test,
                                   recipe(cfg_.baseline_epochs, seed(kBaselineTrain)));
      write_file_atomic(dir_ / "baseline_trace.csv", nn::trace_csv(trace));
      nn::save_checkpoint(*net_, ckpt);
      report_.baseline = {trace.back().test_acc, tmpl_->param_count(), tmpl_->flops_count()};
      write_file_atomic(meta, measurement_json(report_.baseline, cfg_.baseline_epochs).dump(2));
    }
    report_.has_baseline = true;
    report_.original = tmpl_->original_structure();
  }

  void coarse(bool reuse) {
    const fs::path path = dir_ / "coarse.json";
    if (reuse && fs::exists(path)) {
      coarse_ = cluster::coarse_report_from_json(json::parse(read_file(path)));
    } else {
      const Sample sample = sample_images(data_.train, cfg_.sample_count, seed(kSampling));
      coarse_ = cluster::coarse_prune(*tmpl_, *net_, sample.images, cfg_.neighborhood);
      write_file_atomic(path, cluster::coarse_report_json(coarse_).dump(2));
      if (cfg_.dump_similarity) {
        for (std::size_t k = 0; k < coarse_.similarities.size(); ++k) {
          char name[64];
          std::snprintf(name, sizeof name, "similarity_%02zu.csv", k);
          write_file_atomic(dir_ / "similarity" / name, feat::similarity_csv(coarse_.similarities[k]));
        }
      }
    }
    tmpl_->check_structure(coarse_.structure);
    report_.has_coarse = true;
    report_.coarse = coarse_.structure;
  }

  void search(bool reuse) {
    const fs::path done = dir_ / "search.json";
    const fs::path state_path = dir_ / "swarm_state.json";
    const fs::path trace_path = dir_ / "swarm_trace.jsonl";
    if (reuse && fs::exists(done)) {
      const json j = json::parse(read_file(done));
      best_.channels = j.at("best").get<std::vector<int>>();
      report_.search_fitness = j.at("fitness").get<double>();
    } else {
      swarm::SwarmConfig sc = cfg_.swarm;
      sc.seed = seed(kSwarm);
      swarm::ProxyFitnessEvaluator evaluator(*tmpl_, data_.train, data_.test, cfg_.train,
                                             sc.proxy_epochs, seed(kProxy));
      auto persist = [&](const swarm::SwarmState& st, const swarm::SearchTrace& tr) {
        json summaries = json::array();
        for (const auto& s : tr.summaries) summaries.push_back(swarm::summary_to_json(s));
        write_file_atomic(trace_path, swarm::trace_jsonl(tr));
        write_file_atomic(state_path,
                          json{{"state", swarm::state_to_json(st)}, {"summaries", summaries}}.dump());
        if (hooks_.after_search_iteration) hooks_.after_search_iteration(st, tr);
      };
      swarm::SearchResult result;
      if (cfg_.resume && fs::exists(state_path)) {
        const json saved = json::parse(read_file(state_path));
        swarm::SearchTrace trace;
        for (const auto& s : saved.at("summaries")) trace.summaries.push_back(swarm::summary_from_json(s));
        std::istringstream lines(read_file(trace_path));
        for (std::string line; std::getline(lines, line);)
          if (!line.empty()) trace.events.push_back(swarm::event_from_json(json::parse(line)));
        result = swarm::continue_search(swarm::state_from_json(saved.at("state")), std::move(trace),
                                        evaluator, sc, persist);
      } else {
        result = swarm::search(coarse_.structure, tmpl_->original_structure(), evaluator, sc, persist);
      }
      best_ = result.best;
      report_.search_fitness = result.best_fitness;
      json summaries = json::array();
      for (const auto& s : result.trace.summaries) summaries.push_back(swarm::summary_to_json(s));
      write_file_atomic(done, json{{"best", best_.channels},
                                   {"fitness", result.best_fitness},
                                   {"summaries", summaries}}
                                  .dump(2));
    }
    report_.has_search = true;
    report_.final_structure = best_;
  }

  void retrain(bool reuse) {
    const arch::ArchTemplate pruned = tmpl_->instantiate(best_);
    const int epochs = retrain_epochs(cfg_.baseline_epochs, tmpl_->flops_count(), pruned.flops_count());
    report_.retrain_epochs = epochs;
    const fs::path meta = dir_ / "final.json";
    if (reuse && fs::exists(meta)) {
      report_.final_metrics = measurement(json::parse(read_file(meta)));
    } else {
      nn::Network<float> net(pruned, seed(kFinalInit));
      const auto trace = nn::train(net, data_.train, &data_.test, recipe(epochs, seed(kFinalTrain)));
      write_file_atomic(dir_ / "final_trace.csv", nn::trace_csv(trace));
      nn::save_checkpoint(net, dir_ / "final.ckpt");
      report_.final_metrics = {trace.back().test_acc, pruned.param_count(), pruned.flops_count()};
      write_file_atomic(meta, measurement_json(report_.final_metrics, epochs).dump(2));
    }
    const auto drops = arch::compression_report(*tmpl_, tmpl_->original_structure(), best_);
    report_.param_drop_pct = drops.param_drop_pct;
    report_.flop_drop_pct = drops.flop_drop_pct;
    report_.has_final = true;
  }

  static json measurement_json(const Measurement& m, int epochs) {
    return {{"accuracy", m.accuracy}, {"params", m.params}, {"flops", m.flops}, {"epochs", epochs}};
  }

  static Measurement measurement(const json& j) {
    return {j.at("accuracy").get<double>(), j.at("params").get<std::uint64_t>(),
            j.at("flops").get<std::uint64_t>()};
  }

  void persist_report() {
    try {
      write_file_atomic(dir_ / "report.json", report_to_json(report_).dump(2));
      write_file_atomic(dir_ / "report.txt", report_table(report_));
    } catch (const std::exception& e) {
      if (report_.error.empty()) {
        report_.status = "failed";
        report_.failed_stage = "report";
        report_.error = e.what();
      }
    }
  }

  ExperimentConfig cfg_;
  RunHooks hooks_;
  fs::path dir_;
  LoadedData data_;
  std::optional<arch::ArchTemplate> tmpl_;
  std::optional<nn::Network<float>> net_;
  cluster::CoarseResult coarse_;
  arch::NetworkStructure best_;
  RunReport report_;
};

}  // namespace

RunReport run_stages(const ExperimentConfig& config, Stage first, Stage last, const RunHooks& hooks) {
  if (first > last) throw InvalidArgument("first stage comes after last stage");
  return Runner(config, hooks).execute(first, last);
}

RunReport run(const ExperimentConfig& config, const RunHooks& hooks) {
  return run_stages(config, Stage::kBaseline, Stage::kRetrain, hooks);
}

RunReport load_report(const fs::path& run_dir) {
  const fs::path p = fs::is_directory(run_dir) ? run_dir / "report.json" : run_dir;
  return report_from_json(json::parse(read_file(p)));
}

}  // namespace chanprune::pipeline
