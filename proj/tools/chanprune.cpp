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

// Command-line front end. Talks to the engine only through the C API.

#include <cstdio>
#include <cstdint>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "chanprune/chanprune.h"

namespace {

struct Overrides {
  std::string config;
  std::optional<double> epsilon;
  std::optional<int> min_pts;
  std::optional<int> particles;
  std::optional<int> iterations;
  std::optional<int> proxy_epochs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool resume = false;
  bool json = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "experiment config (YAML)");
  cmd->add_option("--epsilon", o.epsilon, "DBSCAN radius on 1 - |cos|");
  cmd->add_option("--minpts", o.min_pts, "DBSCAN minimum neighbourhood size");
  cmd->add_option("--particles", o.particles, "swarm population");
  cmd->add_option("--iterations", o.iterations, "swarm iterations");
  cmd->add_option("--proxy-epochs", o.proxy_epochs, "training epochs per fitness evaluation");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output root directory");
  cmd->add_flag("--resume", o.resume, "reuse artifacts and continue a partial search");
  cmd->add_flag("--json", o.json, "print the JSON report instead of the table");
}

bool check(cp_status st) {
  if (st == CP_OK) return true;
  std::fprintf(stderr, "error (%s): %s\n", cp_status_name(st), cp_last_error());
  return false;
}

cp_config* build_config(const Overrides& o) {
  cp_config* cfg = nullptr;
  if (!check(o.config.empty() ? cp_config_default(&cfg) : cp_config_load(o.config.c_str(), &cfg)))
    return nullptr;
  bool ok = true;
  if (o.epsilon) ok = ok && check(cp_config_set_epsilon(cfg, *o.epsilon));
  if (o.min_pts) ok = ok && check(cp_config_set_min_pts(cfg, *o.min_pts));
  if (o.particles) ok = ok && check(cp_config_set_particles(cfg, *o.particles));
  if (o.iterations) ok = ok && check(cp_config_set_iterations(cfg, *o.iterations));
  if (o.proxy_epochs) ok = ok && check(cp_config_set_proxy_epochs(cfg, *o.proxy_epochs));
  if (o.seed) ok = ok && check(cp_config_set_seed(cfg, *o.seed));
  if (o.out) ok = ok && check(cp_config_set_output_dir(cfg, o.out->c_str()));
  ok = ok && check(cp_config_set_resume(cfg, o.resume ? 1 : 0));
  if (!ok) {
    cp_config_free(cfg);
    return nullptr;
  }
  return cfg;
}

int print_report(const cp_report* report, bool json) {
  char* text = nullptr;
  if (!check(json ? cp_report_json(report, &text) : cp_report_table(report, &text))) return 1;
  std::fputs(text, stdout);
  if (json) std::fputc('\n', stdout);
  cp_string_free(text);
  return 0;
}

int run_range(const Overrides& o, cp_stage first, cp_stage last) {
  cp_config* cfg = build_config(o);
  if (!cfg) return 2;
  char* dir = nullptr;
  if (check(cp_config_run_dir(cfg, &dir))) {
    std::fprintf(stderr, "run directory: %s\n", dir);
    cp_string_free(dir);
  }
  cp_report* report = nullptr;
  const cp_status st = cp_run(cfg, first, last, &report);
  cp_config_free(cfg);
  int rc = st == CP_OK ? 0 : 1;
  if (st != CP_OK) check(st);
  if (report) {
    if (print_report(report, o.json) != 0) rc = 1;
    cp_report_free(report);
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured channel pruning: clustering, swarm search and retraining"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cp_version());

  Overrides o;
  struct Sub {
    const char* name;
    const char* help;
    cp_stage first;
    cp_stage last;
  };
  const Sub subs[] = {
      {"train-baseline", "train (or reuse) the unpruned baseline", CP_STAGE_BASELINE, CP_STAGE_BASELINE},
      {"coarse", "cluster feature maps into a coarse structure", CP_STAGE_COARSE, CP_STAGE_COARSE},
      {"search", "refine the coarse structure with the particle swarm", CP_STAGE_SEARCH, CP_STAGE_SEARCH},
      {"retrain", "train the searched structure from scratch", CP_STAGE_RETRAIN, CP_STAGE_RETRAIN},
      {"run", "all stages end to end", CP_STAGE_BASELINE, CP_STAGE_RETRAIN},
  };
  int rc = 0;
  for (const Sub& s : subs) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, o);
    cmd->callback([&o, &rc, s] { rc = run_range(o, s.first, s.last); });
  }

  std::string report_path;
  CLI::App* rep = app.add_subcommand("report", "print the report of a run directory");
  rep->add_option("path", report_path, "run directory or report.json");
  add_common(rep, o);
  rep->callback([&] {
    std::string path = report_path;
    if (path.empty()) {
      cp_config* cfg = build_config(o);
      if (!cfg) {
        rc = 2;
        return;
      }
      char* dir = nullptr;
      const bool ok = check(cp_config_run_dir(cfg, &dir));
      cp_config_free(cfg);
      if (!ok) {
        rc = 2;
        return;
      }
      path = dir;
      cp_string_free(dir);
    }
    cp_report* report = nullptr;
    if (!check(cp_report_load(path.c_str(), &report))) {
      rc = 1;
      return;
    }
    rc = print_report(report, o.json);
    cp_report_free(report);
  });

  CLI11_PARSE(app, argc, argv);
  return rc;
}
