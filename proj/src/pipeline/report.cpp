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

#include "pipeline/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <vector>

namespace chanprune::pipeline {

using nlohmann::json;

namespace {

json measurement_json(const Measurement& m) {
  return {{"accuracy", m.accuracy}, {"params", m.params}, {"flops", m.flops}};
}

Measurement measurement_from(const json& j) {
  return {j.at("accuracy").get<double>(), j.at("params").get<std::uint64_t>(),
          j.at("flops").get<std::uint64_t>()};
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", arch::round_half_even(v, 2));
  return buf;
}

}  // namespace

bool RunReport::same_results(const RunReport& o) const {
  json a = report_to_json(*this);
  json b = report_to_json(o);
  a.erase("stage_seconds");
  b.erase("stage_seconds");
  return a == b;
}

json report_to_json(const RunReport& r) {
  json j = {{"status", r.status},
            {"template", r.template_name},
            {"dataset", r.dataset_name},
            {"epsilon", r.epsilon},
            {"min_pts", r.min_pts},
            {"seed", r.seed},
            {"config_fingerprint", r.config_fingerprint},
            {"batch_size", r.batch_size},
            {"baseline_epochs", r.baseline_epochs},
            {"retrain_epochs", r.retrain_epochs},
            {"weight_init", r.weight_init},
            {"normalization", {{"mean", r.normalization.mean}, {"std", r.normalization.stddev}}},
            {"stage_seconds", r.stage_seconds}};
  if (!r.failed_stage.empty()) {
    j["failed_stage"] = r.failed_stage;
    j["error"] = r.error;
  }
  if (r.has_baseline) {
    j["baseline"] = measurement_json(r.baseline);
    j["original_structure"] = r.original.channels;
  }
  if (r.has_coarse) j["coarse_structure"] = r.coarse.channels;
  if (r.has_search) {
    j["final_structure"] = r.final_structure.channels;
    j["search_fitness"] = r.search_fitness;
  }
  if (r.has_final) {
    json f = measurement_json(r.final_metrics);
    f["param_drop_pct"] = r.param_drop_pct;
    f["flop_drop_pct"] = r.flop_drop_pct;
    j["final"] = f;
  }
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.status = j.at("status").get<std::string>();
  r.template_name = j.at("template").get<std::string>();
  r.dataset_name = j.at("dataset").get<std::string>();
  r.epsilon = j.at("epsilon").get<double>();
  r.min_pts = j.at("min_pts").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  r.batch_size = j.at("batch_size").get<int>();
  r.baseline_epochs = j.at("baseline_epochs").get<int>();
  r.retrain_epochs = j.at("retrain_epochs").get<int>();
  r.weight_init = j.at("weight_init").get<std::string>();
  r.normalization.mean = j.at("normalization").at("mean").get<std::vector<double>>();
  r.normalization.stddev = j.at("normalization").at("std").get<std::vector<double>>();
  r.stage_seconds = j.at("stage_seconds").get<std::map<std::string, double>>();
  if (j.contains("failed_stage")) {
    r.failed_stage = j.at("failed_stage").get<std::string>();
    r.error = j.at("error").get<std::string>();
  }
  if (j.contains("baseline")) {
    r.has_baseline = true;
    r.baseline = measurement_from(j.at("baseline"));
    r.original.channels = j.at("original_structure").get<std::vector<int>>();
  }
  if (j.contains("coarse_structure")) {
    r.has_coarse = true;
    r.coarse.channels = j.at("coarse_structure").get<std::vector<int>>();
  }
  if (j.contains("final_structure")) {
    r.has_search = true;
    r.final_structure.channels = j.at("final_structure").get<std::vector<int>>();
    r.search_fitness = j.at("search_fitness").get<double>();
  }
  if (j.contains("final")) {
    const json& f = j.at("final");
    r.has_final = true;
    r.final_metrics = measurement_from(f);
    r.param_drop_pct = f.at("param_drop_pct").get<double>();
    r.flop_drop_pct = f.at("flop_drop_pct").get<double>();
  }
  return r;
}

std::string format_count(std::uint64_t count) {
  char buf[64];
  if (count >= 1000000) {
    std::snprintf(buf, sizeof buf, "%.2fM", arch::round_half_even(count / 1e6, 2));
  } else if (count >= 1000) {
    std::snprintf(buf, sizeof buf, "%.2fK", arch::round_half_even(count / 1e3, 2));
  } else {
    std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(count));
  }
  return buf;
}

std::string report_table(const RunReport& r) {
  using Row = std::vector<std::string>;
  std::vector<Row> rows = {{"Dataset", "Model", "Acc/%", "Acc.drop/%", "Parameters",
                            "Parameters.drop/%", "FLOPs", "FLOPs.drop/%"}};
  if (r.has_baseline) {
    rows.push_back({r.dataset_name, r.template_name, fixed2(100.0 * r.baseline.accuracy), "-",
                    format_count(r.baseline.params), "-", format_count(r.baseline.flops), "-"});
  }
  if (r.has_final) {
    char label[64];
    std::snprintf(label, sizeof label, "%.3f, %d", r.epsilon, r.min_pts);
    const double acc_drop = 100.0 * (r.baseline.accuracy - r.final_metrics.accuracy);
    rows.push_back({"", label, fixed2(100.0 * r.final_metrics.accuracy), fixed2(acc_drop),
                    format_count(r.final_metrics.params), fixed2(r.param_drop_pct) + "%",
                    format_count(r.final_metrics.flops), fixed2(r.flop_drop_pct) + "%"});
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const Row& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream os;
  for (const Row& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += row[c];
      if (c + 1 < row.size()) line += std::string(width[c] - row[c].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
  }
  return os.str();
}

}  // namespace chanprune::pipeline
