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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Run from the build tree; desk runs write under ./acceptance_runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "archspec/archspec.hpp"
#include "cluster/dbscan.hpp"
#include "common/fileio.hpp"
#include "common/rng.hpp"
#include "featstats/featstats.hpp"
#include "nncore/gradcheck.hpp"
#include "oracles.hpp"
#include "pipeline/config.hpp"
#include "pipeline/report.hpp"
#include "pipeline/run.hpp"
#include "swarm/swarm.hpp"

using namespace chanprune;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, title,
              o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++g_failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome accounting() {
  const auto t = arch::builtin_template("vgg16-cifar");
  const double p = static_cast<double>(t.param_count());
  const double f = static_cast<double>(t.flops_count(arch::FlopConvention::kMac));
  const double pe = p / 14.73e6 - 1.0, fe = f / 314.59e6 - 1.0;
  return {std::abs(pe) <= 0.02 && std::abs(fe) <= 0.02,
          fmt("params %.0f (%+.2f%% vs 14.73M), FLOPs %.0f (%+.2f%% vs 314.59M)", p, 100 * pe, f, 100 * fe)};
}

Outcome dbscan_oracle() {
  Rng rng(20260101);
  int agree = 0, total = 0, with_clusters = 0, with_borders = 0;
  auto check = [&](const testing::DistanceCase& c) {
    const auto got = cluster::dbscan(c.d, c.n, {c.epsilon, c.min_pts});
    const auto ref = testing::reference_dbscan(c.d, c.n, c.epsilon, c.min_pts);
    ++total;
    agree += testing::same_partition(got.labels, ref);
    with_clusters += got.num_clusters() >= 2;
    for (std::size_t i = 0; i < c.n; ++i)
      if (!got.core[i] && got.labels[i] >= 0) {
        ++with_borders;
        break;
      }
  };
  for (int i = 0; i < 100; ++i) check(testing::random_distance_case(rng, i, 12));
  for (const auto& c : testing::handcrafted_distance_cases()) check(c);
  return {agree == total && total == 110,
          fmt("%.0f/%.0f partitions match (%.0f with >= 2 clusters, %.0f with border points)", agree,
              total, with_clusters, with_borders)};
}

Outcome similarity_properties() {
  Rng rng(77);
  int ok = 0;
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int s = 1 + static_cast<int>(rng.uniform_index(4));
    const int c = 2 + static_cast<int>(rng.uniform_index(11));
    const int h = 1 + static_cast<int>(rng.uniform_index(5));
    const int w = 1 + static_cast<int>(rng.uniform_index(5));
    nn::Tensor4<double> t(s, c, h, w);
    for (auto& v : t.data) v = rng.normal();
    if (trial % 10 == 0)  // a dead channel now and then
      for (int n = 0; n < s; ++n)
        for (int k = 0; k < h * w; ++k) t.data[(n * c) * h * w + k] = 0.0;
    auto maps = feat::mean_maps(t);
    const auto sim = feat::similarity(maps);
    bool good = true;
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < c; ++j)
        good = good && sim(i, j) == sim(j, i) && sim(i, j) >= 0.0 && sim(i, j) <= 1.0;
    for (double sign : {1.0, -1.0}) {
      auto scaled = maps;
      const int ch = static_cast<int>(rng.uniform_index(c));
      const double k = sign * std::exp(rng.uniform(-3.0, 3.0));
      for (std::size_t i = 0; i < scaled.map_size(); ++i) scaled.values[ch * scaled.map_size() + i] *= k;
      const auto s2 = feat::similarity(scaled);
      for (std::size_t i = 0; i < sim.entries.size(); ++i)
        worst = std::max(worst, std::abs(s2.entries[i] - sim.entries[i]));
    }
    ok += good;
  }
  return {ok == 50 && worst <= 1e-12,
          fmt("%.0f/50 symmetric and in [0,1]; max change under +/- scaling %.1e", ok, worst)};
}

Outcome gradients() {
  using arch::LayerKind;
  const auto t = arch::ArchTemplate::build(
      "gradcheck", {2, 6, 6}, 3,
      {{LayerKind::kConv, 3, 3, 1, 1, true}, {LayerKind::kBatchNorm}, {LayerKind::kActivation},
       {LayerKind::kPool, 0, 2, 2, 0, false}, {LayerKind::kConv, 4, 3, 1, 1, true},
       {LayerKind::kBatchNorm}, {LayerKind::kActivation}, {LayerKind::kFc, 6}, {LayerKind::kActivation},
       {LayerKind::kClassifier}});
  nn::Network<double> net(t, 11);
  nn::Tensor4<double> x(4, 2, 6, 6);
  Rng rng(12);
  for (auto& v : x.data) v = rng.normal();
  const std::vector<int> y = {0, 2, 1, 2};
  const auto r = nn::gradient_check(net, x, y, 1e-5);
  std::ostringstream os;
  os << net.param_count() << " params over conv/batchnorm/pool/fc; max rel error " << r.max_rel_error
     << " (" << r.worst_param << ")";
  return {r.max_rel_error < 1e-4 && net.param_count() <= 10000, os.str()};
}

Outcome pso_convergence() {
  const auto upper = arch::builtin_template("tiny4").original_structure();
  const std::size_t L = upper.size();
  int hits = 0, monotone = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng land(mix_seed(1000, seed));
    std::vector<int> target(L);
    arch::NetworkStructure start;
    for (std::size_t l = 0; l < L; ++l) {
      target[l] = 1 + static_cast<int>(land.uniform_index(upper[l]));
      start.channels.push_back(1 + static_cast<int>(land.uniform_index(upper[l])));
    }
    swarm::FunctionEvaluator eval([&](const arch::NetworkStructure& s) {
      double f = 0;
      for (std::size_t l = 0; l < L; ++l) f -= double(s[l] - target[l]) * (s[l] - target[l]);
      return f;
    });
    swarm::SwarmConfig cfg;  // defaults apart from the population and horizon
    cfg.population = 12;
    cfg.iterations = 50;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const auto r = swarm::search(start, upper, eval, cfg);
    bool within = true;
    for (std::size_t l = 0; l < L; ++l) within = within && std::abs(r.best[l] - target[l]) <= 1;
    bool mono = true;
    for (std::size_t i = 1; i < r.trace.summaries.size(); ++i)
      mono = mono && r.trace.summaries[i].gbest_fitness >= r.trace.summaries[i - 1].gbest_fitness;
    hits += within;
    monotone += mono;
  }
  return {hits >= 18 && monotone == 20,
          fmt("gbest within +/-1 of optimum for %.0f/20 seeds; gbest monotone in %.0f/20 (4 slots, bounds 16/16/32/32)",
              hits, monotone)};
}

Outcome inertia_exact() {
  double worst = 0;
  bool ends = true;
  for (int T : {1, 2, 10, 30, 51, 1000}) {
    for (auto [wi, ws] : {std::pair{0.9, 0.4}, {1.2, 0.0}, {0.7, 0.7}}) {
      swarm::SwarmConfig c;
      c.iterations = T;
      c.w_ini = wi;
      c.w_snd = ws;
      ends = ends && swarm::inertia(0, c) == wi && swarm::inertia(T, c) == ws;
      for (int t = 0; t <= T; ++t)
        worst = std::max(worst, std::abs(swarm::inertia(t, c) - (wi + (ws - wi) * t / double(T))));
      worst = std::max(worst, std::abs(swarm::inertia(T / 2, c) - (wi + (ws - wi) * (T / 2) / double(T))));
    }
  }
  swarm::SwarmConfig c;
  c.iterations = 10;
  const double mid = swarm::inertia(5, c);
  return {ends && worst <= 1e-12 && std::abs(mid - 0.65) <= 1e-12,
          fmt("endpoints exact, max deviation from the line %.1e, w(5 of 10) = %.15f", worst, mid)};
}

pipeline::ExperimentConfig desk_config(const fs::path& out) {
  pipeline::ExperimentConfig c = pipeline::load_config(CHANPRUNE_DESK_CONFIG);
  c.template_name = "tiny4";
  c.dataset.name = "synthetic";
  c.neighborhood = {0.05, 3};
  c.swarm.population = 6;
  c.swarm.iterations = 5;
  c.swarm.proxy_epochs = 1;
  c.output_dir = out;
  c.resume = false;
  return c;
}

pipeline::RunReport g_desk;
bool g_desk_ok = false;

Outcome desk_run() {
  const fs::path out = fs::path("acceptance_runs") / "first";
  fs::remove_all(out);
  const auto c = desk_config(out);
  g_desk = pipeline::run(c);
  if (g_desk.status != "complete") return {false, g_desk.failed_stage + ": " + g_desk.error};
  g_desk_ok = true;
  bool narrower = false;
  for (std::size_t l = 0; l < g_desk.coarse.size(); ++l) narrower = narrower || g_desk.coarse[l] < g_desk.original[l];
  const double gap = 100.0 * (g_desk.baseline.accuracy - g_desk.final_metrics.accuracy);
  std::ostringstream os;
  os << "C=" << arch::to_string(g_desk.original) << " C'=" << arch::to_string(g_desk.coarse)
     << " (C')*=" << arch::to_string(g_desk.final_structure) << "; baseline "
     << fmt("%.2f%%, retrained %.2f%% over %.0f epochs", 100 * g_desk.baseline.accuracy,
            100 * g_desk.final_metrics.accuracy, g_desk.retrain_epochs);
  return {narrower && gap <= 3.0, os.str()};
}

Outcome determinism() {
  if (!g_desk_ok) return {false, "criterion 7 run did not complete"};
  const fs::path out = fs::path("acceptance_runs") / "second";
  fs::remove_all(out);
  const auto c = desk_config(out);
  const auto again = pipeline::run(c);
  const auto first_dir = desk_config(fs::path("acceptance_runs") / "first").run_dir();
  const bool same_structure = again.final_structure == g_desk.final_structure;
  const bool same_trace =
      read_file(first_dir / "swarm_trace.jsonl") == read_file(c.run_dir() / "swarm_trace.jsonl");
  const bool same_report = again.same_results(g_desk);
  return {same_structure && same_trace && same_report,
          std::string("final structure ") + (same_structure ? "identical" : "differs") +
              ", swarm trace " + (same_trace ? "identical" : "differs") + ", report " +
              (same_report ? "identical" : "differs")};
}

Outcome report_format() {
  pipeline::RunReport r;
  r.dataset_name = "CIFAR-10";
  r.template_name = "VGG-16";
  r.epsilon = 0.020;
  r.min_pts = 5;
  r.has_baseline = true;
  r.baseline = {0.9366, 14728266, 313201664};
  r.has_final = true;
  r.final_metrics = {0.9366, 2757000, 93520000};
  r.param_drop_pct = 81.28;
  r.flop_drop_pct = 70.25;
  const std::string table = pipeline::report_table(r);
  std::istringstream lines(table);
  std::string header, base, pruned;
  std::getline(lines, header);
  std::getline(lines, base);
  std::getline(lines, pruned);
  std::istringstream hs(header);
  std::vector<std::string> cols;
  for (std::string w; hs >> w;) cols.push_back(w);
  const std::vector<std::string> expected = {"Dataset", "Model", "Acc/%", "Acc.drop/%", "Parameters",
                                             "Parameters.drop/%", "FLOPs", "FLOPs.drop/%"};
  bool desk_table = true;
  if (g_desk_ok) {
    const auto dir = desk_config(fs::path("acceptance_runs") / "first").run_dir();
    desk_table = read_file(dir / "report.txt").rfind(header.substr(0, 7), 0) == 0;
  }
  const bool ok = cols == expected && pruned.find("0.020, 5") != std::string::npos &&
                  pruned.find("81.28%") != std::string::npos && pruned.find("70.25%") != std::string::npos &&
                  base.find("14.73M") != std::string::npos && desk_table;
  return {ok, "columns: " + header};
}

}  // namespace

int main() {
  report(1, "accounting calibration", accounting);
  report(2, "DBSCAN oracle equivalence", dbscan_oracle);
  report(3, "similarity properties", similarity_properties);
  report(4, "gradient correctness", gradients);
  report(5, "PSO convergence", pso_convergence);
  report(6, "inertia exactness", inertia_exact);
  report(7, "end-to-end desk run", desk_run);
  report(8, "determinism", determinism);
  report(9, "report format", report_format);
  std::printf("%d of 9 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
