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

#include <doctest.h>

#include <filesystem>
#include <iterator>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "cluster/coarse.hpp"
#include "common/error.hpp"
#include "common/fileio.hpp"
#include "nncore/trainer.hpp"
#include "pipeline/config.hpp"
#include "pipeline/dataset.hpp"
#include "pipeline/report.hpp"
#include "pipeline/run.hpp"

using namespace chanprune;
using namespace chanprune::pipeline;
namespace fs = std::filesystem;

namespace {

std::string cifar_record(std::uint8_t label, std::uint8_t seed) {
  std::string r(kCifarRecordBytes, '\0');
  r[0] = static_cast<char>(label);
  for (std::size_t i = 0; i < kCifarPixels; ++i) r[1 + i] = static_cast<char>((i * 7 + seed) & 0xff);
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chanprune_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig smoke_config(const fs::path& out) {
  ExperimentConfig c;
  c.template_name = "tiny4";
  c.dataset.classes = 3;
  c.dataset.train_size = 150;
  c.dataset.test_size = 60;
  c.sample_count = 32;
  c.neighborhood = {0.05, 3};
  c.swarm.population = 4;
  c.swarm.iterations = 3;
  c.swarm.proxy_epochs = 1;
  c.train.initial_lr = 0.05;
  c.train.batch_size = 32;
  c.baseline_epochs = 2;
  c.output_dir = out;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("CIFAR-10 records parse bit-exactly") {
  const std::string bytes = cifar_record(3, 1) + cifar_record(9, 2);
  const RawImages raw = parse_cifar10_batch(bytes);
  REQUIRE(raw.size() == 2);
  CHECK(raw.labels == std::vector<std::uint8_t>{3, 9});
  CHECK(raw.channels == 3);
  CHECK(raw.height == 32);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t i = 0; i < kCifarPixels; i += 97)
      CHECK(raw.pixels[r * kCifarPixels + i] == static_cast<std::uint8_t>(bytes[r * kCifarRecordBytes + 1 + i]));
  // red plane first, then green, then blue
  Normalization norm{{0, 0, 0}, {1, 1, 1}};
  const auto ds = to_dataset(raw, 10, norm);
  CHECK(ds.images.at(0, 1, 0, 0) == doctest::Approx(static_cast<std::uint8_t>(bytes[1 + 1024]) / 255.0));
  CHECK(ds.images.at(1, 2, 31, 31) ==
        doctest::Approx(static_cast<std::uint8_t>(bytes[kCifarRecordBytes + 3072]) / 255.0));
}

TEST_CASE("CIFAR-10 format errors carry byte offsets") {
  auto offset = [](const std::string& b) -> std::uint64_t {
    try {
      parse_cifar10_batch(b);
    } catch (const FormatError& e) {
      return e.offset();
    }
    return ~0ULL;
  };
  CHECK(offset("") == 0);
  const std::string two = cifar_record(1, 0) + cifar_record(2, 0);
  CHECK(offset(two.substr(0, two.size() - 5)) == kCifarRecordBytes);
  CHECK(offset(cifar_record(1, 0) + cifar_record(10, 0)) == kCifarRecordBytes);
  CHECK(offset(cifar_record(255, 0)) == 0);
}

TEST_CASE("CIFAR-10 directory loading and normalization") {
  const fs::path dir = scratch("cifar");
  for (int b = 1; b <= 5; ++b) {
    std::string bytes;
    for (int r = 0; r < 4; ++r) bytes += cifar_record(static_cast<std::uint8_t>((b + r) % 10), static_cast<std::uint8_t>(b * 10 + r));
    write_file_atomic(dir / ("data_batch_" + std::to_string(b) + ".bin"), bytes);
  }
  write_file_atomic(dir / "test_batch.bin", cifar_record(0, 1) + cifar_record(5, 2));
  const auto data = load_cifar10(dir);
  CHECK(data.train.size() == 20);
  CHECK(data.test.size() == 2);
  CHECK(data.train.num_classes == 10);
  for (int c = 0; c < 3; ++c) {
    double sum = 0, sq = 0;
    const std::size_t plane = 32 * 32;
    for (int s = 0; s < 20; ++s)
      for (std::size_t p = 0; p < plane; ++p) {
        const double v = data.train.images.data[(s * 3 + c) * plane + p];
        sum += v;
        sq += v * v;
      }
    const double n = 20.0 * plane;
    CHECK(sum / n == doctest::Approx(0.0).epsilon(1e-4));
    CHECK(sq / n == doctest::Approx(1.0).epsilon(1e-3));
  }
  CHECK(load_cifar10(dir, 6, 1).train.size() == 6);
  write_file_atomic(dir / "data_batch_3.bin", cifar_record(1, 0) + "abc");
  CHECK_THROWS_AS(load_cifar10(dir), FormatError);
  fs::remove(dir / "data_batch_3.bin");
  CHECK_THROWS_AS(load_cifar10(dir), IoError);
  fs::remove_all(dir);
}

TEST_CASE("synthetic data replays from its seed") {
  DatasetSpec spec;
  spec.classes = 2;
  spec.train_size = 40;
  spec.test_size = 10;
  const auto a = make_synthetic(spec), b = make_synthetic(spec);
  CHECK(a.train.images.data == b.train.images.data);
  CHECK(a.test.images.data == b.test.images.data);
  CHECK(a.train.labels == b.train.labels);
  CHECK(a.normalization == b.normalization);
  spec.seed = 2;
  CHECK(make_synthetic(spec).train.images.data != a.train.images.data);
  spec.classes = 1;
  CHECK_THROWS_AS(make_synthetic(spec), InvalidArgument);
  spec.name = "imagenet";
  CHECK_THROWS_AS(load_dataset(spec), InvalidArgument);
}

TEST_CASE("image sampling") {
  DatasetSpec spec;
  spec.train_size = 300;
  spec.test_size = 10;
  const auto data = make_synthetic(spec);
  const auto all = sample_images(data.train, 300, 4);
  CHECK(std::set<std::size_t>(all.indices.begin(), all.indices.end()).size() == 300);
  CHECK(sample_images(data.train, 100, 9).indices == sample_images(data.train, 100, 9).indices);

  // seeded-shuffle oracle straight from the engine
  std::mt19937_64 eng(9);
  std::vector<std::size_t> order(300);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 300; i > 1; --i) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % i;
    std::uint64_t x;
    do x = eng(); while (x >= limit);
    std::swap(order[i - 1], order[x % i]);
  }
  order.resize(100);
  const auto s = sample_images(data.train, 100, 9);
  CHECK(s.indices == order);
  CHECK(s.images.n == 100);
  CHECK(s.images.sample(7)[5] == data.train.images.sample(static_cast<int>(order[7]))[5]);
  CHECK_THROWS_AS(sample_images(data.train, 301, 1), InvalidArgument);
}

TEST_CASE("retrain epoch scaling") {
  CHECK(retrain_epochs(160, 1000, 1000) == 160);
  CHECK(retrain_epochs(160, 31459, 9352) == 538);
  CHECK(retrain_epochs(10, 300, 100) == 30);
  CHECK_THROWS_AS(retrain_epochs(160, 100, 101), InvalidArgument);
  CHECK_THROWS_AS(retrain_epochs(160, 0, 0), InvalidArgument);
}

TEST_CASE("config YAML round trip and fingerprint scope") {
  ExperimentConfig c = smoke_config("somewhere");
  c.swarm.sync = swarm::GbestSync::kImmediate;
  c.train.lr_drops = {{0.3, 5}, {0.9, 2}};
  c.dataset.noise = 0.123456789;
  c.resume = true;
  const ExperimentConfig back = parse_config_yaml(config_to_yaml(c));
  CHECK(back.canonical_yaml() == c.canonical_yaml());
  CHECK(config_to_yaml(back) == config_to_yaml(c));
  CHECK(back.resume);
  CHECK(back.output_dir == c.output_dir);

  ExperimentConfig d = c;
  d.output_dir = "elsewhere";
  d.resume = false;
  d.swarm.workers = 4;
  CHECK(d.fingerprint() == c.fingerprint());
  d.neighborhood.epsilon = 0.06;
  CHECK(d.fingerprint() != c.fingerprint());
  CHECK(c.run_dir().filename().string().rfind("tiny4-", 0) == 0);
  CHECK(c.run_dir().filename().string().find("-s5") != std::string::npos);

  CHECK_THROWS_AS(parse_config_yaml("swarm: {sync: sometimes}"), InvalidArgument);
  CHECK_THROWS_AS(parse_config_yaml("cluster: [1, 2"), InvalidArgument);
  ExperimentConfig bad;
  bad.sample_count = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK(parse_config_yaml("").canonical_yaml() == ExperimentConfig{}.canonical_yaml());
}

TEST_CASE("count formatting and table layout") {
  CHECK(format_count(14728266) == "14.73M");
  CHECK(format_count(313201664) == "313.20M");
  CHECK(format_count(18900) == "18.90K");
  CHECK(format_count(999) == "999");
  RunReport r;
  r.dataset_name = "CIFAR-10";
  r.template_name = "vgg16-cifar";
  r.epsilon = 0.02;
  r.min_pts = 5;
  r.has_baseline = true;
  r.baseline = {0.9366, 14728266, 313201664};
  r.has_final = true;
  r.final_metrics = {0.9370, 2757000, 93520000};
  r.param_drop_pct = 81.28;
  r.flop_drop_pct = 70.25;
  const std::string t = report_table(r);
  std::istringstream lines(t);
  std::string header, base, pruned;
  std::getline(lines, header);
  std::getline(lines, base);
  std::getline(lines, pruned);
  std::istringstream hs(header);
  std::vector<std::string> cols{std::istream_iterator<std::string>(hs), {}};
  CHECK(cols == std::vector<std::string>{"Dataset", "Model", "Acc/%", "Acc.drop/%", "Parameters",
                                         "Parameters.drop/%", "FLOPs", "FLOPs.drop/%"});
  CHECK(base.find("93.66") != std::string::npos);
  CHECK(pruned.find("0.020, 5") != std::string::npos);
  CHECK(pruned.find("81.28%") != std::string::npos);
  CHECK(pruned.find("70.25%") != std::string::npos);
  CHECK(pruned.find("-0.04") != std::string::npos);
  // columns line up
  CHECK(header.find("Parameters ") == base.find("14.73M"));
}

TEST_CASE("report JSON round trip") {
  RunReport r;
  r.status = "complete";
  r.template_name = "tiny4";
  r.dataset_name = "synthetic";
  r.epsilon = 0.05;
  r.min_pts = 3;
  r.seed = 11;
  r.config_fingerprint = "00ff";
  r.batch_size = 32;
  r.baseline_epochs = 4;
  r.retrain_epochs = 9;
  r.normalization = {{0.1, 0.2, 0.3}, {1.5, 1.25, 1.125}};
  r.has_baseline = true;
  r.baseline = {0.875, 18900, 1587200};
  r.original = {{16, 16, 32, 32}};
  r.has_coarse = true;
  r.coarse = {{9, 7, 27, 28}};
  r.has_search = true;
  r.final_structure = {{6, 7, 24, 25}};
  r.search_fitness = 0.9;
  r.has_final = true;
  r.final_metrics = {0.86, 9242, 582208};
  r.param_drop_pct = 51.1005291005291;
  r.flop_drop_pct = 63.318548387096776;
  r.stage_seconds = {{"baseline", 1.5}};
  const RunReport back = report_from_json(nlohmann::json::parse(report_to_json(r).dump()));
  CHECK(back.same_results(r));
  CHECK(back.stage_seconds == r.stage_seconds);
  RunReport partial;
  partial.status = "failed";
  partial.failed_stage = "coarse";
  partial.error = "boom";
  CHECK(report_from_json(report_to_json(partial)).same_results(partial));
}

TEST_CASE("coarse widths shrink as epsilon grows on a trained model") {
  DatasetSpec spec;
  spec.train_size = 120;
  spec.test_size = 20;
  const auto data = make_synthetic(spec);
  const auto tmpl = arch::builtin_template("tiny4").with_num_classes(data.train.num_classes);
  nn::Network<float> net(tmpl, 1);
  nn::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 32;
  cfg.initial_lr = 0.05;
  nn::train(net, data.train, nullptr, cfg);
  const auto sample = sample_images(data.train, 64, 2);
  int prev = 1 << 30;
  for (double eps : {0.001, 0.01, 0.03, 0.05, 0.1, 0.2, 0.4, 0.8, 1.0}) {
    const auto r = cluster::coarse_prune(tmpl, net, sample.images, {eps, 3});
    const int total = std::accumulate(r.structure.channels.begin(), r.structure.channels.end(), 0);
    CHECK(total <= prev);
    prev = total;
  }
}

TEST_CASE("smoke run, determinism and artifact round trips") {
  const fs::path out = scratch("smoke");
  const ExperimentConfig c = smoke_config(out / "a");
  const RunReport r = run(c);
  INFO(r.error);
  REQUIRE(r.status == "complete");
  CHECK(r.has_baseline);
  CHECK(r.has_coarse);
  CHECK(r.has_search);
  CHECK(r.has_final);
  CHECK(r.dataset_name == "synthetic");
  CHECK(r.original == arch::NetworkStructure{{16, 16, 32, 32}});
  CHECK(r.retrain_epochs >= c.baseline_epochs);
  CHECK(r.stage_seconds.size() == 4);
  const auto tmpl = arch::builtin_template("tiny4").with_num_classes(3);
  const auto drops = arch::compression_report(tmpl, tmpl.original_structure(), r.final_structure);
  CHECK(drops.param_drop_pct == r.param_drop_pct);
  CHECK(drops.flop_drop_pct == r.flop_drop_pct);
  CHECK(r.final_metrics.params == arch::param_count(tmpl, r.final_structure));
  CHECK(r.retrain_epochs == retrain_epochs(c.baseline_epochs, tmpl.flops_count(), r.final_metrics.flops));

  const fs::path dir = c.run_dir();
  for (const char* f : {"config.yaml", "baseline.ckpt", "baseline.json", "baseline_trace.csv", "coarse.json",
                        "swarm_state.json", "swarm_trace.jsonl", "search.json", "final.ckpt", "final.json",
                        "report.json", "report.txt"})
    CHECK_MESSAGE(fs::exists(dir / f), f);
  CHECK(load_report(dir).same_results(r));
  CHECK(load_config(dir / "config.yaml").canonical_yaml() == c.canonical_yaml());

  ExperimentConfig again = c;
  again.output_dir = out / "b";
  const RunReport r2 = run(again);
  CHECK(r2.same_results(r));
  CHECK(read_file(again.run_dir() / "swarm_trace.jsonl") == read_file(dir / "swarm_trace.jsonl"));
  CHECK(read_file(again.run_dir() / "final.ckpt") == read_file(dir / "final.ckpt"));

  // stage subcommands reuse earlier artifacts
  const RunReport partial = run_stages(c, Stage::kCoarse, Stage::kCoarse);
  CHECK(partial.status == "partial");
  CHECK(partial.coarse == r.coarse);
  CHECK_FALSE(partial.has_final);
  fs::remove_all(out);
}

TEST_CASE("resume after an interrupted search matches an uninterrupted run") {
  const fs::path out = scratch("resume");
  ExperimentConfig c = smoke_config(out / "full");
  c.swarm.iterations = 4;
  const RunReport full = run(c);
  REQUIRE(full.status == "complete");

  ExperimentConfig k = c;
  k.output_dir = out / "killed";
  RunHooks hooks;
  hooks.after_search_iteration = [](const swarm::SwarmState& st, const swarm::SearchTrace&) {
    if (st.iteration == 2) throw std::runtime_error("simulated kill");
  };
  const RunReport killed = run(k, hooks);
  CHECK(killed.status == "failed");
  CHECK(killed.failed_stage == "search");
  CHECK(killed.has_coarse);
  CHECK_FALSE(killed.has_search);
  CHECK(load_report(k.run_dir()).failed_stage == "search");
  CHECK(fs::exists(k.run_dir() / "swarm_state.json"));

  k.resume = true;
  const RunReport resumed = run(k);
  INFO(resumed.error);
  CHECK(resumed.status == "complete");
  CHECK(resumed.same_results(full));
  CHECK(read_file(k.run_dir() / "swarm_trace.jsonl") == read_file(c.run_dir() / "swarm_trace.jsonl"));
  fs::remove_all(out);
}

TEST_CASE("stage failures are recorded with the stage name") {
  const fs::path out = scratch("fail");
  ExperimentConfig c = smoke_config(out);
  c.dataset.name = "cifar10";
  c.dataset.path = out / "missing";
  const RunReport r = run(c);
  CHECK(r.status == "failed");
  CHECK(r.failed_stage == "baseline");
  CHECK_FALSE(r.error.empty());
  CHECK(fs::exists(c.run_dir() / "report.json"));

  ExperimentConfig s = smoke_config(out);
  s.sample_count = 100000;
  const RunReport r2 = run(s);
  CHECK(r2.failed_stage == "coarse");
  CHECK(r2.has_baseline);
  fs::remove_all(out);
}
