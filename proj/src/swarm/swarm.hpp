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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "archspec/archspec.hpp"
#include "common/rng.hpp"

namespace chanprune::swarm {

using arch::NetworkStructure;

// When a particle's new personal best is allowed to move the global best.
enum class GbestSync {
  kEndOfIteration,  // all particles of an iteration see the previous gbest
  kImmediate,       // gbest may change between particles of one iteration
};

struct SwarmConfig {
  int population = 20;
  int iterations = 30;
  double v_max = 4.0;
  double alpha1 = 2.0;
  double alpha2 = 2.0;
  double learning_rate = 2.0;  // position step multiplier
  double w_ini = 0.9;
  double w_snd = 0.4;
  int proxy_epochs = 2;
  std::uint64_t seed = 0;
  GbestSync sync = GbestSync::kEndOfIteration;
  int workers = 1;  // parallel fitness evaluations (end-of-iteration sync only)

  void validate() const;
};

class FitnessEvaluator {
 public:
  virtual ~FitnessEvaluator() = default;
  // Must be deterministic; called concurrently when workers > 1.
  virtual double evaluate(const NetworkStructure& structure) = 0;
};

class FunctionEvaluator final : public FitnessEvaluator {
 public:
  explicit FunctionEvaluator(std::function<double(const NetworkStructure&)> fn) : fn_(std::move(fn)) {}
  double evaluate(const NetworkStructure& s) override { return fn_(s); }

 private:
  std::function<double(const NetworkStructure&)> fn_;
};

// Source of the uniform [0, 1) factors in the velocity update.
class UniformSource {
 public:
  virtual ~UniformSource() = default;
  virtual double next() = 0;
};

class RngUniformSource final : public UniformSource {
 public:
  explicit RngUniformSource(Rng& rng) : rng_(rng) {}
  double next() override { return rng_.uniform01(); }

 private:
  Rng& rng_;
};

struct Particle {
  std::vector<double> position;  // real-valued; rounded only for evaluation
  std::vector<double> velocity;
  NetworkStructure evaluated;    // structure submitted at the last evaluation
  double fitness = 0.0;
  NetworkStructure pbest;
  double pbest_fitness = 0.0;

  bool operator==(const Particle&) const = default;
};

struct SwarmState {
  std::vector<Particle> particles;
  NetworkStructure upper;  // per-slot maximum widths
  NetworkStructure gbest;
  double gbest_fitness = 0.0;
  int iteration = 0;
  Rng rng;

  bool operator==(const SwarmState&) const = default;
};

struct TraceEvent {
  int iteration = 0;
  int particle = 0;  // 1-based
  NetworkStructure structure;
  double fitness = 0.0;
  bool is_pbest = false;
  bool is_gbest = false;

  bool operator==(const TraceEvent&) const = default;
};

struct IterationSummary {
  int iteration = 0;
  double gbest_fitness = 0.0;
  double mean_fitness = 0.0;

  bool operator==(const IterationSummary&) const = default;
};

struct SearchTrace {
  std::vector<TraceEvent> events;
  std::vector<IterationSummary> summaries;

  bool operator==(const SearchTrace&) const = default;
};

struct SearchResult {
  NetworkStructure best;
  double best_fitness = 0.0;
  SearchTrace trace;
};

// Called after initialization (iteration 0) and after every iteration.
using IterationObserver = std::function<void(const SwarmState&, const SearchTrace&)>;

// Linearly annealed inertia: (w_ini - w_snd)(T - t)/T + w_snd for 0 <= t <= T.
double inertia(int t, const SwarmConfig& config);

// Per layer: w*v + alpha1*r1*(pbest - x) + alpha2*r2*(gbest - x), clamped to
// [-v_max, v_max]; r1 then r2 are drawn from `rand` for each layer in turn.
std::vector<double> update_velocity(const Particle& particle, const NetworkStructure& gbest,
                                    double w, const SwarmConfig& config, UniformSource& rand);

// x + learning_rate * v, using the particle's current velocity.
std::vector<double> update_position(const Particle& particle, const SwarmConfig& config);

// Round half away from zero, then clamp to [1, upper[l]].
NetworkStructure discretize(std::span<const double> position, const NetworkStructure& upper);

// Particle i (1-based) starts at clamp(coarse[l] + i * delta, 1, upper[l]) with
// delta uniform on {-1, 0, 1} per layer, then a velocity uniform on
// [-v_max, v_max] per layer. All deltas of a particle are drawn before its
// velocities. Every particle is evaluated; gbest is the first maximum.
SwarmState init_population(const NetworkStructure& coarse, const NetworkStructure& upper,
                           const SwarmConfig& config, FitnessEvaluator& evaluator,
                           SearchTrace* trace = nullptr);

// Runs the remaining iterations of `state` up to config.iterations.
SearchResult continue_search(SwarmState state, SearchTrace trace, FitnessEvaluator& evaluator,
                             const SwarmConfig& config, const IterationObserver& observer = {});

SearchResult search(const NetworkStructure& coarse, const NetworkStructure& upper,
                    FitnessEvaluator& evaluator, const SwarmConfig& config,
                    const IterationObserver& observer = {});

nlohmann::json state_to_json(const SwarmState& state);
SwarmState state_from_json(const nlohmann::json& j);
nlohmann::json event_to_json(const TraceEvent& e);
TraceEvent event_from_json(const nlohmann::json& j);
nlohmann::json summary_to_json(const IterationSummary& s);
IterationSummary summary_from_json(const nlohmann::json& j);

// One JSON object per line.
std::string trace_jsonl(const SearchTrace& trace);

}  // namespace chanprune::swarm
