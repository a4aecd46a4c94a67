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

#include "swarm/swarm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "common/error.hpp"

namespace chanprune::swarm {

namespace {

double evaluate_or_abort(FitnessEvaluator& evaluator, const NetworkStructure& s, int particle,
                         int iteration) {
  try {
    return evaluator.evaluate(s);
  } catch (const std::exception& e) {
    throw StageError("search", "fitness evaluation failed for particle " + std::to_string(particle) +
                                   " at iteration " + std::to_string(iteration) + ": " + e.what());
  }
}

// Evaluates particles[i].evaluated for every i, possibly on several threads.
void evaluate_all(std::vector<Particle>& particles, FitnessEvaluator& evaluator, int iteration,
                  int workers) {
  const int n = static_cast<int>(particles.size());
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i)
      particles[i].fitness = evaluate_or_abort(evaluator, particles[i].evaluated, i + 1, iteration);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        particles[i].fitness = evaluate_or_abort(evaluator, particles[i].evaluated, i + 1, iteration);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(workers, n); ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double mean_fitness(const std::vector<Particle>& particles) {
  double sum = 0;
  for (const auto& p : particles) sum += p.fitness;
  return sum / static_cast<double>(particles.size());
}

}  // namespace

void SwarmConfig::validate() const {
  if (population < 1) throw InvalidArgument("population must be >= 1");
  if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
  if (!(v_max > 0)) throw InvalidArgument("v_max must be > 0");
  if (!(w_ini >= w_snd && w_snd >= 0)) throw InvalidArgument("inertia requires w_ini >= w_snd >= 0");
  if (proxy_epochs < 1) throw InvalidArgument("proxy_epochs must be >= 1");
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
}

double inertia(int t, const SwarmConfig& config) {
  const int T = config.iterations;
  if (t < 0 || t > T)
    throw InvalidArgument("inertia iteration " + std::to_string(t) + " outside [0, " +
                          std::to_string(T) + "]");
  return (config.w_ini - config.w_snd) * static_cast<double>(T - t) / static_cast<double>(T) +
         config.w_snd;
}

std::vector<double> update_velocity(const Particle& particle, const NetworkStructure& gbest,
                                    double w, const SwarmConfig& config, UniformSource& rand) {
  const std::size_t L = particle.position.size();
  std::vector<double> v(L);
  for (std::size_t l = 0; l < L; ++l) {
    const double x = particle.position[l];
    const double r1 = rand.next();
    const double r2 = rand.next();
    const double raw = w * particle.velocity[l] + config.alpha1 * r1 * (particle.pbest[l] - x) +
                       config.alpha2 * r2 * (gbest[l] - x);
    v[l] = std::clamp(raw, -config.v_max, config.v_max);
  }
  return v;
}

std::vector<double> update_position(const Particle& particle, const SwarmConfig& config) {
  std::vector<double> x(particle.position.size());
  for (std::size_t l = 0; l < x.size(); ++l)
    x[l] = particle.position[l] + config.learning_rate * particle.velocity[l];
  return x;
}

NetworkStructure discretize(std::span<const double> position, const NetworkStructure& upper) {
  NetworkStructure s;
  s.channels.resize(position.size());
  for (std::size_t l = 0; l < position.size(); ++l) {
    const double r = std::round(position[l]);  // halves away from zero
    s.channels[l] = static_cast<int>(std::clamp(r, 1.0, static_cast<double>(upper[l])));
  }
  return s;
}

SwarmState init_population(const NetworkStructure& coarse, const NetworkStructure& upper,
                           const SwarmConfig& config, FitnessEvaluator& evaluator,
                           SearchTrace* trace) {
  config.validate();
  if (coarse.size() != upper.size() || coarse.size() == 0)
    throw InvalidArgument("coarse structure and bounds must have the same non-zero length");
  for (std::size_t l = 0; l < coarse.size(); ++l)
    if (coarse[l] < 1 || coarse[l] > upper[l])
      throw BoundsError("coarse structure slot " + std::to_string(l) + " outside [1, " +
                        std::to_string(upper[l]) + "]");

  SwarmState state;
  state.upper = upper;
  state.rng = Rng(config.seed);
  const std::size_t L = coarse.size();
  for (int i = 1; i <= config.population; ++i) {
    Particle p;
    p.position.resize(L);
    p.velocity.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
      const int delta = static_cast<int>(state.rng.uniform_index(3)) - 1;
      p.position[l] = std::clamp(coarse[l] + i * delta, 1, upper[l]);
    }
    for (std::size_t l = 0; l < L; ++l) p.velocity[l] = state.rng.uniform(-config.v_max, config.v_max);
    p.evaluated = discretize(p.position, upper);
    state.particles.push_back(std::move(p));
  }
  evaluate_all(state.particles, evaluator, 0, config.workers);

  for (auto& p : state.particles) {
    p.pbest = p.evaluated;
    p.pbest_fitness = p.fitness;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < state.particles.size(); ++i)
    if (state.particles[i].pbest_fitness > state.particles[best].pbest_fitness) best = i;
  state.gbest = state.particles[best].pbest;
  state.gbest_fitness = state.particles[best].pbest_fitness;

  if (trace) {
    for (std::size_t i = 0; i < state.particles.size(); ++i) {
      const auto& p = state.particles[i];
      trace->events.push_back({0, static_cast<int>(i + 1), p.evaluated, p.fitness, true, i == best});
    }
    trace->summaries.push_back({0, state.gbest_fitness, mean_fitness(state.particles)});
  }
  return state;
}

SearchResult continue_search(SwarmState state, SearchTrace trace, FitnessEvaluator& evaluator,
                             const SwarmConfig& config, const IterationObserver& observer) {
  config.validate();
  if (static_cast<int>(state.particles.size()) != config.population)
    throw InvalidArgument("swarm state population does not match the configuration");
  RngUniformSource rand(state.rng);
  const bool immediate = config.sync == GbestSync::kImmediate;

  // pbest then gbest, strictly-greater replacement; records the trace event.
  auto settle = [&](std::size_t i, int t) {
    Particle& p = state.particles[i];
    TraceEvent ev{t, static_cast<int>(i + 1), p.evaluated, p.fitness, false, false};
    if (p.fitness > p.pbest_fitness) {
      p.pbest = p.evaluated;
      p.pbest_fitness = p.fitness;
      ev.is_pbest = true;
    }
    if (p.pbest_fitness > state.gbest_fitness) {
      state.gbest = p.pbest;
      state.gbest_fitness = p.pbest_fitness;
      ev.is_gbest = true;
    }
    trace.events.push_back(std::move(ev));
  };

  for (int t = state.iteration + 1; t <= config.iterations; ++t) {
    const double w = inertia(t, config);
    for (std::size_t i = 0; i < state.particles.size(); ++i) {
      Particle& p = state.particles[i];
      p.velocity = update_velocity(p, state.gbest, w, config, rand);
      p.position = update_position(p, config);
      p.evaluated = discretize(p.position, state.upper);
      if (immediate) {
        p.fitness = evaluate_or_abort(evaluator, p.evaluated, static_cast<int>(i + 1), t);
        settle(i, t);
      }
    }
    if (!immediate) {
      evaluate_all(state.particles, evaluator, t, config.workers);
      for (std::size_t i = 0; i < state.particles.size(); ++i) settle(i, t);
    }
    state.iteration = t;
    trace.summaries.push_back({t, state.gbest_fitness, mean_fitness(state.particles)});
    if (observer) observer(state, trace);
  }
  return {state.gbest, state.gbest_fitness, std::move(trace)};
}

SearchResult search(const NetworkStructure& coarse, const NetworkStructure& upper,
                    FitnessEvaluator& evaluator, const SwarmConfig& config,
                    const IterationObserver& observer) {
  SearchTrace trace;
  SwarmState state = init_population(coarse, upper, config, evaluator, &trace);
  if (observer) observer(state, trace);
  return continue_search(std::move(state), std::move(trace), evaluator, config, observer);
}

nlohmann::json state_to_json(const SwarmState& state) {
  nlohmann::json particles = nlohmann::json::array();
  for (const auto& p : state.particles) {
    particles.push_back({{"position", p.position},
                         {"velocity", p.velocity},
                         {"evaluated", p.evaluated.channels},
                         {"fitness", p.fitness},
                         {"pbest", p.pbest.channels},
                         {"pbest_fitness", p.pbest_fitness}});
  }
  return {{"iteration", state.iteration},
          {"upper", state.upper.channels},
          {"gbest", state.gbest.channels},
          {"gbest_fitness", state.gbest_fitness},
          {"rng", state.rng.state()},
          {"particles", particles}};
}

SwarmState state_from_json(const nlohmann::json& j) {
  SwarmState s;
  s.iteration = j.at("iteration").get<int>();
  s.upper.channels = j.at("upper").get<std::vector<int>>();
  s.gbest.channels = j.at("gbest").get<std::vector<int>>();
  s.gbest_fitness = j.at("gbest_fitness").get<double>();
  s.rng.set_state(j.at("rng").get<std::string>());
  for (const auto& pj : j.at("particles")) {
    Particle p;
    p.position = pj.at("position").get<std::vector<double>>();
    p.velocity = pj.at("velocity").get<std::vector<double>>();
    p.evaluated.channels = pj.at("evaluated").get<std::vector<int>>();
    p.fitness = pj.at("fitness").get<double>();
    p.pbest.channels = pj.at("pbest").get<std::vector<int>>();
    p.pbest_fitness = pj.at("pbest_fitness").get<double>();
    s.particles.push_back(std::move(p));
  }
  return s;
}

nlohmann::json event_to_json(const TraceEvent& e) {
  return {{"iteration", e.iteration}, {"particle", e.particle}, {"structure", e.structure.channels},
          {"fitness", e.fitness},     {"is_pbest", e.is_pbest},  {"is_gbest", e.is_gbest}};
}

TraceEvent event_from_json(const nlohmann::json& j) {
  TraceEvent e;
  e.iteration = j.at("iteration").get<int>();
  e.particle = j.at("particle").get<int>();
  e.structure.channels = j.at("structure").get<std::vector<int>>();
  e.fitness = j.at("fitness").get<double>();
  e.is_pbest = j.at("is_pbest").get<bool>();
  e.is_gbest = j.at("is_gbest").get<bool>();
  return e;
}

nlohmann::json summary_to_json(const IterationSummary& s) {
  return {{"iteration", s.iteration}, {"gbest_fitness", s.gbest_fitness}, {"mean_fitness", s.mean_fitness}};
}

IterationSummary summary_from_json(const nlohmann::json& j) {
  return {j.at("iteration").get<int>(), j.at("gbest_fitness").get<double>(),
          j.at("mean_fitness").get<double>()};
}

std::string trace_jsonl(const SearchTrace& trace) {
  std::string out;
  for (const auto& e : trace.events) out += event_to_json(e).dump() + "\n";
  return out;
}

}  // namespace chanprune::swarm
