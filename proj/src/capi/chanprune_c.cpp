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

#include "chanprune/chanprune.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "archspec/archspec.hpp"
#include "cluster/dbscan.hpp"
#include "common/error.hpp"
#include "featstats/featstats.hpp"
#include "pipeline/config.hpp"
#include "pipeline/dataset.hpp"
#include "pipeline/report.hpp"
#include "pipeline/run.hpp"
#include "swarm/swarm.hpp"

struct cp_template {
  chanprune::arch::ArchTemplate tmpl;
};
struct cp_config {
  chanprune::pipeline::ExperimentConfig config;
};
struct cp_report {
  chanprune::pipeline::RunReport report;
};

namespace {

thread_local std::string g_last_error;

cp_status fail(cp_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
cp_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return CP_OK;
  } catch (const chanprune::Error& e) {
    return fail(static_cast<cp_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CP_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw chanprune::InvalidArgument(what);
}

chanprune::arch::NetworkStructure structure_of(const cp_template* t, const int32_t* s, size_t n) {
  if (!s) return t->tmpl.original_structure();
  return {std::vector<int>(s, s + n)};
}

}  // namespace

extern "C" {

const char* cp_version(void) { return "1.0.0"; }

const char* cp_last_error(void) { return g_last_error.c_str(); }

const char* cp_status_name(cp_status status) {
  switch (status) {
    case CP_OK: return "ok";
    case CP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CP_ERR_BOUNDS: return "bounds";
    case CP_ERR_FORMAT: return "format";
    case CP_ERR_STRUCTURAL: return "structural";
    case CP_ERR_NUMERIC: return "numeric";
    case CP_ERR_IO: return "io";
    case CP_ERR_STAGE: return "stage";
    case CP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void cp_string_free(char* s) { std::free(s); }

cp_status cp_template_load(const char* name_or_path, cp_template** out) {
  return guarded([&] {
    require(name_or_path && out, "null argument");
    *out = new cp_template{chanprune::arch::resolve_template(name_or_path)};
  });
}

void cp_template_free(cp_template* t) { delete t; }

size_t cp_template_slot_count(const cp_template* t) {
  return t ? t->tmpl.prunable_slots().size() : 0;
}

cp_status cp_template_original(const cp_template* t, int32_t* out, size_t cap) {
  return guarded([&] {
    require(t && (out || cap == 0), "null argument");
    const auto s = t->tmpl.original_structure();
    for (size_t i = 0; i < s.size() && i < cap; ++i) out[i] = s[i];
  });
}

cp_status cp_template_params(const cp_template* t, const int32_t* structure, size_t n, uint64_t* out) {
  return guarded([&] {
    require(t && out, "null argument");
    *out = chanprune::arch::param_count(t->tmpl, structure_of(t, structure, n));
  });
}

cp_status cp_template_flops(const cp_template* t, const int32_t* structure, size_t n, uint64_t* out) {
  return guarded([&] {
    require(t && out, "null argument");
    *out = chanprune::arch::flops_count(t->tmpl, structure_of(t, structure, n));
  });
}

cp_status cp_compression(const cp_template* t, const int32_t* pruned, size_t n,
                         double* param_drop_pct, double* flop_drop_pct) {
  return guarded([&] {
    require(t && pruned && param_drop_pct && flop_drop_pct, "null argument");
    const auto r = chanprune::arch::compression_report(t->tmpl, t->tmpl.original_structure(),
                                                       structure_of(t, pruned, n));
    *param_drop_pct = r.param_drop_pct;
    *flop_drop_pct = r.flop_drop_pct;
  });
}

cp_status cp_template_yaml(const cp_template* t, char** out) {
  return guarded([&] {
    require(t && out, "null argument");
    *out = dup_string(t->tmpl.to_yaml());
  });
}

cp_status cp_similarity(const double* maps, size_t channels, size_t map_len, double* out) {
  return guarded([&] {
    require(maps && out && map_len > 0, "null argument or empty maps");
    chanprune::feat::ChannelMeanMaps m;
    m.channels = static_cast<int>(channels);
    m.height = 1;
    m.width = static_cast<int>(map_len);
    m.values.assign(maps, maps + channels * map_len);
    const auto sim = chanprune::feat::similarity(m);
    std::memcpy(out, sim.entries.data(), sim.entries.size() * sizeof(double));
  });
}

cp_status cp_dbscan(const double* distances, size_t c, double epsilon, int32_t min_pts,
                    int32_t* labels, int32_t* coarse_count) {
  return guarded([&] {
    require(distances && labels, "null argument");
    const auto a = chanprune::cluster::dbscan({distances, c * c}, c, {epsilon, min_pts});
    for (size_t i = 0; i < c; ++i) labels[i] = a.labels[i];
    if (coarse_count) *coarse_count = chanprune::cluster::coarse_channel_count(a);
  });
}

cp_status cp_inertia(int32_t t, int32_t iterations, double w_ini, double w_snd, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    chanprune::swarm::SwarmConfig sc;
    sc.iterations = iterations;
    sc.w_ini = w_ini;
    sc.w_snd = w_snd;
    sc.validate();
    *out = chanprune::swarm::inertia(t, sc);
  });
}

cp_status cp_retrain_epochs(int32_t baseline_epochs, uint64_t original_flops, uint64_t pruned_flops,
                            int32_t* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = chanprune::pipeline::retrain_epochs(baseline_epochs, original_flops, pruned_flops);
  });
}

cp_status cp_config_default(cp_config** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new cp_config{};
  });
}

cp_status cp_config_load(const char* path, cp_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new cp_config{chanprune::pipeline::load_config(path)};
  });
}

void cp_config_free(cp_config* c) { delete c; }

#define CP_CONFIG_SETTER(fn, type, field)           \
  cp_status fn(cp_config* c, type value) {          \
    return guarded([&] {                            \
      require(c != nullptr, "null config");         \
      c->config.field = value;                      \
    });                                             \
  }

CP_CONFIG_SETTER(cp_config_set_epsilon, double, neighborhood.epsilon)
CP_CONFIG_SETTER(cp_config_set_min_pts, int32_t, neighborhood.min_pts)
CP_CONFIG_SETTER(cp_config_set_particles, int32_t, swarm.population)
CP_CONFIG_SETTER(cp_config_set_iterations, int32_t, swarm.iterations)
CP_CONFIG_SETTER(cp_config_set_proxy_epochs, int32_t, swarm.proxy_epochs)
CP_CONFIG_SETTER(cp_config_set_seed, uint64_t, seed)

#undef CP_CONFIG_SETTER

cp_status cp_config_set_output_dir(cp_config* c, const char* dir) {
  return guarded([&] {
    require(c && dir, "null argument");
    c->config.output_dir = dir;
  });
}

cp_status cp_config_set_resume(cp_config* c, int resume) {
  return guarded([&] {
    require(c != nullptr, "null config");
    c->config.resume = resume != 0;
  });
}

cp_status cp_config_yaml(const cp_config* c, char** out) {
  return guarded([&] {
    require(c && out, "null argument");
    *out = dup_string(chanprune::pipeline::config_to_yaml(c->config));
  });
}

cp_status cp_config_run_dir(const cp_config* c, char** out) {
  return guarded([&] {
    require(c && out, "null argument");
    *out = dup_string(c->config.run_dir().string());
  });
}

cp_status cp_run(const cp_config* c, cp_stage first, cp_stage last, cp_report** out) {
  cp_status st = guarded([&] {
    require(c && out, "null argument");
    require(first >= CP_STAGE_BASELINE && last <= CP_STAGE_RETRAIN, "unknown stage");
    *out = new cp_report{chanprune::pipeline::run_stages(
        c->config, static_cast<chanprune::pipeline::Stage>(first),
        static_cast<chanprune::pipeline::Stage>(last))};
  });
  if (st == CP_OK && (*out)->report.status == "failed")
    return fail(CP_ERR_STAGE, (*out)->report.failed_stage + ": " + (*out)->report.error);
  return st;
}

cp_status cp_report_load(const char* path, cp_report** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new cp_report{chanprune::pipeline::load_report(path)};
  });
}

void cp_report_free(cp_report* r) { delete r; }

cp_status cp_report_json(const cp_report* r, char** out) {
  return guarded([&] {
    require(r && out, "null argument");
    *out = dup_string(chanprune::pipeline::report_to_json(r->report).dump(2));
  });
}

cp_status cp_report_table(const cp_report* r, char** out) {
  return guarded([&] {
    require(r && out, "null argument");
    *out = dup_string(chanprune::pipeline::report_table(r->report));
  });
}

int cp_report_complete(const cp_report* r) { return r && r->report.status == "complete"; }

}  // extern "C"
