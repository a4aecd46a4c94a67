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

#ifndef CHANPRUNE_CHANPRUNE_H_
#define CHANPRUNE_CHANPRUNE_H_

/* C interface to the chanprune channel-pruning engine.
 *
 * Objects are opaque handles created by *_create/*_load functions and released
 * with the matching *_free. Every fallible call returns a cp_status; on
 * failure a description is available from cp_last_error() on the same thread
 * until the next call into the library. Strings returned through char** are
 * heap-allocated and must be released with cp_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CHANPRUNE_BUILDING)
#    define CP_API __declspec(dllexport)
#  else
#    define CP_API __declspec(dllimport)
#  endif
#else
#  define CP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cp_status {
  CP_OK = 0,
  CP_ERR_INVALID_ARGUMENT = 1,
  CP_ERR_BOUNDS = 2,
  CP_ERR_FORMAT = 3,
  CP_ERR_STRUCTURAL = 4,
  CP_ERR_NUMERIC = 5,
  CP_ERR_IO = 6,
  CP_ERR_STAGE = 7,
  CP_ERR_INTERNAL = 100
} cp_status;

typedef enum cp_stage {
  CP_STAGE_BASELINE = 0,
  CP_STAGE_COARSE = 1,
  CP_STAGE_SEARCH = 2,
  CP_STAGE_RETRAIN = 3
} cp_stage;

typedef struct cp_template cp_template;
typedef struct cp_config cp_config;
typedef struct cp_report cp_report;

CP_API const char* cp_version(void);
CP_API const char* cp_last_error(void);
CP_API const char* cp_status_name(cp_status status);
CP_API void cp_string_free(char* s);

/* ---- architecture templates and accounting ---- */

/* `name_or_path`: "vgg16-cifar", "tiny4", or a YAML template file. */
CP_API cp_status cp_template_load(const char* name_or_path, cp_template** out);
CP_API void cp_template_free(cp_template* t);
CP_API size_t cp_template_slot_count(const cp_template* t);
/* Writes min(cap, slot count) original widths into `out`. */
CP_API cp_status cp_template_original(const cp_template* t, int32_t* out, size_t cap);
/* `structure` may be NULL to count the original widths. */
CP_API cp_status cp_template_params(const cp_template* t, const int32_t* structure, size_t n,
                                    uint64_t* out);
CP_API cp_status cp_template_flops(const cp_template* t, const int32_t* structure, size_t n,
                                   uint64_t* out);
CP_API cp_status cp_compression(const cp_template* t, const int32_t* pruned, size_t n,
                                double* param_drop_pct, double* flop_drop_pct);
CP_API cp_status cp_template_yaml(const cp_template* t, char** out);

/* ---- clustering primitives ---- */

/* Row-major c x c matrix of |cos| between flattened channel maps given as a
 * c x map_len row-major array. */
CP_API cp_status cp_similarity(const double* maps, size_t channels, size_t map_len, double* out);
/* DBSCAN over a c x c distance matrix; labels receive cluster ids or -1 for
 * noise. `coarse_count` (may be NULL) receives clusters + noise. */
CP_API cp_status cp_dbscan(const double* distances, size_t c, double epsilon, int32_t min_pts,
                           int32_t* labels, int32_t* coarse_count);

/* ---- schedules ---- */

CP_API cp_status cp_inertia(int32_t t, int32_t iterations, double w_ini, double w_snd, double* out);
CP_API cp_status cp_retrain_epochs(int32_t baseline_epochs, uint64_t original_flops,
                                   uint64_t pruned_flops, int32_t* out);

/* ---- experiments ---- */

CP_API cp_status cp_config_default(cp_config** out);
CP_API cp_status cp_config_load(const char* path, cp_config** out);
CP_API void cp_config_free(cp_config* c);
CP_API cp_status cp_config_set_epsilon(cp_config* c, double epsilon);
CP_API cp_status cp_config_set_min_pts(cp_config* c, int32_t min_pts);
CP_API cp_status cp_config_set_particles(cp_config* c, int32_t particles);
CP_API cp_status cp_config_set_iterations(cp_config* c, int32_t iterations);
CP_API cp_status cp_config_set_proxy_epochs(cp_config* c, int32_t proxy_epochs);
CP_API cp_status cp_config_set_seed(cp_config* c, uint64_t seed);
CP_API cp_status cp_config_set_output_dir(cp_config* c, const char* dir);
CP_API cp_status cp_config_set_resume(cp_config* c, int resume);
CP_API cp_status cp_config_yaml(const cp_config* c, char** out);
CP_API cp_status cp_config_run_dir(const cp_config* c, char** out);

/* Runs stages first..last (see pipeline docs for artifact reuse). A report is
 * produced even when a stage fails; the status is then CP_ERR_STAGE. */
CP_API cp_status cp_run(const cp_config* c, cp_stage first, cp_stage last, cp_report** out);
/* `path`: a run directory or a report.json file. */
CP_API cp_status cp_report_load(const char* path, cp_report** out);
CP_API void cp_report_free(cp_report* r);
CP_API cp_status cp_report_json(const cp_report* r, char** out);
CP_API cp_status cp_report_table(const cp_report* r, char** out);
/* Non-zero when every stage completed. */
CP_API int cp_report_complete(const cp_report* r);

#ifdef __cplusplus
}
#endif

#endif /* CHANPRUNE_CHANPRUNE_H_ */
