// Copyright 2026 The SVR-MPC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the SVR-MPC library. Every call returns an svr_status;
 * on failure svr_last_error() describes the problem (thread-local, valid until
 * the next failing call on the same thread). Handles are opaque and owned by
 * the caller, who releases them with the matching *_free function. */
#ifndef SVR_SVR_H_
#define SVR_SVR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(SVR_BUILDING_LIBRARY)
#define SVR_API __attribute__((visibility("default")))
#else
#define SVR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum svr_status {
  SVR_OK = 0,
  SVR_ERR_INVALID_ARGUMENT = 1,
  SVR_ERR_CONFIG = 2,
  SVR_ERR_IO = 3,
  SVR_ERR_NUMERICAL = 4,
  SVR_ERR_OUT_OF_RANGE = 5,
  SVR_ERR_INTERNAL = 6
} svr_status;

typedef enum svr_method {
  SVR_METHOD_BASELINE_FULL = 0,
  SVR_METHOD_RANDOM = 1,
  SVR_METHOD_NAIVE = 2,
  SVR_METHOD_SVR_SUM = 3,
  SVR_METHOD_SVR_SVD = 4
} svr_method;

typedef struct svr_task svr_task;
typedef struct svr_record svr_record;
typedef struct svr_report svr_report;

SVR_API const char* svr_last_error(void);
SVR_API const char* svr_version(void);
SVR_API const char* svr_status_name(svr_status status);

/* Strings returned through char** are heap-allocated by the library. */
SVR_API void svr_string_free(char* s);

SVR_API svr_status svr_method_parse(const char* name, svr_method* out);
SVR_API const char* svr_method_name(svr_method method);

/* ---- tasks ---- */
SVR_API size_t svr_builtin_task_count(void);
SVR_API svr_status svr_builtin_task_name(size_t index, const char** name);
SVR_API svr_status svr_task_builtin(const char* name, svr_task** out);
SVR_API svr_status svr_task_parse(const char* json_text, svr_task** out);
SVR_API svr_status svr_task_load(const char* path, svr_task** out);
SVR_API svr_status svr_task_save(const svr_task* task, const char* path);
SVR_API svr_status svr_task_to_json(const svr_task* task, char** out);
SVR_API void svr_task_free(svr_task* task);

typedef struct svr_task_info {
  const char* name; /* valid while the task lives */
  const char* kind;
  int dofs;         /* |F| of the model built with seed 0 */
  int robot_dofs;
  int control_dim;
  int horizon;
  double timestep;
  int timeout;
  int slowdown;
  double virtual_cost_per_eval;
  int trials;
  uint64_t seed;
  size_t method_count;
} svr_task_info;

SVR_API svr_status svr_task_describe(const svr_task* task, svr_task_info* out);
SVR_API svr_status svr_task_set_cost_per_eval(svr_task* task, double ticks_per_eval);

/* ---- single episodes ---- */
typedef struct svr_policy {
  svr_method method;
  int theta;
  double rho;
  int g;
  int signed_importance;
} svr_policy;

SVR_API svr_policy svr_policy_default(void);

/* Runs one MPC episode; `seed` seeds both the model layout and the planner. */
SVR_API svr_status svr_task_run(const svr_task* task, const svr_policy* policy, uint64_t seed, svr_record** out);

typedef struct svr_record_summary {
  int steps;
  int iterations;
  double mpc_cost;
  int success;
  int success_step; /* -1 when the task did not succeed */
  int diverged;
  double mean_dofs;
  double mean_tick_cost;
  int state_size;
  int control_dim;
} svr_record_summary;

SVR_API svr_status svr_record_summary_get(const svr_record* record, svr_record_summary* out);
/* Copies state `step` (0..steps) into buf, which holds `len` doubles. */
SVR_API svr_status svr_record_state(const svr_record* record, int step, double* buf, size_t len);
SVR_API svr_status svr_record_control(const svr_record* record, int step, double* buf, size_t len);
/* |C| the optimiser used at iteration `index`. */
SVR_API svr_status svr_record_iteration_dofs(const svr_record* record, int index, int* out);
SVR_API svr_status svr_record_save_json(const svr_record* record, const char* path);
SVR_API void svr_record_free(svr_record* record);

/* ---- experiments ---- */
typedef struct svr_experiment_options {
  int trials;        /* 0: the task's count */
  int has_seed;      /* 0: the task's seed base */
  uint64_t seed;
  int jobs;          /* worker threads, >= 1 */
  int keep_records;  /* write record_<label>_<trial>.json */
  const char* out_dir; /* NULL: no files */
} svr_experiment_options;

SVR_API svr_experiment_options svr_experiment_options_default(void);
SVR_API svr_status svr_experiment_run(const svr_task* task, const svr_experiment_options* options, svr_report** out);
/* NULL/0 theta or rho lists fall back to the task's sweep grid. */
SVR_API svr_status svr_experiment_sweep(const svr_task* task, const int* thetas, size_t theta_count,
                                        const double* rhos, size_t rho_count,
                                        const svr_experiment_options* options, svr_report** out);

typedef struct svr_aggregate_row {
  const char* label; /* valid while the report lives */
  svr_method method;
  int theta;
  double rho;
  int trials;
  int failures;
  double mean_cost;
  double cost_ci;
  double mean_normalized;
  double normalized_ci;
  double mean_tick_cost;
  double tick_cost_ci;
  double mean_wallclock_ms;
  double mean_dofs;
  double dofs_ci;
  double success_rate;
} svr_aggregate_row;

/* Reads aggregate.csv (or a directory holding it). */
SVR_API svr_status svr_report_load(const char* path, svr_report** out);
SVR_API size_t svr_report_row_count(const svr_report* report);
SVR_API svr_status svr_report_row(const svr_report* report, size_t index, svr_aggregate_row* out);
SVR_API svr_status svr_report_table(const svr_report* report, char** out);
SVR_API svr_status svr_report_emit_plot(const svr_report* report, const char* dir);
SVR_API void svr_report_free(svr_report* report);

/* $SVR_OUT_DIR, else "svr_out". Caller frees with svr_string_free. */
SVR_API char* svr_default_output_dir(void);

#ifdef __cplusplus
}
#endif

#endif /* SVR_SVR_H_ */
