/* Copyright 2026 The epiroute Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of libepiroute. Every call returns an epi_status; on failure the
 * message is available from epi_last_error() on the same thread until the next
 * call. Handles are opaque and must be released with the matching *_free. */

#ifndef EPIROUTE_EPIROUTE_H
#define EPIROUTE_EPIROUTE_H

#include <stddef.h>
#include <stdint.h>

#if defined(EPIROUTE_BUILDING_LIBRARY)
#define EPI_API __attribute__((visibility("default")))
#else
#define EPI_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum epi_status {
  EPI_OK = 0,
  EPI_ERR_INVALID_ARGUMENT = 1,
  EPI_ERR_CONFIG = 2,
  EPI_ERR_IO = 3,
  EPI_ERR_STATE_BUDGET = 4,
  EPI_ERR_SOLVER = 5,
  EPI_ERR_NOT_SATURATED = 6,
  EPI_ERR_TOO_FEW_SAMPLES = 7,
  EPI_ERR_INTERNAL = 99
} epi_status;

typedef enum epi_engine { EPI_ENGINE_MONOLITHIC = 0, EPI_ENGINE_FOLDED = 1 } epi_engine;

typedef struct epi_config epi_config;
typedef struct epi_model epi_model;

typedef struct epi_rates {
  double lambda, mu, gamma, eta;
  uint64_t samples[4];  /* lambda, mu, gamma, eta */
  double half_width[4]; /* 95% */
} epi_rates;

typedef struct epi_analysis {
  uint64_t states;
  uint64_t transitions;
  double mtta;                 /* average delivery delay, s */
  double transmissions;        /* exact limit from the absorption distribution */
  double transmissions_t_large; /* NaN when skipped for cost */
  double t_large;
  int truncation_warning;
  uint64_t iterations;         /* 0 for the direct solver */
  double residual;
} epi_analysis;

typedef struct epi_ode_result {
  double delay;
  double t_max;
  uint64_t clamped;
  uint64_t decreasing_steps;
} epi_ode_result;

typedef struct epi_sim_run {
  double delay;
  int32_t transmissions;
} epi_sim_run;

typedef struct epi_chi2 {
  double statistic;
  int32_t bins;
  int32_t dof;
  double critical;
  int32_t passed;
  int32_t alt_dof;
  double alt_critical;
  int32_t alt_passed;
} epi_chi2;

EPI_API const char* epi_version(void);
EPI_API const char* epi_last_error(void);
EPI_API const char* epi_status_name(epi_status s);

/* Configuration. */
EPI_API epi_status epi_config_load(const char* path, epi_config** out);
EPI_API epi_status epi_config_parse(const char* json_text, epi_config** out);
EPI_API epi_status epi_config_reference(int n_communities, int nodes, epi_config** out);
EPI_API epi_status epi_config_clone(const epi_config* cfg, epi_config** out);
EPI_API epi_status epi_config_set_nodes(epi_config* cfg, int nodes);
EPI_API epi_status epi_config_shape(const epi_config* cfg, int* n_communities, int* nodes);
/* Writes the JSON form into buf (NUL-terminated); *needed receives the full length + 1. */
EPI_API epi_status epi_config_dump(const epi_config* cfg, char* buf, size_t buf_len, size_t* needed);
EPI_API void epi_config_free(epi_config* cfg);

/* Meeting rates. */
EPI_API epi_status epi_estimate_rates(const epi_config* cfg, uint64_t runs, uint64_t seed, double dt, epi_rates* out);
EPI_API epi_status epi_rates_load(const char* path, epi_rates* out);
EPI_API epi_status epi_rates_save(const char* path, const epi_rates* rates);
/* First-meeting samples of one roaming node with `local_nodes` local nodes. */
EPI_API epi_status epi_meeting_samples(const epi_config* cfg, int local_nodes, uint64_t runs, uint64_t seed,
                                       double dt, double* out);

/* SRN engines. */
EPI_API epi_status epi_count_states(const epi_config* cfg, epi_engine engine, uint64_t max_states, uint64_t* out);
EPI_API epi_status epi_model_build(const epi_config* cfg, const epi_rates* rates, epi_engine engine,
                                   uint64_t max_states, epi_model** out);
EPI_API uint64_t epi_model_states(const epi_model* model);
EPI_API epi_status epi_model_analyze(const epi_model* model, epi_analysis* out);
/* P(delivered by grid[i]); grid ascending. */
EPI_API epi_status epi_model_cdf(const epi_model* model, const double* grid, size_t n, double* values);
EPI_API epi_status epi_model_write_edges(const epi_model* model, const char* path);
EPI_API void epi_model_free(epi_model* model);

/* Fluid model. grid/fhat may be NULL; fhat[i] = (total infected - 1)/(M - 1) at grid[i].
 * trajectory_csv may be NULL. */
EPI_API epi_status epi_ode_delay(const epi_config* cfg, const epi_rates* rates, double dt, const double* grid,
                                 size_t n, double* fhat, const char* trajectory_csv, epi_ode_result* out);

/* Mobility simulation; out holds `runs` entries. */
EPI_API epi_status epi_simulate(const epi_config* cfg, uint64_t runs, uint64_t seed, double tx_delay, double dt,
                                epi_sim_run* out);

/* Statistics. */
EPI_API epi_status epi_chi2_uniform(const uint64_t* counts, size_t cells, double alpha, epi_chi2* out);
EPI_API epi_status epi_chi2_exponential(const double* samples, size_t n, int bins, double alpha, epi_chi2* out);
EPI_API epi_status epi_percent_error(double model_value, double reference_value, double* out);

/* Writes text to path via a temporary file and rename. */
EPI_API epi_status epi_write_text_atomic(const char* path, const char* text);

#ifdef __cplusplus
}
#endif

#endif /* EPIROUTE_EPIROUTE_H */
