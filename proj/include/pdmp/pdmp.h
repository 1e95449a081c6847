// Copyright 2026 The pdmp Authors
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

/* Stable C interface to the pdmp solver library. Every object is an opaque
 * handle released with its _free function; every fallible call returns a
 * pdmp_status and leaves a description in pdmp_last_error_message(). */

#ifndef PDMP_PDMP_H_
#define PDMP_PDMP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(PDMP_BUILDING_LIBRARY)
#define PDMP_API __attribute__((visibility("default")))
#else
#define PDMP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pdmp_status {
  PDMP_OK = 0,
  PDMP_ERR_INVALID_TOPOLOGY = 1,
  PDMP_ERR_CONSTRUCTION_FAILURE = 2,
  PDMP_ERR_ASSUMPTION_VIOLATION = 3,
  PDMP_ERR_INVALID_OBJECTIVE = 4,
  PDMP_ERR_INVALID_PARTITION = 5,
  PDMP_ERR_PARSE = 6,
  PDMP_ERR_UNSUPPORTED_DATASET = 7,
  PDMP_ERR_STEPSIZE_VIOLATION = 8,
  PDMP_ERR_INVALID_INPUT = 9,
  PDMP_ERR_DEGENERATE_CONFIGURATION = 10,
  PDMP_ERR_DIVERGENCE = 11,
  PDMP_ERR_INVALID_ETA = 12,
  PDMP_ERR_CERTIFICATION_FAILURE = 13,
  PDMP_ERR_INNER_SOLVE_FAILURE = 14,
  PDMP_ERR_REFERENCE_FAILURE = 15,
  PDMP_ERR_CONFIG = 16,
  PDMP_ERR_IO = 17,
  PDMP_ERR_INTERNAL = 100
} pdmp_status;

typedef struct pdmp_graph pdmp_graph;
typedef struct pdmp_objective pdmp_objective;
typedef struct pdmp_solver pdmp_solver;

typedef enum pdmp_b_kind { PDMP_B_LAPLACIAN = 0, PDMP_B_BETA_LAPLACIAN = 1 } pdmp_b_kind;
typedef enum pdmp_engine { PDMP_ENGINE_COMPACT = 0, PDMP_ENGINE_AGENTWISE = 1 } pdmp_engine;
typedef enum pdmp_comm { PDMP_COMM_T = 0, PDMP_COMM_T_PLUS_1 = 1 } pdmp_comm;

PDMP_API const char* pdmp_version(void);
PDMP_API const char* pdmp_status_string(pdmp_status status);
/* Message of the most recent failure on the calling thread ("" if none). */
PDMP_API const char* pdmp_last_error_message(void);
PDMP_API void pdmp_string_free(char* s);

/* Graphs. Agents are 0-indexed; edges are (i, j) pairs with i < j. */
PDMP_API pdmp_status pdmp_graph_cycle(int n, pdmp_graph** out);
PDMP_API pdmp_status pdmp_graph_path(int n, pdmp_graph** out);
PDMP_API pdmp_status pdmp_graph_complete(int n, pdmp_graph** out);
PDMP_API pdmp_status pdmp_graph_ring_lattice(int n, int k, pdmp_graph** out);
PDMP_API pdmp_status pdmp_graph_k_regular(int n, int k, uint64_t seed, pdmp_graph** out);
/* `pairs` holds 2 * edge_count vertex indices. */
PDMP_API pdmp_status pdmp_graph_from_edges(int n, const int* pairs, size_t edge_count, pdmp_graph** out);
PDMP_API int pdmp_graph_agents(const pdmp_graph* g);
PDMP_API int pdmp_graph_edge_count(const pdmp_graph* g);
/* Writes up to `capacity` pairs (2 * capacity ints). */
PDMP_API pdmp_status pdmp_graph_edges(const pdmp_graph* g, int* pairs, size_t capacity);
PDMP_API pdmp_status pdmp_graph_spectral(const pdmp_graph* g, pdmp_b_kind kind, double beta, double* rho_b,
                                         double* rho_ata, double* s_aat);
PDMP_API void pdmp_graph_free(pdmp_graph* g);

/* Objectives. */
PDMP_API pdmp_status pdmp_objective_quadratic(const double* c, const double* b, int n, pdmp_objective** out);
PDMP_API pdmp_status pdmp_objective_random_quadratic(int n, uint64_t seed, int64_t c_lo, int64_t c_hi,
                                                     int64_t b_lo, int64_t b_hi, pdmp_objective** out);
/* subsample = 0 keeps all points. */
PDMP_API pdmp_status pdmp_objective_logistic_libsvm(const char* path, int n, double nu, int subsample,
                                                    uint64_t seed, pdmp_objective** out);
PDMP_API pdmp_status pdmp_objective_moduli(const pdmp_objective* obj, double* m, double* L, int* dim,
                                           int* agents);
/* Consensus minimizer (dim values) for the objective on graph g. */
PDMP_API pdmp_status pdmp_reference_solution(const pdmp_graph* g, const pdmp_objective* obj, double* x_star);
PDMP_API void pdmp_objective_free(pdmp_objective* obj);

/* Stepsize theory. */
PDMP_API pdmp_status pdmp_alpha_bound(double eta, double L, double rho_b, int T, double* out);

typedef struct pdmp_rate {
  double beta_max;
  double eta;
  double alpha_max;
  double delta;
  double contraction;
  double d;
  double e;
  double g;
  int beta_laplacian_regime;
  int extra_regime;
  int beta_bound_relaxed;
} pdmp_rate;

/* eta <= 0 selects the midpoint of the admissible interval. */
PDMP_API pdmp_status pdmp_certificate(const pdmp_graph* g, const pdmp_objective* obj, double alpha, double beta,
                                      int T, pdmp_b_kind kind, int relax_beta_bound, double eta, pdmp_rate* out);

/* Primal-dual solver. */
typedef struct pdmp_solver_options {
  double alpha;
  double beta;
  int T;
  pdmp_b_kind b_kind;
  pdmp_engine engine;
  pdmp_comm comm;
} pdmp_solver_options;

/* x0 holds agents * dim values, agent-major; NULL starts from zero. */
PDMP_API pdmp_status pdmp_solver_create(const pdmp_graph* g, const pdmp_objective* obj,
                                        const pdmp_solver_options* opts, const double* x0, pdmp_solver** out);
PDMP_API pdmp_status pdmp_solver_step(pdmp_solver* s, int64_t count);
PDMP_API pdmp_status pdmp_solver_counters(const pdmp_solver* s, int64_t* iter, int64_t* comm_rounds,
                                          int64_t* grad_evals);
/* agents * dim values. */
PDMP_API pdmp_status pdmp_solver_primal(const pdmp_solver* s, double* out, size_t len);
/* edge_count * dim values. */
PDMP_API pdmp_status pdmp_solver_dual(const pdmp_solver* s, double* out, size_t len);
PDMP_API void pdmp_solver_free(pdmp_solver* s);

/* Experiments. `kind` may be NULL when the config names its experiment;
 * `overrides` are "dotted.key=value" strings; out_dir NULL uses the
 * config's output.dir. On return *exit_status is 0 when every run and
 * monitor succeeded, 1 otherwise; *report (free with pdmp_string_free)
 * receives a human-readable summary. */
PDMP_API pdmp_status pdmp_experiment_run(const char* config_json, const char* base_dir, const char* kind,
                                         const char* const* overrides, size_t override_count,
                                         const char* out_dir, int* exit_status, char** report);
/* Fully defaulted configuration for a kind, as JSON. */
PDMP_API pdmp_status pdmp_default_config(const char* kind, char** out);

#ifdef __cplusplus
}
#endif

#endif  /* PDMP_PDMP_H_ */
