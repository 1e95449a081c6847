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

#include "pdmp/pdmp.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "pdmp/certificate.hpp"
#include "pdmp/error.hpp"
#include "pdmp/graph.hpp"
#include "pdmp/harness.hpp"
#include "pdmp/objective.hpp"
#include "pdmp/primal_dual.hpp"
#include "pdmp/random.hpp"

struct pdmp_graph {
  pdmp::NetworkGraph graph;
};

struct pdmp_objective {
  pdmp::Objective objective;
};

struct pdmp_solver {
  std::unique_ptr<pdmp::PdSystem> system;
  std::unique_ptr<pdmp::Stepper> engine;
  pdmp::RunState state;
};

namespace {

thread_local std::string last_error;

pdmp_status fail_with(pdmp_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
pdmp_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return PDMP_OK;
  } catch (const pdmp::Error& e) {
    return fail_with(static_cast<pdmp_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail_with(PDMP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail_with(PDMP_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) pdmp::fail(pdmp::ErrorCode::kInvalidInput, what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

pdmp::BKind b_kind_of(pdmp_b_kind kind, double beta) {
  return kind == PDMP_B_BETA_LAPLACIAN ? pdmp::BKind::beta_laplacian(beta) : pdmp::BKind::laplacian();
}

pdmp_status make_graph(pdmp_graph** out, const auto& build) {
  return guarded([&] {
    require(out != nullptr, "output handle pointer is null");
    *out = new pdmp_graph{build()};
  });
}

}  // namespace

extern "C" {

const char* pdmp_version(void) { return "0.1.0"; }

const char* pdmp_status_string(pdmp_status status) {
  if (status == PDMP_OK) return "ok";
  if (status == PDMP_ERR_INTERNAL) return "internal-error";
  const int code = static_cast<int>(status);
  if (code >= 1 && code <= static_cast<int>(pdmp::ErrorCode::kIoError)) {
    return pdmp::to_string(static_cast<pdmp::ErrorCode>(code)).data();
  }
  return "unknown-status";
}

const char* pdmp_last_error_message(void) { return last_error.c_str(); }

void pdmp_string_free(char* s) { std::free(s); }

pdmp_status pdmp_graph_cycle(int n, pdmp_graph** out) {
  return make_graph(out, [&] { return pdmp::build_cycle(n); });
}

pdmp_status pdmp_graph_path(int n, pdmp_graph** out) {
  return make_graph(out, [&] { return pdmp::build_path(n); });
}

pdmp_status pdmp_graph_complete(int n, pdmp_graph** out) {
  return make_graph(out, [&] { return pdmp::build_complete(n); });
}

pdmp_status pdmp_graph_ring_lattice(int n, int k, pdmp_graph** out) {
  return make_graph(out, [&] { return pdmp::build_ring_lattice(n, k); });
}

pdmp_status pdmp_graph_k_regular(int n, int k, uint64_t seed, pdmp_graph** out) {
  return make_graph(out, [&] { return pdmp::build_k_regular_random(n, k, seed); });
}

pdmp_status pdmp_graph_from_edges(int n, const int* pairs, size_t edge_count, pdmp_graph** out) {
  return make_graph(out, [&] {
    require(pairs != nullptr || edge_count == 0, "edge array is null");
    std::vector<pdmp::Edge> edges(edge_count);
    for (size_t l = 0; l < edge_count; ++l) edges[l] = {pairs[2 * l], pairs[2 * l + 1]};
    return pdmp::NetworkGraph::from_edges(n, std::move(edges));
  });
}

int pdmp_graph_agents(const pdmp_graph* g) { return g ? g->graph.agents() : 0; }

int pdmp_graph_edge_count(const pdmp_graph* g) { return g ? g->graph.edge_count() : 0; }

pdmp_status pdmp_graph_edges(const pdmp_graph* g, int* pairs, size_t capacity) {
  return guarded([&] {
    require(g != nullptr && pairs != nullptr, "null argument");
    const auto& edges = g->graph.edges();
    require(capacity >= edges.size(), "edge buffer too small");
    for (size_t l = 0; l < edges.size(); ++l) {
      pairs[2 * l] = edges[l].i;
      pairs[2 * l + 1] = edges[l].j;
    }
  });
}

pdmp_status pdmp_graph_spectral(const pdmp_graph* g, pdmp_b_kind kind, double beta, double* rho_b,
                                double* rho_ata, double* s_aat) {
  return guarded([&] {
    require(g != nullptr, "graph is null");
    const auto sp = pdmp::spectral(g->graph, pdmp::build_constraints(g->graph, b_kind_of(kind, beta)));
    if (rho_b) *rho_b = sp.rhoB;
    if (rho_ata) *rho_ata = sp.rhoAtA;
    if (s_aat) *s_aat = sp.sAAt;
  });
}

void pdmp_graph_free(pdmp_graph* g) { delete g; }

pdmp_status pdmp_objective_quadratic(const double* c, const double* b, int n, pdmp_objective** out) {
  return guarded([&] {
    require(out != nullptr && c != nullptr && b != nullptr && n > 0, "invalid quadratic arguments");
    *out = new pdmp_objective{pdmp::quadratic_objective(std::span<const double>(c, n), std::span<const double>(b, n))};
  });
}

pdmp_status pdmp_objective_random_quadratic(int n, uint64_t seed, int64_t c_lo, int64_t c_hi, int64_t b_lo,
                                            int64_t b_hi, pdmp_objective** out) {
  return guarded([&] {
    require(out != nullptr, "output handle pointer is null");
    *out = new pdmp_objective{pdmp::random_quadratic_instance(n, seed, {c_lo, c_hi}, {b_lo, b_hi})};
  });
}

pdmp_status pdmp_objective_logistic_libsvm(const char* path, int n, double nu, int subsample, uint64_t seed,
                                           pdmp_objective** out) {
  return guarded([&] {
    require(out != nullptr && path != nullptr, "null argument");
    auto data = std::make_shared<const pdmp::Dataset>(pdmp::load_libsvm(path));
    if (subsample > 0 && subsample < data->size()) {
      data = std::make_shared<const pdmp::Dataset>(pdmp::subsample(*data, subsample, seed));
    }
    *out = new pdmp_objective{pdmp::logistic_objective(std::move(data), n, nu)};
  });
}

pdmp_status pdmp_objective_moduli(const pdmp_objective* obj, double* m, double* L, int* dim, int* agents) {
  return guarded([&] {
    require(obj != nullptr, "objective is null");
    if (m) *m = obj->objective.m();
    if (L) *L = obj->objective.L();
    if (dim) *dim = obj->objective.dim();
    if (agents) *agents = obj->objective.agents();
  });
}

pdmp_status pdmp_reference_solution(const pdmp_graph* g, const pdmp_objective* obj, double* x_star) {
  return guarded([&] {
    require(g != nullptr && obj != nullptr && x_star != nullptr, "null argument");
    require(g->graph.agents() == obj->objective.agents(), "graph and objective disagree on the agent count");
    const auto ref = pdmp::reference_solution(obj->objective, pdmp::incidence_matrix(g->graph));
    for (int c = 0; c < obj->objective.dim(); ++c) x_star[c] = ref.x_star(0, c);
  });
}

void pdmp_objective_free(pdmp_objective* obj) { delete obj; }

pdmp_status pdmp_alpha_bound(double eta, double L, double rho_b, int T, double* out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = pdmp::alpha_bound(eta, L, rho_b, T);
  });
}

pdmp_status pdmp_certificate(const pdmp_graph* g, const pdmp_objective* obj, double alpha, double beta, int T,
                             pdmp_b_kind kind, int relax_beta_bound, double eta, pdmp_rate* out) {
  return guarded([&] {
    require(g != nullptr && obj != nullptr && out != nullptr, "null argument");
    pdmp::PdConfig cfg;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.T = T;
    cfg.b_kind = b_kind_of(kind, beta);
    cfg.dim = obj->objective.dim();
    pdmp::PdSystem sys(cfg, g->graph, obj->objective);
    const pdmp::MNPair mn = pdmp::build_MN(alpha, sys.B(), T);
    const double m = obj->objective.m();
    const bool relaxed = relax_beta_bound != 0;
    pdmp::RateInputs in;
    in.alpha = alpha;
    in.beta = beta;
    in.T = T;
    in.m = m;
    in.L = obj->objective.L();
    in.eta = eta > 0 ? eta : pdmp::default_eta(m, beta, sys.spectra().rhoAtA, relaxed);
    in.spectra = sys.spectra();
    in.M = &mn.M;
    in.N = &mn.N;
    in.A = &sys.A();
    in.relax_beta_bound = relaxed;
    const pdmp::RateCertificate c = pdmp::rate_delta(in);
    *out = pdmp_rate{c.beta_max, c.eta, c.alpha_max, c.delta, c.contraction, c.d_star, c.e, c.g,
                     c.beta_laplacian_regime ? 1 : 0, c.extra_regime ? 1 : 0, c.beta_bound_relaxed ? 1 : 0};
  });
}

pdmp_status pdmp_solver_create(const pdmp_graph* g, const pdmp_objective* obj, const pdmp_solver_options* opts,
                               const double* x0, pdmp_solver** out) {
  return guarded([&] {
    require(g != nullptr && obj != nullptr && opts != nullptr && out != nullptr, "null argument");
    pdmp::PdConfig cfg;
    cfg.alpha = opts->alpha;
    cfg.beta = opts->beta;
    cfg.T = opts->T;
    cfg.b_kind = b_kind_of(opts->b_kind, opts->beta);
    cfg.dim = obj->objective.dim();
    cfg.comm = opts->comm == PDMP_COMM_T_PLUS_1 ? pdmp::CommAccounting::kSeparateDual
                                                : pdmp::CommAccounting::kPiggyback;
    auto s = std::make_unique<pdmp_solver>();
    s->system = std::make_unique<pdmp::PdSystem>(cfg, g->graph, obj->objective);
    if (opts->engine == PDMP_ENGINE_AGENTWISE) {
      s->engine = std::make_unique<pdmp::AgentwiseEngine>(*s->system);
    } else {
      s->engine = std::make_unique<pdmp::CompactEngine>(*s->system);
    }
    pdmp::Stacked start = pdmp::Stacked::Zero(obj->objective.agents(), cfg.dim);
    if (x0) start = Eigen::Map<const pdmp::Stacked>(x0, start.rows(), start.cols());
    s->state = pdmp::init(*s->system, start);
    *out = s.release();
  });
}

pdmp_status pdmp_solver_step(pdmp_solver* s, int64_t count) {
  return guarded([&] {
    require(s != nullptr && count >= 0, "invalid step arguments");
    for (int64_t k = 0; k < count; ++k) s->engine->step(s->state);
  });
}

pdmp_status pdmp_solver_counters(const pdmp_solver* s, int64_t* iter, int64_t* comm_rounds, int64_t* grad_evals) {
  return guarded([&] {
    require(s != nullptr, "solver is null");
    if (iter) *iter = s->state.iter;
    if (comm_rounds) *comm_rounds = s->state.comm_rounds;
    if (grad_evals) *grad_evals = s->state.grad_evals;
  });
}

pdmp_status pdmp_solver_primal(const pdmp_solver* s, double* out, size_t len) {
  return guarded([&] {
    require(s != nullptr && out != nullptr, "null argument");
    require(len >= static_cast<size_t>(s->state.x.size()), "primal buffer too small");
    std::memcpy(out, s->state.x.data(), sizeof(double) * s->state.x.size());
  });
}

pdmp_status pdmp_solver_dual(const pdmp_solver* s, double* out, size_t len) {
  return guarded([&] {
    require(s != nullptr && out != nullptr, "null argument");
    require(len >= static_cast<size_t>(s->state.lambda.size()), "dual buffer too small");
    std::memcpy(out, s->state.lambda.data(), sizeof(double) * s->state.lambda.size());
  });
}

void pdmp_solver_free(pdmp_solver* s) { delete s; }

pdmp_status pdmp_experiment_run(const char* config_json, const char* base_dir, const char* kind,
                                const char* const* overrides, size_t override_count, const char* out_dir,
                                int* exit_status, char** report) {
  return guarded([&] {
    if (report) *report = nullptr;
    if (exit_status) *exit_status = 1;
    std::optional<pdmp::ExperimentKind> fallback;
    if (kind) {
      fallback = pdmp::parse_experiment_kind(kind);
      if (!fallback) pdmp::fail(pdmp::ErrorCode::kConfigError, std::string("unknown experiment kind ") + kind);
    }
    std::vector<std::string> sets;
    for (size_t i = 0; i < override_count; ++i) {
      require(overrides && overrides[i], "override entry is null");
      sets.emplace_back(overrides[i]);
    }
    const pdmp::ExperimentConfig cfg =
        pdmp::parse_config(config_json ? config_json : "", base_dir ? base_dir : "", fallback, sets);
    const auto outcome = pdmp::run_experiment(cfg, out_dir ? std::filesystem::path(out_dir) : cfg.output_dir);
    if (exit_status) *exit_status = outcome.status;
    if (report) *report = copy_string(outcome.summary);
  });
}

pdmp_status pdmp_default_config(const char* kind, char** out) {
  return guarded([&] {
    require(kind != nullptr && out != nullptr, "null argument");
    const auto k = pdmp::parse_experiment_kind(kind);
    if (!k) pdmp::fail(pdmp::ErrorCode::kConfigError, std::string("unknown experiment kind ") + kind);
    *out = copy_string(pdmp::default_config_json(*k));
  });
}

}  // extern "C"
