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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pdmp/certificate.hpp"
#include "pdmp/graph.hpp"
#include "pdmp/objective.hpp"
#include "pdmp/primal_dual.hpp"

namespace pdmp {

enum class ExperimentKind { kQuadraticSweep, kLogisticCompare, kCertify, kSingleRun };

std::string to_string(ExperimentKind kind);

struct GraphSpec {
  std::string topology = "k_regular";  // k_regular | ring_lattice | cycle | path | complete
  std::vector<int> n_list{10};
  int k = 4;
  std::uint64_t seed_first = 0;
  int seed_count = 1;
};

struct ObjectiveSpec {
  std::string kind = "quadratic";  // quadratic | logistic
  IntRange c_range{1, 10000};
  IntRange b_range{1, 100};
  std::filesystem::path dataset;
  double nu = 1.0;
  int subsample = 0;  // 0 keeps every point
};

struct AlphaRule {
  enum class Mode { kBound, kManual, kInverseL };
  Mode mode = Mode::kBound;
  double value = 0.0;  // kManual
  double scale = 0.99;  // fraction of the stepsize bound, or of 1/L
  std::optional<double> eta;
  // auto: drop the beta bound only when B = beta A'A needs it;
  // never: always enforce it.
  bool relax_when_needed = true;
};

struct BetaRule {
  enum class Mode { kEqualsT, kManual, kFractionOfMax };
  Mode mode = Mode::kEqualsT;
  double value = 1.0;  // kManual value or kFractionOfMax fraction
};

struct AlgorithmSpec {
  std::string name = "pd";  // pd | extra | diging | near_dgd_plus | dgd | mm
  std::vector<int> T_list{1};
  AlphaRule alpha;
  BetaRule beta;
  std::string b_kind = "beta_laplacian";  // beta_laplacian | laplacian
  std::string engine = "compact";         // compact | agentwise
  CommAccounting comm = CommAccounting::kPiggyback;
  double inner_tol = 1e-10;
};

struct StoppingSpec {
  double epsilon = 0.01;
  std::int64_t max_iters = 100000;
  bool stop_at_epsilon = true;
};

// Parsed and validated experiment configuration. `resolved_json` is the
// fully defaulted document echoed into result metadata.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSingleRun;
  GraphSpec graph;
  ObjectiveSpec objective;
  std::vector<AlgorithmSpec> algorithms;
  StoppingSpec stopping;
  std::filesystem::path output_dir = "results";
  std::string resolved_json;
  std::vector<std::string> warnings;
};

// Built-in defaults for each experiment kind, as JSON text.
std::string default_config_json(ExperimentKind kind);

// Merges `json_text` over the defaults of its "experiment" kind (or of
// `fallback` when the key is absent), applies "dotted.key=value" overrides
// (value parsed as JSON, else taken as a string) and validates. Relative
// dataset paths resolve against `base_dir`. Throws kConfigError.
ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {},
                              std::optional<ExperimentKind> fallback = std::nullopt,
                              const std::vector<std::string>& overrides = {});

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name);

struct Reference {
  Stacked x_star;
  Stacked lambda_star;
};

enum class ReferenceMethod { kClosedForm, kHighPrecision };

// Closed form for quadratics (weighted mean of b), damped Newton on the
// consensus objective otherwise; lambda* is the minimum-norm solution of
// A' lambda = -grad f(x*). Throws kReferenceFailure if Newton stalls.
Reference reference_solution(const Objective& obj, const Matrix& a,
                             ReferenceMethod method = ReferenceMethod::kClosedForm);

// Columns of the result CSV; optional values print as NA.
struct ResultRecord {
  std::string run_id;
  std::string algorithm;
  std::optional<int> T;
  int n = 0;
  std::string seed;
  double iter = 0;
  double comm_rounds = 0;
  double grad_evals = 0;
  double rel_error = 0.0;
  std::optional<double> gnorm_error;
  double consensus_gap = 0.0;
  std::optional<double> steps_to_eps;
  std::optional<double> comms_to_eps;
  std::optional<double> delta_certified;
  bool diverged = false;
};

inline constexpr const char* kResultHeader =
    "run_id,algorithm,T,n,seed,iter,comm_rounds,grad_evals,rel_error,gnorm_error,consensus_gap,"
    "steps_to_eps,comms_to_eps,delta_certified";

std::string format_number(double v);
std::string csv_row(const ResultRecord& r);
// One timestamp line, the header, then the rows sorted by run_id.
void write_results_csv(std::ostream& out, std::vector<ResultRecord> rows, const std::string& stamp);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Blocks of two-column data separated by blank lines, one per series.
void write_plot_data(std::ostream& out, const std::vector<Series>& series, const std::string& x_label,
                     const std::string& y_label);

// Stepsizes a PD-family algorithm spec resolves to on one instance.
struct PdStepsizes {
  PdConfig config;
  double eta = 0.0;
  bool relaxed = false;
  std::optional<double> alpha_max;
};

PdStepsizes resolve_pd_stepsizes(const AlgorithmSpec& spec, int T, const NetworkGraph& g,
                                 const Objective& obj);

struct SweepResult {
  std::vector<ResultRecord> runs;
  std::vector<ResultRecord> means;
};
SweepResult run_quadratic_sweep(const ExperimentConfig& cfg);

struct CompareResult {
  std::vector<ResultRecord> finals;
  struct Trace {
    std::string algorithm;
    std::optional<int> T;
    std::vector<std::int64_t> iter;
    std::vector<std::int64_t> comm_rounds;
    std::vector<double> rel_error;
  };
  std::vector<Trace> traces;
};
CompareResult run_logistic_compare(const ExperimentConfig& cfg);

struct CertifyReport {
  std::string label;
  bool passed = false;
  RateCertificate certificate;
  PdConfig config;
  ContractionReport contraction;
  double worst_identity_residual = 0.0;
  std::int64_t descent_failures = 0;
  double worst_descent_margin = -1e300;  // max (lhs - rhs) / max(1, scale)
  std::int64_t dual_bound_failures = 0;
  double worst_dual_bound_margin = -1e300;
  std::int64_t dual_bound_opt_failures = 0;
  SpectrumReport spectrum;
  double worst_null_component = 0.0;
  double fixed_point_motion = 0.0;
  std::int64_t iterations = 0;
  std::vector<std::string> notes;

  std::string to_json() const;
  std::string summary() const;
};
// Full monitor pipeline on one instance: certificate, trajectory from x0 = 0,
// contraction, the inequality monitors, the M/N spectrum, dual range and the fixed
// point. Throws kStepsizeViolation before running if alpha exceeds its bound.
CertifyReport certify_instance(const NetworkGraph& g, const Objective& obj, const AlgorithmSpec& spec,
                               int T, const StoppingSpec& stopping, std::string label = {});
std::vector<CertifyReport> run_certify(const ExperimentConfig& cfg);

std::vector<ResultRecord> run_single(const ExperimentConfig& cfg,
                                     std::vector<CompareResult::Trace>* traces = nullptr);

struct ExperimentOutcome {
  int status = 0;  // 0 success, 1 a monitor or run failed
  std::string summary;
  std::vector<std::filesystem::path> files;
};

// Runs the configured experiment and writes its artifacts under out_dir:
// results.csv, plot_data.txt, metadata.json (+ series.csv, certify_report.json).
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                 bool quiet = true);

}  // namespace pdmp
