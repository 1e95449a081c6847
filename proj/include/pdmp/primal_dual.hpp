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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pdmp/graph.hpp"
#include "pdmp/objective.hpp"
#include "pdmp/types.hpp"

namespace pdmp {

// How neighbor exchanges are counted per primal-dual iteration. With
// kPiggyback the exchange of x^{k+1,T} that feeds the dual update also seeds
// the next iteration's first inner step (T rounds); kSeparateDual charges it
// as its own round (T + 1).
enum class CommAccounting { kPiggyback, kSeparateDual };

struct PdConfig {
  double alpha = 0.0;  // primal stepsize
  double beta = 0.0;   // dual stepsize
  int T = 1;           // primal updates per iteration
  BKind b_kind = BKind::laplacian();
  int dim = 1;
  CommAccounting comm = CommAccounting::kPiggyback;

  std::string describe() const;
};

// Stacked iterate plus counters. `aux` carries algorithm-specific state for
// the baselines (gradient tracker, previous iterate); it is empty for PD.
struct RunState {
  Stacked x;
  Stacked lambda;
  Stacked aux;
  Stacked aux2;
  std::int64_t iter = 0;
  std::int64_t comm_rounds = 0;
  std::int64_t grad_evals = 0;  // per agent
};

// C = sum_{t<T} (I - alpha B)^t.
Matrix build_C(double alpha, const Matrix& b, int T);

struct MNPair {
  Matrix M;  // C^{-1} (I - alpha B)^T
  Matrix N;  // (C^{-1} - M) / alpha
};
MNPair build_MN(double alpha, const Matrix& b, int T);

// Validated problem setup shared by both PD engines.
class PdSystem {
 public:
  // Throws kStepsizeViolation unless alpha * rho(B) < 1, kInvalidInput on
  // dimension mismatch or nonpositive stepsizes.
  PdSystem(PdConfig cfg, NetworkGraph graph, Objective objective);

  const PdConfig& config() const { return cfg_; }
  const NetworkGraph& graph() const { return graph_; }
  const Objective& objective() const { return objective_; }
  const ConstraintMatrices& constraints() const { return mats_; }
  const SpectralBounds& spectra() const { return spectra_; }
  const Matrix& A() const { return mats_.A; }
  const Matrix& B() const { return mats_.B; }

 private:
  PdConfig cfg_;
  NetworkGraph graph_;
  Objective objective_;
  ConstraintMatrices mats_;
  SpectralBounds spectra_;
};

// x = x0, lambda = 0, counters zero.
RunState init(const PdSystem& sys, const Stacked& x0);

class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual void step(RunState& state) = 0;
  virtual std::string describe() const = 0;
};

// Dense form: x+ = (I - aB)^T x - aC grad f(x) - aC A' lambda,
//             lambda+ = lambda + b A x+.
class CompactEngine final : public Stepper {
 public:
  explicit CompactEngine(const PdSystem& sys);

  void step(RunState& state) override;
  std::string describe() const override;

  const Matrix& C() const { return c_; }
  const Matrix& propagator() const { return propagator_; }

 private:
  const PdSystem* sys_;
  Matrix c_;
  Matrix propagator_;  // (I - alpha B)^T
  Stacked grad_;
};

struct AccessLog {
  std::int64_t reads = 0;
  std::int64_t non_local_reads = 0;
};

// Message-passing form of the algorithm. Every agent keeps only its row of B,
// its incident incidence entries and the duals it owns; each inner update
// reads neighbor values published in the previous exchange round, so the
// result does not depend on the order agents are processed in.
class AgentwiseEngine final : public Stepper {
 public:
  explicit AgentwiseEngine(const PdSystem& sys);

  void step(RunState& state) override;
  std::string describe() const override;

  const AccessLog& access_log() const { return log_; }
  // Processing order within a round, for order-independence tests.
  void set_agent_order(std::vector<int> order);

 private:
  struct Agent {
    int id = 0;
    std::vector<std::pair<int, double>> b_row;     // (j, B_ij), j == i or neighbor
    std::vector<std::pair<int, double>> incident;  // (l, A_li)
    std::vector<int> owned;                        // dual variables updated here
  };

  std::span<const double> read_x(int reader, const Stacked& published, int j);
  std::span<const double> read_lambda(int reader, const Stacked& published, int l);

  const PdSystem* sys_;
  std::vector<Agent> agents_;
  std::vector<int> order_;
  AccessLog log_;
  Stacked drift_;  // per agent: grad f_i(x_i^k) + sum_l A'_il lambda_l^k
  Stacked next_;
};

// Minimum-norm lambda with A' lambda = -grad f(x*), computed blockwise.
Stacked dual_optimum(const Matrix& a, const Stacked& grad_at_opt);

// Norm of the component of lambda lying in null(A').
double null_space_component(const Matrix& a, const Stacked& lambda);

std::int64_t rounds_per_iteration(const PdConfig& cfg);

// G-weighted error |x - x*|_M^2 + (alpha/beta) |lambda - lambda*|^2.
struct GMetric {
  Matrix M;
  double dual_weight = 0.0;
  Stacked x_star;
  Stacked lambda_star;

  double energy(const Stacked& x, const Stacked& lambda) const;
  double energy(const RunState& s) const { return energy(s.x, s.lambda); }
};

struct StopRule {
  std::int64_t max_iters = 1000;
  double epsilon = 0.01;
  Stacked x_star;
};

struct Snapshot {
  std::int64_t iter = 0;
  std::int64_t comm_rounds = 0;
  std::int64_t grad_evals = 0;
  double rel_error = 0.0;
  double consensus_gap = 0.0;
  double gnorm_error = std::numeric_limits<double>::quiet_NaN();
  Stacked x;       // empty unless iterates are kept
  Stacked lambda;
};

struct RunOptions {
  bool keep_iterates = true;
  bool stop_at_epsilon = true;  // false: always run max_iters steps
  const GMetric* metric = nullptr;
  double divergence_limit = 1e8;
};

struct Trajectory {
  std::string config;
  std::vector<Snapshot> snapshots;
  bool reached = false;
  std::int64_t steps_to_eps = -1;
  std::int64_t comms_to_eps = -1;

  const Snapshot& last() const { return snapshots.back(); }
};

// |x - x*| / |x0 - x*|, with 0/0 taken as 0.
double relative_error(const Stacked& x, const Stacked& x_star, double initial_error);
double consensus_gap(const Stacked& x);

// Steps until rel_error < epsilon or max_iters. Throws kDivergence once the
// relative error exceeds the divergence limit or becomes non-finite.
Trajectory run(Stepper& stepper, RunState& state, const StopRule& stop, const RunOptions& opts = {});

}  // namespace pdmp
