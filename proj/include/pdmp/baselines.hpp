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
#include <string>

#include "pdmp/graph.hpp"
#include "pdmp/objective.hpp"
#include "pdmp/primal_dual.hpp"
#include "pdmp/types.hpp"

namespace pdmp {

// T = 1 with B = beta A'A. Running the PD engines with this configuration is
// the EXTRA-equivalent method.
PdConfig extra_config(double alpha, double beta, int dim);

// True when alpha * rho(B) >= 1 for the EXTRA parameterization.
bool extra_outside_precondition(double alpha, double beta, const NetworkGraph& g);

struct MixingMatrix {
  Matrix W;
};

// W_ij = 1 / (1 + max(deg_i, deg_j)) on edges, diagonal fills rows to 1.
MixingMatrix metropolis_weights(const NetworkGraph& g);

// One-step updates, exposed for direct testing.
//   DIGing: x' = W x - alpha y,  y' = W y + grad f(x') - grad f(x)
void diging_step(Stacked& x, Stacked& y, Stacked& grad, const Matrix& w, double alpha,
                 const Objective& obj);
//   NEAR-DGD+: x' = W^k (x - alpha grad f(x))
void near_dgd_plus_step(Stacked& x, std::int64_t k, const Matrix& w, double alpha,
                        const Objective& obj);
//   DGD: x' = W x - alpha grad f(x)
void dgd_step(Stacked& x, const Matrix& w, double alpha, const Objective& obj);

// Gradient tracking. aux = y, aux2 = grad f(x). One exchange per iteration
// (x and y travel together).
class DigingStepper final : public Stepper {
 public:
  DigingStepper(MixingMatrix w, double alpha, Objective obj);

  // y^0 = grad f(x^0).
  RunState start(const Stacked& x0) const;
  void step(RunState& state) override;
  std::string describe() const override;

 private:
  MixingMatrix w_;
  double alpha_;
  Objective obj_;
};

// k consensus rounds at iteration k.
class NearDgdPlusStepper final : public Stepper {
 public:
  NearDgdPlusStepper(MixingMatrix w, double alpha, Objective obj);

  RunState start(const Stacked& x0) const;
  void step(RunState& state) override;
  std::string describe() const override;

 private:
  MixingMatrix w_;
  double alpha_;
  Objective obj_;
};

class DgdStepper final : public Stepper {
 public:
  DgdStepper(MixingMatrix w, double alpha, Objective obj);

  RunState start(const Stacked& x0) const;
  void step(RunState& state) override;
  std::string describe() const override;

 private:
  MixingMatrix w_;
  double alpha_;
  Objective obj_;
};

// Centralized method of multipliers on f(x) + lambda'Ax + x'Bx/2: exact
// primal minimization (single linear solve for quadratics, damped Newton
// otherwise) followed by lambda += beta A x. Not a distributed method; it
// charges no communication rounds.
class MethodOfMultipliers final : public Stepper {
 public:
  MethodOfMultipliers(Objective obj, Matrix a, Matrix b, double beta, double inner_tol = 1e-10,
                      int max_inner = 100);

  RunState start(const Stacked& x0) const;
  void step(RunState& state) override;
  std::string describe() const override;

  // |grad_x L(x, lambda)| after the latest inner solve.
  double last_inner_residual() const { return last_residual_; }
  int last_inner_iterations() const { return last_inner_iters_; }

 private:
  Stacked lagrangian_gradient(const Stacked& x, const Stacked& lambda) const;
  double lagrangian_value(const Stacked& x, const Stacked& lambda) const;

  Objective obj_;
  Matrix a_;
  Matrix b_;
  double beta_;
  double inner_tol_;
  int max_inner_;
  double last_residual_ = 0.0;
  int last_inner_iters_ = 0;
};

// Drives MethodOfMultipliers from x0 for up to max_outer iterations.
Trajectory method_of_multipliers(const Objective& obj, const Matrix& a, const Matrix& b, double beta,
                                 double inner_tol, std::int64_t max_outer, const Stacked& x0,
                                 const StopRule& stop, const RunOptions& opts = {});

}  // namespace pdmp
