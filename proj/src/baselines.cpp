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

#include "pdmp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pdmp/error.hpp"

namespace pdmp {

namespace {

std::string with_alpha(const char* name, double alpha) {
  std::ostringstream s;
  s.precision(17);
  s << name << "(alpha=" << alpha << ")";
  return s.str();
}

Eigen::Map<const Vector> flat(const Stacked& x) { return {x.data(), x.size()}; }

}  // namespace

PdConfig extra_config(double alpha, double beta, int dim) {
  PdConfig cfg;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.T = 1;
  cfg.b_kind = BKind::beta_laplacian(beta);
  cfg.dim = dim;
  return cfg;
}

bool extra_outside_precondition(double alpha, double beta, const NetworkGraph& g) {
  const double rho = symmetric_eigenvalues(beta * laplacian(g)).maxCoeff();
  return alpha * rho >= 1.0 - 1e-12;  // same guard as PdSystem
}

MixingMatrix metropolis_weights(const NetworkGraph& g) {
  const int n = g.agents();
  MixingMatrix mix{Matrix::Zero(n, n)};
  for (const auto& e : g.edges()) {
    const double w = 1.0 / (1.0 + std::max(g.degree(e.i), g.degree(e.j)));
    mix.W(e.i, e.j) = w;
    mix.W(e.j, e.i) = w;
  }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j : g.neighbors(i)) off += mix.W(i, j);
    mix.W(i, i) = 1.0 - off;
  }
  return mix;
}

void diging_step(Stacked& x, Stacked& y, Stacked& grad, const Matrix& w, double alpha,
                 const Objective& obj) {
  Stacked next = w * x - alpha * y;
  const Stacked next_grad = obj.gradient(next);
  y = w * y + next_grad - grad;
  x = std::move(next);
  grad = next_grad;
}

void near_dgd_plus_step(Stacked& x, std::int64_t k, const Matrix& w, double alpha,
                        const Objective& obj) {
  if (k < 1) fail(ErrorCode::kInvalidInput, "NEAR-DGD+ iteration index must be >= 1");
  Stacked z = x - alpha * obj.gradient(x);
  for (std::int64_t r = 0; r < k; ++r) z = w * z;
  x = std::move(z);
}

void dgd_step(Stacked& x, const Matrix& w, double alpha, const Objective& obj) {
  Stacked next = w * x - alpha * obj.gradient(x);
  x = std::move(next);
}

DigingStepper::DigingStepper(MixingMatrix w, double alpha, Objective obj)
    : w_(std::move(w)), alpha_(alpha), obj_(std::move(obj)) {}

RunState DigingStepper::start(const Stacked& x0) const {
  RunState s;
  s.x = x0;
  s.aux2 = obj_.gradient(x0);
  s.aux = s.aux2;
  s.grad_evals = 1;
  return s;
}

void DigingStepper::step(RunState& s) {
  diging_step(s.x, s.aux, s.aux2, w_.W, alpha_, obj_);
  ++s.iter;
  ++s.comm_rounds;
  ++s.grad_evals;
}

std::string DigingStepper::describe() const { return with_alpha("diging", alpha_); }

NearDgdPlusStepper::NearDgdPlusStepper(MixingMatrix w, double alpha, Objective obj)
    : w_(std::move(w)), alpha_(alpha), obj_(std::move(obj)) {}

RunState NearDgdPlusStepper::start(const Stacked& x0) const {
  RunState s;
  s.x = x0;
  return s;
}

void NearDgdPlusStepper::step(RunState& s) {
  const std::int64_t k = s.iter + 1;
  near_dgd_plus_step(s.x, k, w_.W, alpha_, obj_);
  s.iter = k;
  s.comm_rounds += k;
  ++s.grad_evals;
}

std::string NearDgdPlusStepper::describe() const { return with_alpha("near_dgd_plus", alpha_); }

DgdStepper::DgdStepper(MixingMatrix w, double alpha, Objective obj)
    : w_(std::move(w)), alpha_(alpha), obj_(std::move(obj)) {}

RunState DgdStepper::start(const Stacked& x0) const {
  RunState s;
  s.x = x0;
  return s;
}

void DgdStepper::step(RunState& s) {
  dgd_step(s.x, w_.W, alpha_, obj_);
  ++s.iter;
  ++s.comm_rounds;
  ++s.grad_evals;
}

std::string DgdStepper::describe() const { return with_alpha("dgd", alpha_); }

MethodOfMultipliers::MethodOfMultipliers(Objective obj, Matrix a, Matrix b, double beta,
                                         double inner_tol, int max_inner)
    : obj_(std::move(obj)),
      a_(std::move(a)),
      b_(std::move(b)),
      beta_(beta),
      inner_tol_(inner_tol),
      max_inner_(max_inner) {
  if (b_.rows() != obj_.agents() || a_.cols() != obj_.agents()) {
    fail(ErrorCode::kInvalidInput, "method of multipliers: matrix shapes do not match the objective");
  }
  if (beta_ < 0.0) fail(ErrorCode::kInvalidInput, "method of multipliers: beta must be >= 0");
}

RunState MethodOfMultipliers::start(const Stacked& x0) const {
  RunState s;
  s.x = x0;
  s.lambda = Stacked::Zero(a_.rows(), obj_.dim());
  return s;
}

Stacked MethodOfMultipliers::lagrangian_gradient(const Stacked& x, const Stacked& lambda) const {
  return obj_.gradient(x) + a_.transpose() * lambda + b_ * x;
}

double MethodOfMultipliers::lagrangian_value(const Stacked& x, const Stacked& lambda) const {
  return obj_.value(x) + (a_ * x).cwiseProduct(lambda).sum() + 0.5 * (b_ * x).cwiseProduct(x).sum();
}

void MethodOfMultipliers::step(RunState& s) {
  const int n = obj_.agents();
  const int d = obj_.dim();
  auto hessian = [&](const Stacked& x) {
    Matrix h = obj_.stacked_hessian(x);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (b_(i, j) != 0.0)
          for (int c = 0; c < d; ++c) h(i * d + c, j * d + c) += b_(i, j);
    return h;
  };

  Stacked g = lagrangian_gradient(s.x, s.lambda);
  const double scale = std::max(1.0, obj_.gradient(s.x).norm() + (a_.transpose() * s.lambda).norm() +
                                         (b_ * s.x).norm());
  const double tol = inner_tol_ * scale;
  int iters = 0;
  if (obj_.is_quadratic()) {
    // Constant Hessian: a single Newton step is the exact minimizer.
    const Vector dx = hessian(s.x).ldlt().solve(-flat(g));
    s.x += Eigen::Map<const Stacked>(dx.data(), n, d);
    g = lagrangian_gradient(s.x, s.lambda);
    iters = 1;
  } else {
    double value = lagrangian_value(s.x, s.lambda);
    while (g.norm() > tol) {
      if (iters >= max_inner_) {
        std::ostringstream msg;
        msg << "inner Newton solve stopped at |grad| = " << g.norm() << " after " << iters
            << " iterations (tolerance " << tol << ")";
        fail(ErrorCode::kInnerSolveFailure, msg.str());
      }
      const Vector dir = hessian(s.x).llt().solve(-flat(g));
      const Eigen::Map<const Stacked> step(dir.data(), n, d);
      const double slope = flat(g).dot(dir);
      double t = 1.0;
      Stacked trial = s.x + step;
      double trial_value = lagrangian_value(trial, s.lambda);
      // A decrement below the resolution of the value cannot be seen by the
      // sufficient-decrease test; the full Newton step is taken there.
      const bool resolvable = -slope > 1e-12 * std::max(1.0, std::abs(value));
      while (resolvable && trial_value > value + 1e-4 * t * slope && t > 1e-12) {
        t *= 0.5;
        trial = s.x + t * step;
        trial_value = lagrangian_value(trial, s.lambda);
      }
      s.x = std::move(trial);
      value = trial_value;
      g = lagrangian_gradient(s.x, s.lambda);
      ++iters;
    }
  }
  last_residual_ = g.norm();
  last_inner_iters_ = iters;
  s.lambda += beta_ * (a_ * s.x);
  ++s.iter;
  s.grad_evals += iters;
}

std::string MethodOfMultipliers::describe() const {
  std::ostringstream s;
  s.precision(17);
  s << "mm(beta=" << beta_ << ", inner_tol=" << inner_tol_ << ")";
  return s.str();
}

Trajectory method_of_multipliers(const Objective& obj, const Matrix& a, const Matrix& b, double beta,
                                 double inner_tol, std::int64_t max_outer, const Stacked& x0,
                                 const StopRule& stop, const RunOptions& opts) {
  MethodOfMultipliers mm(obj, a, b, beta, inner_tol);
  RunState state = mm.start(x0);
  StopRule outer = stop;
  outer.max_iters = max_outer;
  return run(mm, state, outer, opts);
}

}  // namespace pdmp
