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

#include "pdmp/primal_dual.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pdmp/error.hpp"

namespace pdmp {

std::string PdConfig::describe() const {
  std::ostringstream s;
  s.precision(17);
  s << "pd(alpha=" << alpha << ", beta=" << beta << ", T=" << T << ", B=" << b_kind.name()
    << ", d=" << dim << ", comm=" << (comm == CommAccounting::kPiggyback ? "T" : "T+1") << ")";
  return s.str();
}

Matrix build_C(double alpha, const Matrix& b, int T) {
  if (T < 1) fail(ErrorCode::kInvalidInput, "T must be at least 1");
  const Eigen::Index n = b.rows();
  const Matrix step = Matrix::Identity(n, n) - alpha * b;
  Matrix power = Matrix::Identity(n, n);
  Matrix c = Matrix::Identity(n, n);
  for (int t = 1; t < T; ++t) {
    power = power * step;
    c += power;
  }
  return c;
}

namespace {

// alpha rho(B) must stay below 1; the eigensolver can land a few ulps under
// the true spectral radius, so products within 1e-12 of 1 count as 1.
constexpr double kBoundaryGuard = 1.0 - 1e-12;

Matrix matrix_power(const Matrix& base, int exponent) {
  Matrix out = Matrix::Identity(base.rows(), base.cols());
  for (int t = 0; t < exponent; ++t) out = out * base;
  return out;
}

}  // namespace

MNPair build_MN(double alpha, const Matrix& b, int T) {
  const double rho = symmetric_eigenvalues(b).maxCoeff();
  if (!(alpha > 0.0) || alpha * rho >= kBoundaryGuard) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "alpha * rho(B) = " << alpha * rho << " must lie in (0, 1)";
    fail(ErrorCode::kStepsizeViolation, msg.str());
  }
  const Eigen::Index n = b.rows();
  const Matrix c = build_C(alpha, b, T);
  const Vector c_eig = symmetric_eigenvalues(c);
  if (!(c_eig.minCoeff() > 0.0) || c_eig.maxCoeff() / c_eig.minCoeff() > 1e12) {
    fail(ErrorCode::kDegenerateConfiguration, "C is numerically singular");
  }
  const Eigen::LDLT<Matrix> c_fact(c);
  const Matrix c_inv = c_fact.solve(Matrix::Identity(n, n));
  MNPair out;
  out.M = c_fact.solve(matrix_power(Matrix::Identity(n, n) - alpha * b, T));
  out.N = (c_inv - out.M) / alpha;
  return out;
}

PdSystem::PdSystem(PdConfig cfg, NetworkGraph graph, Objective objective)
    : cfg_(std::move(cfg)), graph_(std::move(graph)), objective_(std::move(objective)) {
  if (cfg_.T < 1) fail(ErrorCode::kInvalidInput, "T must be at least 1");
  if (!(cfg_.alpha > 0.0) || !(cfg_.beta > 0.0)) {
    fail(ErrorCode::kInvalidInput, "stepsizes alpha and beta must be positive");
  }
  if (objective_.agents() != graph_.agents()) {
    fail(ErrorCode::kInvalidInput, "objective has " + std::to_string(objective_.agents()) +
                                       " agents but graph has " + std::to_string(graph_.agents()));
  }
  if (cfg_.dim != objective_.dim()) {
    fail(ErrorCode::kInvalidInput, "config dimension " + std::to_string(cfg_.dim) +
                                       " differs from objective dimension " +
                                       std::to_string(objective_.dim()));
  }
  mats_ = build_constraints(graph_, cfg_.b_kind);
  spectra_ = spectral(graph_, mats_);
  if (cfg_.alpha * spectra_.rhoB >= kBoundaryGuard) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "alpha * rho(B) = " << cfg_.alpha * spectra_.rhoB << " must be < 1 for "
        << cfg_.describe();
    fail(ErrorCode::kStepsizeViolation, msg.str());
  }
}

RunState init(const PdSystem& sys, const Stacked& x0) {
  const int n = sys.graph().agents();
  const int d = sys.config().dim;
  if (x0.rows() != n || x0.cols() != d) {
    fail(ErrorCode::kInvalidInput, "initial point must be " + std::to_string(n) + " x " +
                                       std::to_string(d));
  }
  RunState s;
  s.x = x0;
  s.lambda = Stacked::Zero(sys.graph().edge_count(), d);
  return s;
}

std::int64_t rounds_per_iteration(const PdConfig& cfg) {
  return cfg.T + (cfg.comm == CommAccounting::kSeparateDual ? 1 : 0);
}

CompactEngine::CompactEngine(const PdSystem& sys)
    : sys_(&sys),
      c_(build_C(sys.config().alpha, sys.B(), sys.config().T)),
      propagator_(matrix_power(Matrix::Identity(sys.B().rows(), sys.B().cols()) -
                                   sys.config().alpha * sys.B(),
                               sys.config().T)) {}

void CompactEngine::step(RunState& s) {
  const auto& cfg = sys_->config();
  sys_->objective().gradient(s.x, grad_);
  grad_.noalias() += sys_->A().transpose() * s.lambda;
  Stacked next = propagator_ * s.x;
  next.noalias() -= cfg.alpha * (c_ * grad_);
  s.x = std::move(next);
  s.lambda.noalias() += cfg.beta * (sys_->A() * s.x);
  ++s.iter;
  s.comm_rounds += rounds_per_iteration(cfg);
  ++s.grad_evals;
}

std::string CompactEngine::describe() const { return sys_->config().describe() + " compact"; }

AgentwiseEngine::AgentwiseEngine(const PdSystem& sys) : sys_(&sys) {
  const auto& g = sys.graph();
  const auto& b = sys.B();
  const auto& a = sys.A();
  agents_.resize(g.agents());
  for (int i = 0; i < g.agents(); ++i) {
    Agent& agent = agents_[i];
    agent.id = i;
    agent.b_row.emplace_back(i, b(i, i));
    for (int j : g.neighbors(i)) {
      if (b(i, j) != 0.0) agent.b_row.emplace_back(j, b(i, j));
    }
    for (int l : g.incident_edges(i)) agent.incident.emplace_back(l, a(l, i));
    for (int l : g.owned_edges(i)) agent.owned.push_back(l);
  }
  order_.resize(g.agents());
  std::iota(order_.begin(), order_.end(), 0);
}

void AgentwiseEngine::set_agent_order(std::vector<int> order) {
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expected(agents_.size());
  std::iota(expected.begin(), expected.end(), 0);
  if (sorted != expected) fail(ErrorCode::kInvalidInput, "agent order must be a permutation");
  order_ = std::move(order);
}

std::span<const double> AgentwiseEngine::read_x(int reader, const Stacked& published, int j) {
  ++log_.reads;
  if (j != reader && !sys_->graph().has_edge(reader, j)) ++log_.non_local_reads;
  return {published.row(j).data(), static_cast<std::size_t>(published.cols())};
}

std::span<const double> AgentwiseEngine::read_lambda(int reader, const Stacked& published, int l) {
  ++log_.reads;
  const Edge& e = sys_->graph().edge(l);
  if (e.i != reader && e.j != reader) ++log_.non_local_reads;
  return {published.row(l).data(), static_cast<std::size_t>(published.cols())};
}

void AgentwiseEngine::step(RunState& s) {
  const auto& cfg = sys_->config();
  const auto& obj = sys_->objective();
  const int d = cfg.dim;
  const auto dsz = static_cast<std::size_t>(d);
  const double alpha = cfg.alpha;

  // Gradient once per iteration, plus the dual contribution, both frozen for
  // the T inner updates.
  drift_.resize(s.x.rows(), d);
  for (int i : order_) {
    const Agent& agent = agents_[i];
    std::span<double> out{drift_.row(i).data(), dsz};
    obj.local(i).gradient(read_x(i, s.x, i), out);
    for (const auto& [l, sign] : agent.incident) {
      const auto lam = read_lambda(i, s.lambda, l);
      for (int c = 0; c < d; ++c) out[c] += sign * lam[c];
    }
  }

  next_.resize(s.x.rows(), d);
  for (int t = 0; t < cfg.T; ++t) {
    for (int i : order_) {
      const Agent& agent = agents_[i];
      const auto own = read_x(i, s.x, i);
      double* out = next_.row(i).data();
      for (int c = 0; c < d; ++c) out[c] = own[c] - alpha * drift_(i, c);
      for (const auto& [j, bij] : agent.b_row) {
        const auto xj = read_x(i, s.x, j);
        for (int c = 0; c < d; ++c) out[c] -= alpha * bij * xj[c];
      }
    }
    // Publish: one neighbor-exchange round.
    s.x.swap(next_);
  }

  for (int i : order_) {
    for (int l : agents_[i].owned) {
      const Edge& e = sys_->graph().edge(l);
      const auto xi = read_x(i, s.x, e.i);
      const auto xj = read_x(i, s.x, e.j);
      for (int c = 0; c < d; ++c) s.lambda(l, c) += cfg.beta * (xi[c] - xj[c]);
    }
  }

  ++s.iter;
  s.comm_rounds += rounds_per_iteration(cfg);
  ++s.grad_evals;
}

std::string AgentwiseEngine::describe() const { return sys_->config().describe() + " agentwise"; }

Stacked dual_optimum(const Matrix& a, const Stacked& grad_at_opt) {
  if (a.rows() == 0) return Stacked(0, grad_at_opt.cols());
  const Matrix at = a.transpose();
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(at);
  const Matrix rhs = -Matrix(grad_at_opt);
  return Stacked(cod.solve(rhs));
}

double null_space_component(const Matrix& a, const Stacked& lambda) {
  if (lambda.size() == 0) return 0.0;
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  const Matrix lam(lambda);
  const Matrix coeffs = cod.solve(lam);
  return (lam - a * coeffs).norm();
}

double GMetric::energy(const Stacked& x, const Stacked& lambda) const {
  const Stacked dx = x - x_star;
  const Stacked dl = lambda - lambda_star;
  return (dx.transpose() * (M * dx)).trace() + dual_weight * dl.squaredNorm();
}

double relative_error(const Stacked& x, const Stacked& x_star, double initial_error) {
  const double err = (x - x_star).norm();
  if (err == 0.0) return 0.0;
  if (initial_error == 0.0) return std::numeric_limits<double>::infinity();
  return err / initial_error;
}

double consensus_gap(const Stacked& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  double gap = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) gap = std::max(gap, (x.row(i) - mean).norm());
  return gap;
}

Trajectory run(Stepper& stepper, RunState& state, const StopRule& stop, const RunOptions& opts) {
  if (stop.x_star.rows() != state.x.rows() || stop.x_star.cols() != state.x.cols()) {
    fail(ErrorCode::kInvalidInput, "reference solution shape differs from the iterate");
  }
  Trajectory traj;
  traj.config = stepper.describe();
  // Starting at x* leaves nothing to normalize by; later drift is then
  // measured against max(1, |x*|) so rounding noise is not read as divergence.
  const double start_error = (state.x - stop.x_star).norm();
  const double initial_error = start_error > 0.0 ? start_error : std::max(1.0, stop.x_star.norm());

  auto record = [&] {
    Snapshot snap;
    snap.iter = state.iter;
    snap.comm_rounds = state.comm_rounds;
    snap.grad_evals = state.grad_evals;
    snap.rel_error = relative_error(state.x, stop.x_star, initial_error);
    snap.consensus_gap = consensus_gap(state.x);
    if (opts.metric) snap.gnorm_error = std::sqrt(std::max(0.0, opts.metric->energy(state)));
    if (opts.keep_iterates) {
      snap.x = state.x;
      snap.lambda = state.lambda;
    }
    traj.snapshots.push_back(std::move(snap));
    const Snapshot& last = traj.snapshots.back();
    if (!std::isfinite(last.rel_error) || last.rel_error > opts.divergence_limit) {
      std::ostringstream msg;
      msg << "run diverged at iteration " << last.iter << " (relative error " << last.rel_error
          << ") under " << traj.config;
      fail(ErrorCode::kDivergence, msg.str());
    }
    if (!traj.reached && last.rel_error < stop.epsilon) {
      traj.reached = true;
      traj.steps_to_eps = last.iter;
      traj.comms_to_eps = last.comm_rounds;
    }
  };

  record();
  while (!(traj.reached && opts.stop_at_epsilon) && state.iter < stop.max_iters) {
    stepper.step(state);
    record();
  }
  return traj;
}

}  // namespace pdmp
