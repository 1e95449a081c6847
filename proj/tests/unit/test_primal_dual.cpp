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

#include <doctest.h>

#include <cmath>
#include <memory>

#include "oracles.hpp"
#include "test_util.hpp"
#include "pdmp/graph.hpp"
#include "pdmp/harness.hpp"
#include "pdmp/objective.hpp"
#include "pdmp/primal_dual.hpp"

using namespace pdmp;
using testing::code_of;
using testing::max_abs;

namespace {

PdConfig make_cfg(double alpha, double beta, int T, BKind kind, int dim = 1) {
  PdConfig cfg;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.T = T;
  cfg.b_kind = std::move(kind);
  cfg.dim = dim;
  return cfg;
}

// Safe alpha for a system: a fraction of 1 / rho(B).
double safe_alpha(const NetworkGraph& g, const BKind& kind, double fraction) {
  const auto sp = spectral(g, build_constraints(g, kind));
  return fraction / sp.rhoB;
}

struct Instance {
  NetworkGraph graph;
  Objective objective;
};

Instance random_instance(std::uint64_t seed, int n) {
  auto g = build_k_regular_random(n, 4, seed);
  auto obj = random_quadratic_instance(n, seed + 1000, {1, 20}, {1, 100});
  return {std::move(g), std::move(obj)};
}

// Multiplies x by a constant each step.
class Blowup final : public Stepper {
 public:
  void step(RunState& s) override {
    s.x *= 100.0;
    ++s.iter;
  }
  std::string describe() const override { return "blowup"; }
};

}  // namespace

TEST_SUITE("pdcore") {
  TEST_CASE("C polynomial") {
    const Matrix b = laplacian(build_path(4));
    const Matrix eye = Matrix::Identity(4, 4);
    CHECK(max_abs(build_C(0.2, b, 1) - eye) == 0.0);
    CHECK(max_abs(build_C(0.2, b, 2) - (2.0 * eye - 0.2 * b)) < 1e-15);
    const Matrix c3 = build_C(0.25, b, 3);
    CHECK(max_abs(c3 - c3.transpose()) == 0.0);
    const Vector mu = symmetric_eigenvalues(eye - 0.25 * b);
    std::vector<double> expect;
    for (int i = 0; i < mu.size(); ++i) expect.push_back(1 + mu(i) + mu(i) * mu(i));
    std::sort(expect.begin(), expect.end());
    const Vector got = symmetric_eigenvalues(c3);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(got(i) - expect[i]) < 1e-12);
  }

  TEST_CASE("M and N matrices") {
    const Matrix b = 1.5 * laplacian(build_cycle(6));
    const double alpha = 0.9 / symmetric_eigenvalues(b).maxCoeff();
    const Matrix eye = Matrix::Identity(6, 6);
    const auto mn1 = build_MN(alpha, b, 1);
    CHECK(max_abs(mn1.M - (eye - alpha * b)) < 1e-15);
    CHECK(max_abs(mn1.N - b) < 1e-12);
    for (int T = 1; T <= 6; ++T) {
      const auto mn = build_MN(alpha, b, T);
      CHECK(max_abs(mn.M - mn.M.transpose()) < 1e-12);
      CHECK(max_abs(mn.N - mn.N.transpose()) < 1e-12);
      // N reduces to B: C^{-1} (I - (I - aB)^T) / a = B.
      CHECK(max_abs(mn.N - b) < 1e-10);
      const Vector ev = symmetric_eigenvalues(mn.M);
      CHECK(ev.maxCoeff() <= 1.0 / T + 1e-10);
      CHECK(symmetric_eigenvalues(mn.N).minCoeff() >= -1e-10);
    }
    CHECK(code_of([&] { build_MN(1.0 / symmetric_eigenvalues(b).maxCoeff(), b, 2); }) ==
          ErrorCode::kStepsizeViolation);
  }

  TEST_CASE("init and validation") {
    const auto g = build_path(2);
    const auto obj = quadratic_objective(std::vector<double>{1, 1}, std::vector<double>{0, 2});
    const PdSystem sys(make_cfg(0.1, 0.5, 2, BKind::laplacian()), g, obj);
    Stacked x0(2, 1);
    x0 << 3, -4;
    const RunState s = init(sys, x0);
    CHECK(s.lambda.rows() == 1);
    CHECK(s.lambda.cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.x == x0);
    CHECK(s.iter == 0);
    CHECK(s.comm_rounds == 0);
    CHECK(s.grad_evals == 0);

    // rho(B) = 2 on the two-agent path, so alpha = 1/2 sits on the boundary.
    CHECK(code_of([&] { PdSystem(make_cfg(0.5, 0.5, 1, BKind::laplacian()), g, obj); }) ==
          ErrorCode::kStepsizeViolation);
    CHECK(code_of([&] { PdSystem(make_cfg(0.1, 0.5, 1, BKind::laplacian(), 3), g, obj); }) ==
          ErrorCode::kInvalidInput);
    CHECK(code_of([&] { PdSystem(make_cfg(0.1, 0.5, 0, BKind::laplacian()), g, obj); }) ==
          ErrorCode::kInvalidInput);
    CHECK(code_of([&] { init(sys, Stacked::Zero(3, 1)); }) == ErrorCode::kInvalidInput);
  }

  TEST_CASE("two-agent example against the inner sweep oracle") {
    const auto g = build_path(2);
    const auto obj = quadratic_objective(std::vector<double>{1, 1}, std::vector<double>{0, 2});
    const PdSystem sys(make_cfg(0.1, 0.5, 2, BKind::laplacian()), g, obj);
    CompactEngine compact(sys);
    AgentwiseEngine agents(sys);
    Stacked x0(2, 1);
    x0 << 1, -1;
    RunState sc = init(sys, x0);
    RunState sa = init(sys, x0);
    Stacked ox = x0;
    Stacked ol = Stacked::Zero(1, 1);
    for (int k = 0; k < 50; ++k) {
      compact.step(sc);
      agents.step(sa);
      testing::inner_sweep_step(ox, ol, sys.A(), sys.B(), 0.1, 0.5, 2, obj);
      REQUIRE(max_abs(sc.x - ox) <= 1e-12);
      REQUIRE(max_abs(sa.x - ox) <= 1e-12);
      REQUIRE(max_abs(sc.lambda - ol) <= 1e-12);
      REQUIRE(max_abs(sa.lambda - ol) <= 1e-12);
    }
  }

  TEST_CASE("single primal step reduces to the augmented update") {
    const auto g = build_cycle(7);
    const auto obj = random_quadratic_instance(7, 4, {1, 10}, {1, 100});
    const double beta = 0.8;
    const double alpha = safe_alpha(g, BKind::beta_laplacian(beta), 0.5);
    const PdSystem sys(make_cfg(alpha, beta, 1, BKind::beta_laplacian(beta)), g, obj);
    CompactEngine compact(sys);
    AgentwiseEngine agents(sys);
    const Matrix a = incidence_matrix(g);
    const Matrix ata = a.transpose() * a;
    Rng rng(1);
    const Stacked x0 = testing::random_stacked(7, 1, rng, 10.0);
    RunState sc = init(sys, x0);
    RunState sa = init(sys, x0);
    Stacked x = x0;
    Stacked lam = Stacked::Zero(a.rows(), 1);
    for (int k = 0; k < 30; ++k) {
      const Stacked xn = x - alpha * (obj.gradient(x) + a.transpose() * lam + beta * ata * x);
      lam = lam + beta * a * xn;
      x = xn;
      compact.step(sc);
      agents.step(sa);
      REQUIRE(max_abs(sc.x - x) <= 1e-12 * std::max(1.0, max_abs(x)));
      REQUIRE(max_abs(sa.x - x) <= 1e-12 * std::max(1.0, max_abs(x)));
    }
  }

  TEST_CASE("engines agree with each other and with the oracle") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const int n = 5 + static_cast<int>(seed % 4) * 5;
      const int T = 1 + static_cast<int>(seed % 5);
      auto inst = random_instance(seed, n);
      const BKind kind = seed % 2 ? BKind::laplacian() : BKind::beta_laplacian(0.3 + seed);
      const double alpha = safe_alpha(inst.graph, kind, 0.8) / std::max(1.0, inst.objective.L());
      const PdSystem sys(make_cfg(alpha, 0.7, T, kind), inst.graph, inst.objective);
      CompactEngine compact(sys);
      AgentwiseEngine agents(sys);
      Rng rng(seed);
      const Stacked x0 = testing::random_stacked(n, 1, rng, 20.0);
      RunState sc = init(sys, x0);
      RunState sa = init(sys, x0);
      Stacked ox = x0;
      Stacked ol = Stacked::Zero(inst.graph.edge_count(), 1);
      for (int k = 0; k < 100; ++k) {
        compact.step(sc);
        agents.step(sa);
        testing::inner_sweep_step(ox, ol, sys.A(), sys.B(), alpha, 0.7, T, inst.objective);
        const double scale = std::max(1.0, max_abs(ox));
        REQUIRE(max_abs(sc.x - sa.x) <= 1e-12 * scale);
        REQUIRE(max_abs(sc.lambda - sa.lambda) <= 1e-12 * std::max(1.0, max_abs(ol)));
        REQUIRE(max_abs(sc.x - ox) <= 1e-11 * scale);
      }
      CHECK(sc.comm_rounds == 100 * T);
      CHECK(sa.comm_rounds == 100 * T);
      CHECK(sc.grad_evals == 100);
      CHECK(sa.grad_evals == 100);
      CHECK(agents.access_log().reads > 0);
      CHECK(agents.access_log().non_local_reads == 0);
    }
  }

  TEST_CASE("multidimensional logistic runs agree across engines") {
    Rng rng(31);
    auto data = std::make_shared<Dataset>();
    data->features.resize(60, 4);
    for (int j = 0; j < 60; ++j) {
      for (int c = 0; c < 4; ++c) data->features(j, c) = rng.normal();
      data->labels.push_back(j % 3 == 0 ? 1.0 : -1.0);
    }
    const auto obj = logistic_objective(data, 6, 1.0);
    const auto g = build_ring_lattice(6, 4);
    const double alpha = 0.5 * safe_alpha(g, BKind::laplacian(), 1.0);
    const PdSystem sys(make_cfg(alpha, 0.5, 3, BKind::laplacian(), 4), g, obj);
    CompactEngine compact(sys);
    AgentwiseEngine agents(sys);
    const Stacked x0 = testing::random_stacked(6, 4, rng);
    RunState sc = init(sys, x0);
    RunState sa = init(sys, x0);
    for (int k = 0; k < 100; ++k) {
      compact.step(sc);
      agents.step(sa);
      REQUIRE(max_abs(sc.x - sa.x) <= 1e-12);
      REQUIRE(max_abs(sc.lambda - sa.lambda) <= 1e-12);
    }
    CHECK(agents.access_log().non_local_reads == 0);
  }

  TEST_CASE("agent processing order does not change results") {
    auto inst = random_instance(3, 12);
    const double alpha = safe_alpha(inst.graph, BKind::laplacian(), 0.5) / inst.objective.L();
    const PdSystem sys(make_cfg(alpha, 1.0, 3, BKind::laplacian()), inst.graph, inst.objective);
    AgentwiseEngine natural(sys);
    Rng rng(9);
    const Stacked x0 = testing::random_stacked(12, 1, rng, 5.0);
    RunState base = init(sys, x0);
    for (int k = 0; k < 40; ++k) natural.step(base);
    for (int trial = 0; trial < 5; ++trial) {
      AgentwiseEngine shuffled(sys);
      shuffled.set_agent_order(testing::random_permutation(12, rng));
      RunState s = init(sys, x0);
      for (int k = 0; k < 40; ++k) shuffled.step(s);
      CHECK(max_abs(s.x - base.x) == 0.0);
      CHECK(max_abs(s.lambda - base.lambda) == 0.0);
    }
    AgentwiseEngine e(sys);
    CHECK(code_of([&] { e.set_agent_order({0, 1, 2}); }) == ErrorCode::kInvalidInput);
  }

  TEST_CASE("fixed point and dual range") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      auto inst = random_instance(seed, 10);
      const Matrix a = incidence_matrix(inst.graph);
      const auto ref = reference_solution(inst.objective, a);
      for (int T = 1; T <= 4; ++T) {
        const double alpha = safe_alpha(inst.graph, BKind::laplacian(), 0.9) / inst.objective.L();
        const PdSystem sys(make_cfg(alpha, 0.5, T, BKind::laplacian()), inst.graph, inst.objective);
        CompactEngine compact(sys);
        AgentwiseEngine agents(sys);
        for (Stepper* st : {static_cast<Stepper*>(&compact), static_cast<Stepper*>(&agents)}) {
          RunState s = init(sys, ref.x_star);
          s.lambda = ref.lambda_star;
          st->step(s);
          const double scale = std::max(1.0, max_abs(ref.lambda_star));
          CHECK(max_abs(s.x - ref.x_star) <= 1e-12 * std::max(1.0, max_abs(ref.x_star)));
          CHECK(max_abs(s.lambda - ref.lambda_star) <= 1e-12 * scale);
        }
        RunState s = init(sys, Stacked::Zero(10, 1));
        for (int k = 0; k < 200; ++k) {
          compact.step(s);
          REQUIRE(null_space_component(a, s.lambda) <= 1e-8 * std::max(1.0, s.lambda.norm()));
        }
      }
    }
  }

  TEST_CASE("dual optimum and null space component") {
    const auto g = build_cycle(5);
    const Matrix a = incidence_matrix(g);
    Stacked grad(5, 1);
    grad << 1, -2, 3, 0.5, -2.5;
    const Stacked lam = dual_optimum(a, grad);
    CHECK(max_abs(a.transpose() * lam + grad) < 1e-12);
    CHECK(null_space_component(a, lam) < 1e-12);
    // Cycle: null(A') is spanned by the signed cycle indicator.
    Stacked cyc = Stacked::Zero(a.rows(), 1);
    for (int l = 0; l < g.edge_count(); ++l) {
      const auto& e = g.edge(l);
      cyc(l, 0) = (e.j == e.i + 1) ? 1.0 : -1.0;
    }
    CHECK(max_abs(a.transpose() * cyc) == 0.0);
    CHECK(null_space_component(a, lam + 2.0 * cyc) == doctest::Approx(2.0 * cyc.norm()).epsilon(1e-10));
  }

  TEST_CASE("run stopping rules") {
    auto inst = random_instance(1, 10);
    const Matrix a = incidence_matrix(inst.graph);
    const auto ref = reference_solution(inst.objective, a);
    const double alpha = safe_alpha(inst.graph, BKind::laplacian(), 0.9) / inst.objective.L();
    const PdSystem sys(make_cfg(alpha, 0.5, 2, BKind::laplacian()), inst.graph, inst.objective);
    CompactEngine compact(sys);

    RunState s = init(sys, Stacked::Zero(10, 1));
    StopRule never{25, 0.0, ref.x_star};
    const auto t = run(compact, s, never);
    CHECK(t.snapshots.size() == 26);
    CHECK_FALSE(t.reached);
    CHECK(t.steps_to_eps == -1);
    CHECK(t.snapshots.front().rel_error == 1.0);
    CHECK(t.snapshots.front().iter == 0);
    CHECK(t.last().comm_rounds == 50);

    RunState at = init(sys, ref.x_star);
    const auto t0 = run(compact, at, StopRule{100, 0.01, ref.x_star});
    CHECK(t0.snapshots.size() == 1);
    CHECK(t0.reached);
    CHECK(t0.steps_to_eps == 0);
    CHECK(t0.snapshots.front().rel_error == 0.0);

    RunState go = init(sys, Stacked::Zero(10, 1));
    const auto tr = run(compact, go, StopRule{100000, 0.01, ref.x_star}, {.keep_iterates = false});
    REQUIRE(tr.reached);
    CHECK(tr.last().rel_error < 0.01);
    CHECK(tr.snapshots[tr.snapshots.size() - 2].rel_error >= 0.01);
    CHECK(tr.comms_to_eps == 2 * tr.steps_to_eps);
    for (std::size_t i = 1; i < tr.snapshots.size(); ++i) {
      REQUIRE(tr.snapshots[i].comm_rounds >= tr.snapshots[i - 1].comm_rounds);
      REQUIRE(tr.snapshots[i].grad_evals == tr.snapshots[i].iter);
    }

    Blowup blow;
    RunState b = init(sys, Stacked::Constant(10, 1, 1.0));
    CHECK(code_of([&] { run(blow, b, StopRule{100, 0.0, ref.x_star}); }) == ErrorCode::kDivergence);
  }

  TEST_CASE("separate dual round accounting") {
    auto inst = random_instance(2, 8);
    PdConfig cfg = make_cfg(0.05 / inst.objective.L(), 0.5, 3, BKind::laplacian());
    cfg.comm = CommAccounting::kSeparateDual;
    const PdSystem sys(cfg, inst.graph, inst.objective);
    CHECK(rounds_per_iteration(cfg) == 4);
    CompactEngine compact(sys);
    AgentwiseEngine agents(sys);
    RunState sc = init(sys, Stacked::Zero(8, 1));
    RunState sa = init(sys, Stacked::Zero(8, 1));
    for (int k = 0; k < 7; ++k) {
      compact.step(sc);
      agents.step(sa);
    }
    CHECK(sc.comm_rounds == 28);
    CHECK(sa.comm_rounds == 28);
  }

  TEST_CASE("relative error and consensus gap helpers") {
    Stacked x(3, 1);
    x << 1, 2, 6;
    CHECK(consensus_gap(x) == doctest::Approx(3.0));
    CHECK(relative_error(x, x, 0.0) == 0.0);
    Stacked y = x;
    y(0, 0) = 4;
    CHECK(relative_error(y, x, 1.5) == doctest::Approx(2.0));
  }
}
