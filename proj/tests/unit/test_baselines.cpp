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

#include "oracles.hpp"
#include "test_util.hpp"
#include "pdmp/baselines.hpp"
#include "pdmp/certificate.hpp"
#include "pdmp/graph.hpp"
#include "pdmp/harness.hpp"
#include "pdmp/objective.hpp"
#include "pdmp/primal_dual.hpp"

using namespace pdmp;
using testing::code_of;
using testing::max_abs;

namespace {

Stacked column(std::initializer_list<double> v) {
  Stacked s(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) s(i++, 0) = x;
  return s;
}

double rel_err(const Stacked& x, const Stacked& xs, const Stacked& x0) {
  return (x - xs).norm() / (x0 - xs).norm();
}

}  // namespace

TEST_SUITE("baselines") {
  TEST_CASE("EXTRA parameterization") {
    const PdConfig cfg = extra_config(0.01, 0.7, 1);
    CHECK(cfg.T == 1);
    CHECK(cfg.b_kind.tag == BKind::Tag::kBetaLaplacian);
    CHECK(cfg.b_kind.beta == 0.7);
    CHECK(cfg.beta == 0.7);
    const auto g = build_path(2);  // rho(A'A) = 2
    CHECK_FALSE(extra_outside_precondition(0.2, 1.0, g));
    CHECK(extra_outside_precondition(0.5, 1.0, g));
    CHECK(extra_outside_precondition(0.6, 1.0, g));
    CHECK(code_of([&] {
            PdSystem(extra_config(0.5, 1.0, 1), g, quadratic_objective(std::vector<double>{1, 1}, std::vector<double>{0, 1}));
          }) == ErrorCode::kStepsizeViolation);
  }

  TEST_CASE("EXTRA recursion matches PD with one primal step") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const int n = 5 + static_cast<int>(seed);
      const auto g = build_k_regular_random(n, 4, seed);
      const auto obj = random_quadratic_instance(n, seed + 50, {1, 10}, {1, 100});
      const double beta = 0.5 + 0.25 * static_cast<double>(seed);
      const auto sp = spectral(g, build_constraints(g, BKind::beta_laplacian(beta)));
      const double alpha = 0.9 * alpha_bound(obj.m(), obj.L(), sp.rhoB, 1);
      const PdSystem sys(extra_config(alpha, beta, 1), g, obj);
      CompactEngine engine(sys);
      Rng rng(seed);
      const Stacked x0 = testing::random_stacked(n, 1, rng, 30.0);
      RunState s = init(sys, x0);
      const Matrix ata = laplacian(g);
      const Matrix eye = Matrix::Identity(n, n);
      testing::ExtraOracle oracle(eye - 2 * alpha * beta * ata, alpha, obj, x0, eye - alpha * beta * ata);
      double worst = 0.0;
      for (int k = 0; k < 200; ++k) {
        engine.step(s);
        const Stacked& ox = oracle.step();
        worst = std::max(worst, max_abs(s.x - ox) / std::max(1.0, max_abs(ox)));
      }
      CHECK(worst <= 1e-8);
    }
  }

  TEST_CASE("metropolis weights") {
    const auto w2 = metropolis_weights(build_path(2)).W;
    CHECK(w2(0, 0) == 0.5);
    CHECK(w2(0, 1) == 0.5);
    CHECK(w2(1, 0) == 0.5);
    CHECK(w2(1, 1) == 0.5);
    const auto c4 = metropolis_weights(build_cycle(4)).W;
    Vector ev = symmetric_eigenvalues(c4);
    CHECK(std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 2))) < 1.0);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto g = seed % 2 ? build_cycle(5 + static_cast<int>(seed)) : build_k_regular_random(10, 4, seed);
      const Matrix w = metropolis_weights(g).W;
      const int n = g.agents();
      CHECK(max_abs(w - w.transpose()) == 0.0);
      for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
          if (j != i) sum += w(i, j);
          if (i != j && !g.has_edge(i, j)) CHECK(w(i, j) == 0.0);
          if (g.has_edge(i, j)) CHECK(w(i, j) == 1.0 / (1.0 + std::max(g.degree(i), g.degree(j))));
        }
        CHECK(w(i, i) == 1.0 - sum);
        CHECK(std::abs(w.row(i).sum() - 1.0) <= 1e-15);
      }
      ev = symmetric_eigenvalues(w);
      CHECK(ev(n - 1) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(ev(n - 2) < 1.0 - 1e-9);
      CHECK(ev(0) > -1.0);
    }
  }

  TEST_CASE("DIGing gradient tracking") {
    const auto g = build_k_regular_random(12, 4, 4);
    const auto obj = random_quadratic_instance(12, 4, {1, 50}, {1, 100});
    const auto w = metropolis_weights(g);
    DigingStepper dig(w, 0.2 / obj.L(), obj);
    Rng rng(1);
    RunState s = dig.start(testing::random_stacked(12, 1, rng, 10.0));
    CHECK(s.grad_evals == 1);
    for (int k = 0; k < 300; ++k) {
      dig.step(s);
      const Stacked grad = obj.gradient(s.x);
      const double scale = std::max(1.0, grad.cwiseAbs().maxCoeff());
      REQUIRE(std::abs(s.aux.colwise().mean()(0) - grad.colwise().mean()(0)) <= 1e-12 * scale);
      REQUIRE(max_abs(s.aux2 - grad) == 0.0);
    }
    CHECK(s.comm_rounds == 300);
    CHECK(s.grad_evals == 301);

    // Consensus optimum with a zero tracker is a fixed point.
    const auto ref = reference_solution(obj, incidence_matrix(g));
    RunState fixed = dig.start(ref.x_star);
    fixed.aux.setZero();
    for (int k = 0; k < 5; ++k) dig.step(fixed);
    CHECK(max_abs(fixed.x - ref.x_star) <= 1e-12 * std::max(1.0, max_abs(ref.x_star)));
  }

  TEST_CASE("DIGing converges on the two-agent path") {
    const auto g = build_path(2);
    const auto obj = quadratic_objective(std::vector<double>{1, 3}, std::vector<double>{4, 0});
    DigingStepper dig(metropolis_weights(g), 0.05, obj);
    const Stacked x0 = column({0, 0});
    RunState s = dig.start(x0);
    const Stacked xs = column({1, 1});
    int k = 0;
    while (k < 2000 && rel_err(s.x, xs, x0) >= 1e-6) {
      dig.step(s);
      ++k;
    }
    CHECK(rel_err(s.x, xs, x0) < 1e-6);
    CHECK(k < 2000);
  }

  TEST_CASE("NEAR-DGD+ schedule and accounting") {
    const auto g = build_k_regular_random(10, 4, 2);
    const auto obj = random_quadratic_instance(10, 2, {1, 10000}, {1, 100});
    const auto w = metropolis_weights(g);
    const double alpha = 1.0 / obj.L();
    Stacked a = Stacked::Constant(10, 1, 3.0);
    // k = 1: one consensus round applied after the local gradient step.
    const Stacked b = w.W * (a - alpha * obj.gradient(a));
    near_dgd_plus_step(a, 1, w.W, alpha, obj);
    CHECK(max_abs(a - b) <= 1e-15 * std::max(1.0, max_abs(b)));
    Stacked c = Stacked::Constant(10, 1, 3.0);
    near_dgd_plus_step(c, 3, w.W, alpha, obj);
    const Stacked manual = w.W * (w.W * (w.W * (Stacked::Constant(10, 1, 3.0) - alpha * obj.gradient(Stacked::Constant(10, 1, 3.0)))));
    CHECK(max_abs(c - manual) <= 1e-12 * max_abs(manual));
    CHECK(code_of([&] { near_dgd_plus_step(c, 0, w.W, alpha, obj); }) == ErrorCode::kInvalidInput);

    NearDgdPlusStepper near(w, alpha, obj);
    const Stacked x0 = Stacked::Zero(10, 1);
    RunState s = near.start(x0);
    const auto ref = reference_solution(obj, incidence_matrix(g));
    bool reached = false;
    for (std::int64_t k = 1; k <= 200; ++k) {
      near.step(s);
      REQUIRE(s.comm_rounds == k * (k + 1) / 2);
      if (rel_err(s.x, ref.x_star, x0) < 0.01) {
        reached = true;
        break;
      }
    }
    CHECK(reached);
  }

  TEST_CASE("DGD plateaus and pure averaging") {
    const auto g = build_cycle(8);
    const auto obj = random_quadratic_instance(8, 6, {1, 10}, {1, 100});
    const auto w = metropolis_weights(g);
    DgdStepper dgd(w, 0.5 / obj.L(), obj);
    const Stacked x0 = Stacked::Zero(8, 1);
    RunState s = dgd.start(x0);
    const auto ref = reference_solution(obj, incidence_matrix(g));
    std::vector<double> errs;
    for (int k = 0; k < 4000; ++k) {
      dgd.step(s);
      if (k >= 3000) errs.push_back(rel_err(s.x, ref.x_star, x0));
    }
    const auto [lo, hi] = std::minmax_element(errs.begin(), errs.end());
    CHECK(*lo > 1e-4);
    CHECK(*hi - *lo < 1e-6 * *hi);

    DgdStepper avg(w, 0.0, obj);
    Rng rng(3);
    RunState a = avg.start(testing::random_stacked(8, 1, rng, 5.0));
    const double mean = a.x.mean();
    for (int k = 0; k < 3000; ++k) avg.step(a);
    CHECK(max_abs(a.x - Stacked::Constant(8, 1, mean)) < 1e-10);
  }

  TEST_CASE("method of multipliers") {
    const auto g = build_k_regular_random(10, 4, 9);
    const auto obj = random_quadratic_instance(10, 9);
    const Matrix a = incidence_matrix(g);
    const double beta = 4.0;
    const Matrix b = beta * laplacian(g);
    const auto ref = reference_solution(obj, a);
    const Stacked x0 = Stacked::Zero(10, 1);
    MethodOfMultipliers mm(obj, a, b, beta);
    RunState s = mm.start(x0);
    std::vector<double> errs{1.0};
    for (int k = 0; k < 400; ++k) {
      mm.step(s);
      const Stacked grad_l = obj.gradient(s.x) + a.transpose() * (s.lambda - beta * a * s.x) + b * s.x;
      REQUIRE(grad_l.norm() <= 1e-8 * std::max(1.0, obj.gradient(s.x).norm()));
      errs.push_back(rel_err(s.x, ref.x_star, x0));
      CHECK(mm.last_inner_residual() <= 1e-10 * std::max(1.0, obj.gradient(s.x).norm() + (a.transpose() * s.lambda).norm() + (b * s.x).norm()));
    }
    CHECK(s.comm_rounds == 0);
    // Linear convergence: the error ratio over 50 outer steps stays below a
    // fixed factor once past the transient.
    CHECK(errs[300] < errs[100]);
    CHECK(errs[200] / errs[100] < 0.9);
    CHECK(errs[300] / errs[200] < 0.9);

    // beta = 0: lambda stays at zero and every inner solve lands on the same x.
    MethodOfMultipliers frozen(obj, a, laplacian(g), 0.0);
    RunState f = frozen.start(x0);
    frozen.step(f);
    const Stacked first = f.x;
    for (int k = 0; k < 5; ++k) {
      frozen.step(f);
      CHECK(max_abs(f.lambda) == 0.0);
      CHECK(max_abs(f.x - first) <= 1e-12 * max_abs(first));
    }
  }

  TEST_CASE("method of multipliers beats PD with one primal step") {
    const auto g = build_k_regular_random(10, 4, 1);
    const auto obj = random_quadratic_instance(10, 1);
    const Matrix a = incidence_matrix(g);
    const auto ref = reference_solution(obj, a);
    const Stacked x0 = Stacked::Zero(10, 1);
    RunOptions opts;
    opts.keep_iterates = false;
    const auto mm = method_of_multipliers(obj, a, 4.0 * laplacian(g), 4.0, 1e-10, 200000, x0,
                                          StopRule{200000, 0.01, ref.x_star}, opts);
    REQUIRE(mm.reached);

    AlgorithmSpec spec;
    spec.name = "pd";
    spec.T_list = {1};
    const auto st = resolve_pd_stepsizes(spec, 1, g, obj);
    const PdSystem sys(st.config, g, obj);
    CompactEngine engine(sys);
    RunState s = init(sys, x0);
    const auto pd = run(engine, s, StopRule{2000000, 0.01, ref.x_star}, opts);
    REQUIRE(pd.reached);
    CHECK(mm.steps_to_eps < pd.steps_to_eps);
  }

  TEST_CASE("method of multipliers on a logistic objective") {
    Rng rng(4);
    auto data = std::make_shared<Dataset>();
    data->features.resize(80, 3);
    for (int j = 0; j < 80; ++j) {
      for (int c = 0; c < 3; ++c) data->features(j, c) = rng.normal();
      data->labels.push_back(data->features(j, 0) + 0.3 * rng.normal() > 0 ? 1.0 : -1.0);
    }
    const auto obj = logistic_objective(data, 5, 1.0);
    const auto g = build_cycle(5);
    const Matrix a = incidence_matrix(g);
    const auto ref = reference_solution(obj, a, ReferenceMethod::kHighPrecision);
    MethodOfMultipliers mm(obj, a, laplacian(g), 1.0);
    RunState s = mm.start(Stacked::Zero(5, 3));
    mm.step(s);
    CHECK(mm.last_inner_iterations() >= 2);
    for (int k = 0; k < 60; ++k) mm.step(s);
    CHECK((s.x - ref.x_star).norm() < 1e-6);
  }
}
