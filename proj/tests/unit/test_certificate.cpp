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

#include "test_util.hpp"
#include "pdmp/certificate.hpp"
#include "pdmp/graph.hpp"
#include "pdmp/harness.hpp"
#include "pdmp/objective.hpp"
#include "pdmp/primal_dual.hpp"

using namespace pdmp;
using testing::code_of;
using testing::max_abs;

namespace {

// One quadratic instance with stepsizes placed inside both bounds, its
// trajectory and everything the monitors need.
struct Certified {
  std::unique_ptr<PdSystem> sys;
  MNPair mn;
  Reference ref;
  RateCertificate cert;
  MonitorContext ctx;
  double eta = 0.0;

  Certified(NetworkGraph g, Objective obj, int T, double beta_fraction, double alpha_fraction,
            BKind shape = BKind::laplacian()) {
    const Matrix a = incidence_matrix(g);
    const auto sp0 = spectral(g, build_constraints(g, BKind::laplacian()));
    const double beta = beta_fraction * beta_bound(obj.m(), sp0.rhoAtA);
    const BKind kind = shape.tag == BKind::Tag::kBetaLaplacian ? BKind::beta_laplacian(beta) : shape;
    const auto sp = spectral(g, build_constraints(g, kind));
    eta = default_eta(obj.m(), beta, sp.rhoAtA);
    const double alpha = alpha_fraction * alpha_bound(eta, obj.L(), sp.rhoB, T);
    PdConfig cfg;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.T = T;
    cfg.b_kind = kind;
    sys = std::make_unique<PdSystem>(cfg, g, obj);
    mn = build_MN(alpha, sys->B(), T);
    ref = reference_solution(sys->objective(), sys->A());
    RateInputs in;
    in.alpha = alpha;
    in.beta = beta;
    in.T = T;
    in.m = obj.m();
    in.L = obj.L();
    in.eta = eta;
    in.spectra = sys->spectra();
    in.M = &mn.M;
    in.N = &mn.N;
    in.A = &sys->A();
    cert = rate_delta(in);
    ctx.M = &mn.M;
    ctx.N = &mn.N;
    ctx.A = &sys->A();
    ctx.objective = &sys->objective();
    ctx.alpha = alpha;
    ctx.beta = beta;
    ctx.m = obj.m();
    ctx.L = obj.L();
    ctx.spectra = sys->spectra();
    ctx.x_star = ref.x_star;
    ctx.lambda_star = ref.lambda_star;
  }

  GMetric metric() const { return {mn.M, ctx.alpha / ctx.beta, ref.x_star, ref.lambda_star}; }

  RateInputs inputs() const {
    RateInputs in;
    in.alpha = ctx.alpha;
    in.beta = ctx.beta;
    in.T = sys->config().T;
    in.m = ctx.m;
    in.L = ctx.L;
    in.eta = eta;
    in.spectra = ctx.spectra;
    in.M = &mn.M;
    in.N = &mn.N;
    in.A = &sys->A();
    return in;
  }

  Trajectory trajectory(int iters, const Stacked& x0) const {
    CompactEngine engine(*sys);
    RunState s = init(*sys, x0);
    const GMetric g = metric();
    RunOptions opts;
    opts.stop_at_epsilon = false;
    opts.metric = &g;
    return run(engine, s, StopRule{iters, 0.01, ref.x_star}, opts);
  }
};

RunState as_state(const Snapshot& s) {
  RunState r;
  r.x = s.x;
  r.lambda = s.lambda;
  return r;
}

Objective path2_quadratic() { return quadratic_objective(std::vector<double>{5, 5}, std::vector<double>{1, 7}); }

}  // namespace

TEST_SUITE("tuning") {
  TEST_CASE("beta bound") {
    CHECK(beta_bound(1.0, 2.0) == 1.0);
    const auto g = build_path(2);
    const auto obj = path2_quadratic();
    const auto sp = spectral(g, build_constraints(g, BKind::laplacian()));
    CHECK(obj.m() == 10.0);
    CHECK(beta_bound(obj.m(), sp.rhoAtA) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(beta_bound(6.0, 3.0) == 2.0 * beta_bound(3.0, 3.0));
    CHECK(code_of([] { beta_bound(0.0, 1.0); }) == ErrorCode::kInvalidInput);
    CHECK(code_of([] { beta_bound(1.0, -1.0); }) == ErrorCode::kInvalidInput);
  }

  TEST_CASE("eta interval") {
    CHECK(eta_upper(2.0, 0.5, 4.0) == 2.0);
    CHECK(default_eta(2.0, 0.5, 4.0) == 1.0);
    CHECK(eta_upper(2.0, 0.5, 4.0, true) == 4.0);
    CHECK(code_of([] { alpha_bound(2.5, 1.0, 1.0, 1, 2.0, 0.5, 4.0); }) == ErrorCode::kInvalidEta);
    CHECK(code_of([] { alpha_bound(0.0, 1.0, 1.0, 1, 2.0, 0.5, 4.0); }) == ErrorCode::kInvalidEta);
    CHECK(code_of([] { alpha_bound(1.0, 1.0, 1.0, 1, 2.0, 1.0, 4.0); }) == ErrorCode::kInvalidEta);
    CHECK_NOTHROW(alpha_bound(1.0, 1.0, 1.0, 1, 2.0, 0.5, 4.0));
  }

  TEST_CASE("alpha bound values") {
    CHECK(alpha_bound(1.0, 1.0, 1.0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    for (double eta : {0.1, 1.0, 7.0}) {
      for (double L : {0.5, 3.0}) {
        for (double rho : {0.2, 4.0}) {
          CHECK(alpha_bound(eta, L, rho, 1) == doctest::Approx(eta / (L * L + eta * rho)).epsilon(1e-12));
        }
      }
    }
    CHECK(code_of([] { alpha_bound(1.0, 1.0, 1.0, 0); }) == ErrorCode::kInvalidInput);
    CHECK(code_of([] { alpha_bound(1.0, 0.0, 1.0, 1); }) == ErrorCode::kInvalidInput);
  }

  TEST_CASE("alpha bound monotonicity in T and L") {
    // Triples drawn the way an instance produces them: m <= L, B = b A'A with
    // b below 2m / rho(A'A), eta inside (0, 2m - b rho(A'A)).
    Rng rng(64);
    for (int trial = 0; trial < 100; ++trial) {
      const double L = std::exp(rng.uniform(-3, 5));
      const double m = L * rng.uniform(0.01, 1.0);
      const double rho_ata = rng.uniform(0.5, 16.0);
      const double beta = rng.uniform(0.01, 0.99) * beta_bound(m, rho_ata);
      const double eta = rng.uniform(0.01, 0.99) * eta_upper(m, beta, rho_ata);
      const double rho = beta * rho_ata;
      double prev = 0.0;
      for (int T = 1; T <= 64; ++T) {
        const double a = alpha_bound(eta, L, rho, T);
        REQUIRE(a > 0.0);
        REQUIRE(T * a >= prev);
        prev = T * a;
      }
      const double limit = alpha_bound_limit(eta, L, rho);
      CHECK(prev <= limit * (1 + 1e-12));
      CHECK(std::abs(prev - limit) <= 0.01 * limit);
      CHECK(alpha_bound(eta, 1.5 * L, rho, 3) < alpha_bound(eta, L, rho, 3));
    }
  }

  TEST_CASE("rate certificate on the two-agent path") {
    for (int T = 1; T <= 4; ++T) {
      Certified c(build_path(2), path2_quadratic(), T, 0.5, 0.9);
      CHECK(c.cert.delta > 0.0);
      CHECK(c.cert.contraction > 0.0);
      CHECK(c.cert.contraction < 1.0);
      CHECK(c.cert.contraction == doctest::Approx(1.0 / (1.0 + c.cert.delta)));
      CHECK(c.cert.beta_max == doctest::Approx(10.0));
      CHECK(c.cert.eta == doctest::Approx(c.eta));
      CHECK(c.cert.d_star > 1.0);
      CHECK(c.cert.e == doctest::Approx(1.0 + c.cert.rho_m / (c.ctx.alpha * c.ctx.L)));
      const RateInputs in = c.inputs();
      for (double d : {1.001, 1.5, 2.0, 10.0, 100.0}) {
        const double sampled = std::min(delta_first_bound(in, d), delta_second_bound(in, d, c.cert.rho_gap));
        CHECK(c.cert.delta >= sampled * (1 - 1e-8));
      }
    }
  }

  TEST_CASE("certificate regimes") {
    // B = beta A'A: N - beta A'A vanishes.
    Certified same(build_cycle(6), random_quadratic_instance(6, 2), 1, 0.5, 0.9, BKind::beta_laplacian(1.0));
    CHECK(same.cert.beta_laplacian_regime);
    CHECK(same.cert.extra_regime);
    CHECK(same.cert.rho_gap < 1e-8 * std::max(1.0, same.ctx.beta));
    CHECK(same.cert.g == doctest::Approx(1.0 + same.cert.rho_gap / same.ctx.L));
    CHECK_FALSE(same.cert.beta_bound_relaxed);

    Certified t3(build_cycle(6), random_quadratic_instance(6, 2), 3, 0.5, 0.9, BKind::beta_laplacian(1.0));
    CHECK(t3.cert.beta_laplacian_regime);
    CHECK_FALSE(t3.cert.extra_regime);

    Certified lap(build_cycle(6), random_quadratic_instance(6, 2), 2, 0.5, 0.9);
    CHECK_FALSE(lap.cert.beta_laplacian_regime);
    CHECK(lap.cert.rho_gap > 0.0);

    // Relaxation: beta above 2m/rho(A'A) with B = beta A'A.
    RateInputs in = same.inputs();
    in.beta = 3.0 * same.cert.beta_max;
    CHECK(code_of([&] { rate_delta(in); }) == ErrorCode::kStepsizeViolation);
  }

  TEST_CASE("certificate refuses out-of-bound stepsizes") {
    Certified c(build_cycle(5), random_quadratic_instance(5, 8), 2, 0.5, 0.9);
    RateInputs in = c.inputs();
    in.alpha = 1.01 * c.cert.alpha_max;
    CHECK(code_of([&] { rate_delta(in); }) == ErrorCode::kStepsizeViolation);
    in = c.inputs();
    in.beta = 1.01 * c.cert.beta_max;
    CHECK(code_of([&] { rate_delta(in); }) != ErrorCode{});
    in = c.inputs();
    in.eta = 10.0 * eta_upper(c.ctx.m, c.ctx.beta, c.ctx.spectra.rhoAtA);
    CHECK(code_of([&] { rate_delta(in); }) == ErrorCode::kInvalidEta);
  }

  TEST_CASE("contraction holds along certified trajectories") {
    Certified p(build_path(2), path2_quadratic(), 2, 0.5, 0.9);
    Stacked x0(2, 1);
    x0 << -3, 12;
    const auto traj = p.trajectory(500, x0);
    const auto rep = check_contraction(traj, p.cert, p.metric());
    CHECK(rep.checked == 500);
    CHECK(rep.passed());
    CHECK(rep.worst_excess <= 1e-9);

    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const int n = 5 + static_cast<int>(seed);
      Certified c(build_k_regular_random(n, 4, seed), random_quadratic_instance(n, seed), 1 + seed % 4, 0.5, 0.9);
      const auto t = c.trajectory(500, Stacked::Zero(n, 1));
      CHECK(check_contraction(t, c.cert, c.metric()).passed());
    }

    // Zero error throughout: nothing to violate.
    const auto still = p.trajectory(20, p.ref.x_star);
    CHECK(check_contraction(still, p.cert, p.metric()).passed());
  }

  TEST_CASE("contraction monitor reports violations instead of throwing") {
    Certified c(build_cycle(8), random_quadratic_instance(8, 5, {1, 100}, {1, 100}), 1, 0.5, 0.9);
    const double rho_b = c.ctx.spectra.rhoB;
    const double alpha = std::min(2.0 * c.cert.alpha_max, 0.99 / rho_b);
    PdConfig cfg = c.sys->config();
    cfg.alpha = alpha;
    PdSystem sys(cfg, c.sys->graph(), c.sys->objective());
    const MNPair mn = build_MN(alpha, sys.B(), cfg.T);
    const GMetric metric{mn.M, alpha / cfg.beta, c.ref.x_star, c.ref.lambda_star};
    CompactEngine engine(sys);
    RunState s = init(sys, Stacked::Zero(8, 1));
    RunOptions opts;
    opts.stop_at_epsilon = false;
    opts.metric = &metric;
    const auto traj = run(engine, s, StopRule{300, 0.01, c.ref.x_star}, opts);
    RateCertificate cert = c.cert;
    const auto rep = check_contraction(traj, cert, metric);
    CHECK(rep.checked == 300);
    CHECK(std::isfinite(rep.worst_ratio));
    for (auto k : rep.violations) CHECK((k >= 0 && k < 300));
  }

  TEST_CASE("error identity along runs") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      for (int T = 1; T <= 4; ++T) {
        Certified c(build_k_regular_random(10, 4, seed), random_quadratic_instance(10, seed), T, 0.5, 0.9);
        const auto t = c.trajectory(100, Stacked::Zero(10, 1));
        for (std::size_t k = 0; k + 1 < t.snapshots.size(); ++k) {
          REQUIRE(check_error_identity(as_state(t.snapshots[k]), as_state(t.snapshots[k + 1]), c.ctx) <= 1e-10);
        }
        RunState fixed;
        fixed.x = c.ref.x_star;
        fixed.lambda = c.ref.lambda_star;
        CHECK(check_error_identity(fixed, fixed, c.ctx) <= 1e-12);
      }
    }
  }

  TEST_CASE("error identity with the wrong M is visibly violated") {
    Certified c(build_k_regular_random(10, 4, 3), random_quadratic_instance(10, 3), 3, 0.5, 0.9);
    const auto t = c.trajectory(20, Stacked::Zero(10, 1));
    const Matrix wrong = Matrix::Identity(10, 10) - c.ctx.alpha * c.sys->B();
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < t.snapshots.size(); ++k) {
      worst = std::max(worst, check_error_identity(as_state(t.snapshots[k]), as_state(t.snapshots[k + 1]), c.ctx, &wrong));
    }
    CHECK(worst > 1e-3);
  }

  TEST_CASE("descent inequality") {
    Rng rng(2024);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const int n = 5 + static_cast<int>(seed % 11);
      Certified c(build_k_regular_random(n, 4, seed), random_quadratic_instance(n, seed), 1 + seed % 4, 0.5, 0.9);
      const auto t = c.trajectory(100, Stacked::Zero(n, 1));
      const double hi = eta_upper(c.ctx.m, c.ctx.beta, c.ctx.spectra.rhoAtA);
      std::vector<double> etas{c.eta};
      for (int j = 0; j < 3; ++j) etas.push_back(rng.uniform(0.01, 0.99) * hi);
      for (double eta : etas) {
        for (std::size_t k = 0; k + 1 < t.snapshots.size(); ++k) {
          const auto r = check_descent_inequality(as_state(t.snapshots[k]), as_state(t.snapshots[k + 1]), c.ctx, eta);
          REQUIRE(r.holds);
        }
      }
    }
    Certified c(build_cycle(6), random_quadratic_instance(6, 1), 2, 0.5, 0.9);
    RunState fixed;
    fixed.x = c.ref.x_star;
    fixed.lambda = c.ref.lambda_star;
    const auto r = check_descent_inequality(fixed, fixed, c.ctx, c.eta);
    CHECK(r.holds);
    CHECK(std::abs(r.lhs) <= 1e-12 * std::max(1.0, r.scale));
    CHECK(std::abs(r.rhs) <= 1e-12 * std::max(1.0, r.scale));
  }

  TEST_CASE("dual error bound") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const int n = 5 + static_cast<int>(seed);
      Certified c(build_k_regular_random(n, 4, seed), random_quadratic_instance(n, seed), 1 + seed % 4, 0.5, 0.9);
      const auto [e_opt, g_opt] = optimal_e_g(c.ctx);
      CHECK(e_opt == doctest::Approx(c.cert.e));
      CHECK(g_opt == doctest::Approx(c.cert.g));
      const auto t = c.trajectory(100, Stacked::Zero(n, 1));
      for (std::size_t k = 0; k + 1 < t.snapshots.size(); ++k) {
        const RunState s0 = as_state(t.snapshots[k]);
        const RunState s1 = as_state(t.snapshots[k + 1]);
        REQUIRE(check_dual_bound(s0, s1, c.ctx, 2.0, 2.0, 2.0).holds);
        REQUIRE(check_dual_bound(s0, s1, c.ctx, 2.0, e_opt, g_opt).holds);
        REQUIRE(check_dual_bound(s0, s1, c.ctx, c.cert.d_star, c.cert.e, c.cert.g).holds);
      }
    }
    Certified c(build_cycle(6), random_quadratic_instance(6, 1), 2, 0.5, 0.9);
    RunState fixed;
    fixed.x = c.ref.x_star;
    fixed.lambda = c.ref.lambda_star;
    const auto r = check_dual_bound(fixed, fixed, c.ctx, 2.0, 2.0, 2.0);
    CHECK(r.holds);
    CHECK(std::abs(r.lhs) <= 1e-12 * std::max(1.0, r.scale));
  }

  TEST_CASE("M and N spectrum on random triples") {
    Rng rng(50);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 4 + static_cast<int>(rng.uniform_index(12));
      const auto g = trial % 3 == 0 ? build_cycle(n) : build_k_regular_random(std::max(n, 5), 4, trial);
      const Matrix b = (0.2 + 3.0 * rng.uniform01()) * laplacian(g);
      const double alpha = rng.uniform(0.05, 0.98) / symmetric_eigenvalues(b).maxCoeff();
      const int T = 1 + static_cast<int>(rng.uniform_index(8));
      const auto rep = check_mn_spectrum(alpha, b, T, build_MN(alpha, b, T));
      CHECK(rep.passed);
      CHECK(rep.m_asymmetry <= 1e-12);
      CHECK(rep.m_min >= rep.lower_bound - 1e-10);
      CHECK(rep.m_max <= 1.0 / T + 1e-10);
      CHECK(rep.n_min >= -1e-10);
      CHECK(rep.lower_bound == doctest::Approx(m_lower_bound(alpha, symmetric_eigenvalues(b).maxCoeff(), T)));
    }
  }
}
