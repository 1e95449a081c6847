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
#include <vector>

#include "pdmp/graph.hpp"
#include "pdmp/objective.hpp"
#include "pdmp/primal_dual.hpp"
#include "pdmp/types.hpp"

namespace pdmp {

// Admissible dual stepsize: 0 < beta < 2m / rho(A'A).
double beta_bound(double m, double rho_ata);

// Upper end of the admissible eta interval, 2m - beta rho(A'A). When the
// augmentation is B = beta A'A the beta term drops out of the analysis and,
// if `relaxed` is set, the interval becomes (0, 2m).
double eta_upper(double m, double beta, double rho_ata, bool relaxed = false);
double default_eta(double m, double beta, double rho_ata, bool relaxed = false);

// (1 - (L^2 / (L^2 + eta rho(B)))^{1/T}) / rho(B)
double alpha_bound(double eta, double L, double rho_b, int T);
// Same, after checking eta against its admissible interval (kInvalidEta).
double alpha_bound(double eta, double L, double rho_b, int T, double m, double beta,
                   double rho_ata, bool relaxed = false);
// Large-T limit of T * alpha_bound: -ln(L^2 / (L^2 + eta rho(B))) / rho(B).
double alpha_bound_limit(double eta, double L, double rho_b);

// Lower end of the spectrum of M guaranteed for alpha rho(B) < 1:
// (1 - a rho)^T / sum_{t<T} (1 - a rho)^t.
double m_lower_bound(double alpha, double rho_b, int T);

struct RateInputs {
  double alpha = 0.0;
  double beta = 0.0;
  int T = 1;
  double m = 0.0;
  double L = 0.0;
  double eta = 0.0;
  SpectralBounds spectra;
  const Matrix* M = nullptr;
  const Matrix* N = nullptr;
  const Matrix* A = nullptr;
  bool relax_beta_bound = false;  // honored only when N == beta A'A
};

struct RateCertificate {
  double beta_max = 0.0;
  double eta = 0.0;
  double alpha_max = 0.0;
  double delta = 0.0;
  double d_star = 0.0;
  double e = 0.0;  // 1 + rho(M) / (alpha L)
  double g = 0.0;  // 1 + sqrt(rho((beta A'A - N)^2)) / L
  double rho_m = 0.0;
  double rho_gap = 0.0;  // sqrt(rho((beta A'A - N)^2))
  double first_bound = 0.0;
  double second_bound = 0.0;
  double contraction = 1.0;  // 1 / (1 + delta)
  bool beta_laplacian_regime = false;  // N == beta A'A
  bool extra_regime = false;           // additionally T == 1
  bool beta_bound_relaxed = false;
  std::string metric = "G = blockdiag(M, (alpha/beta) I)";
};

// The two upper bounds on delta as functions of the free parameter d > 1.
double delta_first_bound(const RateInputs& in, double d);
double delta_second_bound(const RateInputs& in, double d, double rho_gap);

// Admissibility is checked first (kStepsizeViolation / kInvalidEta); d is
// then placed at the crossing of the two bounds by bisection on (1, 1e6].
RateCertificate rate_delta(const RateInputs& in);

// (M, N, A) plus the moduli, stepsizes and optimum the monitors evaluate
// against.
struct MonitorContext {
  const Matrix* M = nullptr;
  const Matrix* N = nullptr;
  const Matrix* A = nullptr;
  const Objective* objective = nullptr;
  double alpha = 0.0;
  double beta = 0.0;
  double m = 0.0;
  double L = 0.0;
  SpectralBounds spectra;
  Stacked x_star;
  Stacked lambda_star;
};

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;
  bool holds = true;
};

// Relative max-norm residual of
//   a(grad f(x^k) - grad f(x*)) = M(x^k - x^{k+1}) + a(b A'A - N)(x^{k+1} - x*)
//                                 - a A'(lambda^{k+1} - lambda*).
// M_override substitutes another matrix for M (negative controls).
double check_error_identity(const RunState& k, const RunState& k1, const MonitorContext& ctx,
                    const Matrix* m_override = nullptr);

// Fundamental inequality for a given eta > 0. Slack 1e-9 max(1, scale).
InequalityCheck check_descent_inequality(const RunState& k, const RunState& k1, const MonitorContext& ctx,
                             double eta);

// Dual error bound for d, e, g > 1.
InequalityCheck check_dual_bound(const RunState& k, const RunState& k1, const MonitorContext& ctx,
                             double d, double e, double g);

// e and g minimizing the right-hand side of the dual error bound.
std::pair<double, double> optimal_e_g(const MonitorContext& ctx);

struct ContractionReport {
  std::int64_t checked = 0;
  std::vector<std::int64_t> violations;  // offending k
  double worst_ratio = 0.0;               // max E_{k+1} / E_k over E_k > 0
  double worst_excess = -1.0;             // max E_{k+1} - E_k / (1 + delta)

  bool passed() const { return violations.empty(); }
};

// E_{k+1} <= E_k / (1 + delta) + slack for every consecutive pair of kept
// iterates, with E the G-weighted squared error.
ContractionReport check_contraction(const Trajectory& traj, const RateCertificate& cert,
                                    const GMetric& metric, double slack = 1e-9);

struct SpectrumReport {
  double m_asymmetry = 0.0;
  double n_asymmetry = 0.0;
  double m_min = 0.0;
  double m_max = 0.0;
  double n_min = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  bool passed = false;
};

// Symmetry within 1e-12, M's spectrum inside [lower - 1e-10, 1/T + 1e-10],
// N's smallest eigenvalue >= -1e-10.
SpectrumReport check_mn_spectrum(double alpha, const Matrix& b, int T, const MNPair& mn);

}  // namespace pdmp
