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

#include "pdmp/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pdmp/error.hpp"

namespace pdmp {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// x' Q x summed over the d coordinate blocks.
double quad_form(const Matrix& q, const Stacked& x) { return (q * x).cwiseProduct(x).sum(); }

double max_abs(const Stacked& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

// xi/(xi-1) * a, with a vanishing coefficient staying zero as xi -> 1.
double young(double xi, double a) { return a == 0.0 ? 0.0 : xi / (xi - 1.0) * a; }

double spectral_gap_norm(const Matrix& a, const Matrix& n, double beta) {
  const Matrix gap = beta * (a.transpose() * a) - n;
  const Vector eig = symmetric_eigenvalues(0.5 * (gap + gap.transpose()));
  return std::max(std::abs(eig.minCoeff()), std::abs(eig.maxCoeff()));
}

bool is_beta_laplacian(const Matrix& a, const Matrix& n, double beta) {
  const Matrix target = beta * (a.transpose() * a);
  const double scale = std::max(1.0, target.cwiseAbs().maxCoeff());
  return (target - n).cwiseAbs().maxCoeff() <= 1e-9 * scale;
}

}  // namespace

double beta_bound(double m, double rho_ata) {
  if (!(m > 0.0) || !(rho_ata > 0.0)) {
    fail(ErrorCode::kInvalidInput, "beta bound needs m > 0 and rho(A'A) > 0");
  }
  return 2.0 * m / rho_ata;
}

double eta_upper(double m, double beta, double rho_ata, bool relaxed) {
  return relaxed ? 2.0 * m : 2.0 * m - beta * rho_ata;
}

double default_eta(double m, double beta, double rho_ata, bool relaxed) {
  const double hi = eta_upper(m, beta, rho_ata, relaxed);
  if (!(hi > 0.0)) {
    fail(ErrorCode::kInvalidEta, "eta interval (0, " + fmt(hi) + ") is empty: beta = " + fmt(beta) +
                                     " is not below 2m/rho(A'A) = " + fmt(2.0 * m / rho_ata));
  }
  return 0.5 * hi;
}

double alpha_bound(double eta, double L, double rho_b, int T) {
  if (!(eta > 0.0) || !(L > 0.0) || !(rho_b > 0.0) || T < 1) {
    fail(ErrorCode::kInvalidInput, "alpha bound needs eta, L, rho(B) > 0 and T >= 1");
  }
  const double ratio = L * L / (L * L + eta * rho_b);
  // 1 - ratio^{1/T} = -expm1(log(ratio) / T), kept accurate for ratio near 1.
  return -std::expm1(std::log(ratio) / T) / rho_b;
}

double alpha_bound(double eta, double L, double rho_b, int T, double m, double beta,
                   double rho_ata, bool relaxed) {
  const double hi = eta_upper(m, beta, rho_ata, relaxed);
  if (!(eta > 0.0) || !(eta < hi)) {
    fail(ErrorCode::kInvalidEta, "eta = " + fmt(eta) + " outside (0, " + fmt(hi) + ")");
  }
  return alpha_bound(eta, L, rho_b, T);
}

double alpha_bound_limit(double eta, double L, double rho_b) {
  return -std::log(L * L / (L * L + eta * rho_b)) / rho_b;
}

double m_lower_bound(double alpha, double rho_b, int T) {
  const double mu = 1.0 - alpha * rho_b;
  double sum = 0.0;
  double power = 1.0;
  for (int t = 0; t < T; ++t) {
    sum += power;
    power *= mu;
  }
  return power / sum;
}

double delta_first_bound(const RateInputs& in, double d) {
  const double lower = m_lower_bound(in.alpha, in.spectra.rhoB, in.T);
  const double slack = lower - in.alpha * in.L * in.L / in.eta;
  const double denom = 1.0 / in.T + in.alpha * in.L;
  return in.alpha * in.beta * slack * in.spectra.sAAt / (d * denom * denom);
}

double delta_second_bound(const RateInputs& in, double d, double rho_gap) {
  const double beta_term = in.relax_beta_bound ? 0.0 : in.alpha * in.beta * in.spectra.rhoAtA;
  const double numer = in.beta * (2.0 * in.alpha * in.m - in.alpha * in.eta - beta_term);
  const double spread = rho_gap + in.L;
  const double denom = d * in.alpha / ((d - 1.0) * in.spectra.sAAt) * spread * spread + in.beta / in.T;
  return numer / denom;
}

RateCertificate rate_delta(const RateInputs& raw) {
  if (!raw.M || !raw.N || !raw.A) fail(ErrorCode::kInvalidInput, "rate_delta needs M, N and A");
  if (!(raw.m > 0.0) || !(raw.L >= raw.m) || raw.T < 1) {
    fail(ErrorCode::kInvalidInput, "rate_delta needs 0 < m <= L and T >= 1");
  }
  RateInputs in = raw;
  RateCertificate cert;
  cert.beta_laplacian_regime = is_beta_laplacian(*in.A, *in.N, in.beta);
  cert.extra_regime = cert.beta_laplacian_regime && in.T == 1;
  in.relax_beta_bound = raw.relax_beta_bound && cert.beta_laplacian_regime;
  cert.beta_bound_relaxed = in.relax_beta_bound;

  cert.beta_max = beta_bound(in.m, in.spectra.rhoAtA);
  if (!(in.beta > 0.0) || (!in.relax_beta_bound && !(in.beta < cert.beta_max))) {
    fail(ErrorCode::kStepsizeViolation,
         "beta = " + fmt(in.beta) + " outside (0, " + fmt(cert.beta_max) + ")");
  }
  cert.eta = in.eta;
  cert.alpha_max = alpha_bound(in.eta, in.L, in.spectra.rhoB, in.T, in.m, in.beta,
                               in.spectra.rhoAtA, in.relax_beta_bound);
  if (!(in.alpha > 0.0) || !(in.alpha < cert.alpha_max)) {
    fail(ErrorCode::kStepsizeViolation,
         "alpha = " + fmt(in.alpha) + " outside (0, " + fmt(cert.alpha_max) + ")");
  }

  cert.rho_m = symmetric_eigenvalues(0.5 * (*in.M + in.M->transpose())).maxCoeff();
  cert.rho_gap = spectral_gap_norm(*in.A, *in.N, in.beta);
  if (cert.beta_laplacian_regime) cert.rho_gap = 0.0;
  cert.e = 1.0 + cert.rho_m / (in.alpha * in.L);
  cert.g = 1.0 + cert.rho_gap / in.L;

  // First bound falls like 1/d, the second rises with d: maximize the minimum
  // at the crossing.
  constexpr double kDMax = 1e6;
  auto excess = [&](double d) { return delta_first_bound(in, d) - delta_second_bound(in, d, cert.rho_gap); };
  double d_star = kDMax;
  if (excess(kDMax) < 0.0) {
    double lo = 1.0;
    double hi = kDMax;
    while (hi - lo > 1e-8 * lo) {
      const double mid = 0.5 * (lo + hi);
      (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    d_star = 0.5 * (lo + hi);
  }
  cert.d_star = d_star;
  cert.first_bound = delta_first_bound(in, d_star);
  cert.second_bound = delta_second_bound(in, d_star, cert.rho_gap);
  cert.delta = std::min(cert.first_bound, cert.second_bound);
  if (!(cert.delta > 0.0) || !std::isfinite(cert.delta)) {
    fail(ErrorCode::kCertificationFailure,
         "no positive rate constant for in-bounds stepsizes (delta = " + fmt(cert.delta) + ")");
  }
  cert.contraction = 1.0 / (1.0 + cert.delta);
  return cert;
}

double check_error_identity(const RunState& k, const RunState& k1, const MonitorContext& ctx,
                    const Matrix* m_override) {
  const Matrix& m = m_override ? *m_override : *ctx.M;
  const Matrix& a = *ctx.A;
  const Matrix coupling = ctx.beta * (a.transpose() * a) - *ctx.N;

  const Stacked grad_k = ctx.objective->gradient(k.x);
  const Stacked grad_opt = ctx.objective->gradient(ctx.x_star);
  const Stacked lhs = ctx.alpha * (grad_k - grad_opt);
  const Stacked rhs = m * (k.x - k1.x) + ctx.alpha * (coupling * (k1.x - ctx.x_star)) -
                      ctx.alpha * (a.transpose() * (k1.lambda - ctx.lambda_star));

  // Residuals are judged against the undifferenced magnitudes entering the
  // update, which is where rounding enters.
  const double scale = std::max(
      {max_abs(m * k.x), max_abs(m * k1.x), ctx.alpha * max_abs(grad_k), ctx.alpha * max_abs(grad_opt),
       ctx.alpha * max_abs(a.transpose() * k1.lambda), ctx.alpha * max_abs(a.transpose() * ctx.lambda_star),
       ctx.alpha * max_abs(coupling * k1.x)});
  const double residual = max_abs(lhs - rhs);
  if (residual == 0.0) return 0.0;
  return scale > 0.0 ? residual / scale : residual;
}

InequalityCheck check_descent_inequality(const RunState& k, const RunState& k1, const MonitorContext& ctx,
                             double eta) {
  const Matrix& a = *ctx.A;
  const Matrix& m = *ctx.M;
  const double alpha = ctx.alpha;
  const double w = alpha / ctx.beta;
  const Stacked dx1 = k1.x - ctx.x_star;
  const Stacked dx0 = k.x - ctx.x_star;
  const Stacked step = k1.x - k.x;

  const double t_curv = (2.0 * alpha * ctx.m - alpha * eta) * dx1.squaredNorm();
  const double t_coupling = 2.0 * alpha * quad_form(*ctx.N - ctx.beta * (a.transpose() * a), dx1);
  const double t_dual_step = w * (k1.lambda - k.lambda).squaredNorm();
  const double t_step_m = quad_form(m, step);
  const double t_step_l = alpha * ctx.L * ctx.L / eta * step.squaredNorm();
  const double e0 = quad_form(m, dx0);
  const double e1 = quad_form(m, dx1);
  const double l0 = w * (k.lambda - ctx.lambda_star).squaredNorm();
  const double l1 = w * (k1.lambda - ctx.lambda_star).squaredNorm();

  InequalityCheck out;
  out.lhs = t_curv + t_coupling + t_dual_step + t_step_m - t_step_l;
  out.rhs = e0 - e1 + l0 - l1;
  out.scale = std::abs(t_curv) + std::abs(t_coupling) + t_dual_step + std::abs(t_step_m) + t_step_l +
              std::abs(e0) + std::abs(e1) + l0 + l1;
  out.holds = out.lhs <= out.rhs + 1e-9 * std::max(1.0, out.scale);
  return out;
}

std::pair<double, double> optimal_e_g(const MonitorContext& ctx) {
  const double rho_m = symmetric_eigenvalues(0.5 * (*ctx.M + ctx.M->transpose())).maxCoeff();
  const double gap = spectral_gap_norm(*ctx.A, *ctx.N, ctx.beta);
  return {1.0 + rho_m / (ctx.alpha * ctx.L), 1.0 + gap / ctx.L};
}

InequalityCheck check_dual_bound(const RunState& k, const RunState& k1, const MonitorContext& ctx,
                             double d, double e, double g) {
  const double alpha = ctx.alpha;
  const double s = ctx.spectra.sAAt;
  const double rho_m = symmetric_eigenvalues(0.5 * (*ctx.M + ctx.M->transpose())).maxCoeff();
  const double gap = spectral_gap_norm(*ctx.A, *ctx.N, ctx.beta);
  const double a2 = alpha * alpha;
  const double l2 = ctx.L * ctx.L;

  const double step_coeff = d / (a2 * s) * (young(e, rho_m * rho_m) + e * a2 * l2);
  const double err_coeff = d / ((d - 1.0) * a2 * s) * (young(g, a2 * gap * gap) + a2 * g * l2);

  InequalityCheck out;
  out.lhs = (k1.lambda - ctx.lambda_star).squaredNorm();
  const double t_step = step_coeff * (k.x - k1.x).squaredNorm();
  const double t_err = err_coeff * (k1.x - ctx.x_star).squaredNorm();
  out.rhs = t_step + t_err;
  out.scale = out.lhs + out.rhs;
  out.holds = out.lhs <= out.rhs + 1e-9 * std::max(1.0, out.scale);
  return out;
}

ContractionReport check_contraction(const Trajectory& traj, const RateCertificate& cert,
                                    const GMetric& metric, double slack) {
  ContractionReport report;
  if (traj.snapshots.empty()) return report;
  if (traj.snapshots.front().x.size() == 0) {
    fail(ErrorCode::kInvalidInput, "contraction check needs a trajectory with kept iterates");
  }
  double prev = metric.energy(traj.snapshots.front().x, traj.snapshots.front().lambda);
  for (std::size_t k = 1; k < traj.snapshots.size(); ++k) {
    const auto& snap = traj.snapshots[k];
    const double cur = metric.energy(snap.x, snap.lambda);
    const double excess = cur - prev * cert.contraction;
    ++report.checked;
    report.worst_excess = std::max(report.worst_excess, excess);
    if (prev > 0.0) report.worst_ratio = std::max(report.worst_ratio, cur / prev);
    if (excess > slack) report.violations.push_back(traj.snapshots[k - 1].iter);
    prev = cur;
  }
  return report;
}

SpectrumReport check_mn_spectrum(double alpha, const Matrix& b, int T, const MNPair& mn) {
  SpectrumReport r;
  r.m_asymmetry = (mn.M - mn.M.transpose()).cwiseAbs().maxCoeff();
  r.n_asymmetry = (mn.N - mn.N.transpose()).cwiseAbs().maxCoeff();
  const Vector m_eig = symmetric_eigenvalues(0.5 * (mn.M + mn.M.transpose()));
  const Vector n_eig = symmetric_eigenvalues(0.5 * (mn.N + mn.N.transpose()));
  r.m_min = m_eig.minCoeff();
  r.m_max = m_eig.maxCoeff();
  r.n_min = n_eig.minCoeff();
  const double rho_b = symmetric_eigenvalues(b).maxCoeff();
  r.lower_bound = m_lower_bound(alpha, rho_b, T);
  r.upper_bound = 1.0 / T;
  r.passed = r.m_asymmetry <= 1e-12 && r.m_min >= r.lower_bound - 1e-10 &&
             r.m_max <= r.upper_bound + 1e-10 && r.n_min >= -1e-10;
  return r;
}

}  // namespace pdmp
