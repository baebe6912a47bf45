#include "pulse_esprit/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pulse_esprit/error.hpp"

namespace pulse_esprit {
namespace {

double need(const std::optional<double>& v, const char* name) {
  if (!v) throw Error(ErrorCode::MissingField, std::string("theory context lacks ") + name);
  return *v;
}

double need_tilde(const std::optional<double>& v, const char* name) {
  if (!v) throw Error(ErrorCode::MissingTilde, std::string("theory context lacks ") + name);
  return *v;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be positive");
}

}  // namespace

double TheoryContext::compute_nu() const {
  const double s = need(sigma, "sigma");
  const double g = need(G_min, "G_min");
  const double sp = need(sigmaS_Phi, "sigmaS_Phi");
  const double lam = need(lambdaS_RX, "lambdaS_RX");
  require_positive(g * sp * lam, "G_min sigma_S(Phi) lambda_S(R_X)");
  return s * s / (g * g * sp * sp * lam);
}

double prop1_bound(const TheoryContext& ctx) {
  const double kappa = need(ctx.kappa_Phi, "kappa_Phi");
  const double gmax = need(ctx.G_max, "G_max");
  const double gmin = need(ctx.G_min, "G_min");
  const double gamma = need(ctx.Gamma, "Gamma");
  const double dist = need(ctx.dist_U, "dist_U");
  const double su1 = need(ctx.sigmaS_U1, "sigmaS_U1");
  const double pic = need(ctx.pic_violation, "pic_violation");
  require_positive(su1, "sigma_S(U1)");
  require_positive(gmin, "G_min");
  require_positive(gamma, "Gamma");
  return kappa * gmax / (2.0 * gamma * gmin) * (3.0 * dist / (su1 * su1) + pic / (su1 * gmin));
}

PropCondition check_prop_condition(const CMatrix& u_hat, const CMatrix& u, const CMatrix& u1) {
  if (u_hat.rows() != u.rows() || u_hat.cols() != u.cols() || u1.cols() != u.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "U_hat, U and U1 must share S columns");
  }
  Eigen::JacobiSVD<CMatrix> svd(u.adjoint() * u_hat, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const CMatrix r = svd.matrixU() * svd.matrixV().adjoint();
  PropCondition out;
  out.lhs = spectral_norm(u_hat - u * r);
  const RVector s1 = singular_values(u1);
  out.rhs = s1.size() > 0 && u1.rows() >= u1.cols() ? s1(s1.size() - 1) / 2.0 : 0.0;
  const CMatrix residual = u_hat - u * (u.adjoint() * u_hat);
  out.relaxed = std::numbers::sqrt2 * std::min(1.0, spectral_norm(residual));
  out.satisfied = out.lhs < out.rhs;
  return out;
}

Thm1Result thm1_bound(const TheoryContext& ctx) {
  const double T = need(ctx.T, "T");
  const double S = need(ctx.S, "S");
  const double M = need(ctx.M, "M");
  const double L = need(ctx.L, "L");
  const double sigma = need(ctx.sigma, "sigma");
  const double delta = need(ctx.delta, "delta");
  const double gmin = need(ctx.G_min, "G_min");
  const double rho = need(ctx.rho, "rho");
  const double lam = need(ctx.lambdaS_RX, "lambdaS_RX");
  const double kx = need(ctx.kappa_RX, "kappa_RX");
  const double pic = need(ctx.pic_violation, "pic_violation");
  require_positive(gmin, "G_min");
  require_positive(lam, "lambda_S(R_X)");

  const double shrink = 1.0 - 2.0 * rho * rho * S / M;
  if (!(shrink > 0.0)) {
    throw Error(ErrorCode::DegenerateM, "1 - 2 rho^2 S / M = " + std::to_string(shrink));
  }
  const double snr_scale = gmin * std::sqrt(lam);
  Thm1Result out;
  out.noise_term = T * rho * sigma / (snr_scale * std::sqrt(L) * shrink) *
                   std::max(rho * std::sqrt(kx), sigma / (snr_scale * std::sqrt(M)));
  out.pic_term = rho / std::sqrt(shrink) * pic * T / gmin;
  out.bound = out.noise_term + out.pic_term;

  out.M_ok = M >= std::max(S, 3.0 / delta + 2.0);
  const double nsr = ctx.C1 * sigma * sigma / (gmin * gmin * lam);
  const double l_req = nsr * std::max(sigma * sigma / (M * gmin * gmin * lam), rho * rho * kx / shrink);
  out.L_ok = L >= std::max(S, l_req);
  return out;
}

Thm2Result thm2_bound(const TheoryContext& ctx) {
  const double T = need(ctx.T, "T");
  const double S = need(ctx.S, "S");
  const double M = need(ctx.M, "M");
  const double L = need(ctx.L, "L");
  const double sigma = need(ctx.sigma, "sigma");
  const double delta = need(ctx.delta, "delta");
  const double lam = need(ctx.lambdaS_RX, "lambdaS_RX");
  const double kx = need(ctx.kappa_RX, "kappa_RX");
  const double Mt = need_tilde(ctx.M_tilde, "M_tilde");
  const double gmin = need_tilde(ctx.Gt_min, "Gt_min");
  const double rho = need_tilde(ctx.rho_tilde, "rho_tilde");
  const double pic = need_tilde(ctx.pic_sup_tilde, "pic_sup_tilde");
  require_positive(gmin, "Gt_min");
  require_positive(lam, "lambda_S(R_X)");

  const double snr_scale = gmin * std::sqrt(lam);
  Thm2Result out;
  out.noise_term = T * rho * rho * rho * sigma / (snr_scale * std::sqrt(L)) *
                   std::max(rho * std::sqrt(kx), sigma / (snr_scale * std::sqrt(M)));
  out.pic_term = rho * rho * pic * 2.0 * T / gmin;
  out.bound = out.noise_term + out.pic_term;

  out.Mt_ok = Mt > std::max(S, 3.0 * (1.0 / delta + 1.0));
  out.M_ok = M >= ctx.C1 * S * std::log(M);
  const double nsr = ctx.C2 * sigma * sigma * rho * rho / (gmin * gmin * lam);
  const double l_req = nsr * std::max(rho * rho * kx, sigma * sigma / (M * gmin * gmin * lam));
  out.L_ok = L >= std::max(S, l_req);
  return out;
}

double moitra_kappa_bound(double M, double delta_norm) {
  require_positive(delta_norm, "delta");
  const double inv = 1.0 / delta_norm;
  if (!(M > inv + 1.0)) {
    throw Error(ErrorCode::BelowThreshold, "M must exceed 1/delta + 1");
  }
  return std::sqrt((M + inv - 1.0) / (M - inv - 1.0));
}

double sigmaU1_lower(double rho, double S, double sigmaS_Phi) {
  require_positive(sigmaS_Phi, "sigma_S(Phi)");
  return std::sqrt(std::max(0.0, 1.0 - rho * rho * S / (sigmaS_Phi * sigmaS_Phi)));
}

double sup_abs_gain(const PulseShape& shape) {
  const auto width = shape.support_width();
  if (!width) throw Error(ErrorCode::UnboundedSupport, "pulse is not time-limited");
  if (*width == 0.0) return 1.0;
  const double R = *width;
  const double step = 1.0 / (100.0 * R);
  const int n = 5000;
  auto mag = [&](double w) { return std::abs(fourier_value(shape, w)); };
  double best = mag(0.0);
  double best_w = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double w = i * step;
    const double v = mag(w);
    if (v > best) {
      best = v;
      best_w = w;
    }
  }
  // Golden-section search on the bracket around the best grid point.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::max(0.0, best_w - step);
  double hi = best_w + step;
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = mag(x1);
  double f2 = mag(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = mag(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = mag(x2);
    }
  }
  return std::max({best, f1, f2});
}

double bernstein_pic_limit(const PulseShape& shape) {
  const auto width = shape.support_width();
  if (!width) throw Error(ErrorCode::UnboundedSupport, "pulse is not time-limited");
  if (*width == 0.0) return 0.0;
  return 2.0 * std::numbers::pi * *width * sup_abs_gain(shape);
}

DavisKahanResult davis_kahan_bound(const TheoryContext& ctx) {
  const double n = need(ctx.omega_size, "omega_size");
  const double L = need(ctx.L, "L");
  const double rho = need(ctx.rho, "rho");
  const double kphi = need(ctx.kappa_Phi, "kappa_Phi");
  const double kx = need(ctx.kappa_RX, "kappa_RX");
  const double nu = ctx.nu ? *ctx.nu : ctx.compute_nu();
  require_positive(L, "L");
  const double core = n * nu * std::max(rho * rho * kphi * kphi * kx, nu);
  DavisKahanResult out;
  out.bound = ctx.C2 * std::sqrt(core) / std::sqrt(L);
  out.condition_ok = L >= ctx.C1 * core;
  return out;
}

}  // namespace pulse_esprit
