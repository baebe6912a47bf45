#pragma once

#include <optional>

#include "pulse_esprit/linalg.hpp"
#include "pulse_esprit/signal_model.hpp"

namespace pulse_esprit {

/// Quantities entering the bounds. Every field is optional; an evaluator that
/// needs an unset field raises MissingField (MissingTilde for the doublet
/// quantities). Counts are stored as doubles since they only enter formulas.
struct TheoryContext {
  std::optional<double> T;
  std::optional<double> S;
  std::optional<double> M;
  std::optional<double> M_tilde;
  std::optional<double> L;
  std::optional<double> sigma;
  std::optional<double> Gamma;
  std::optional<double> delta;       // minimum separation normalised by T
  std::optional<double> omega_size;  // |Omega|

  std::optional<double> G_min, G_max, rho;
  std::optional<double> Gt_min, Gt_max, rho_tilde;

  std::optional<double> sigmaS_Phi, kappa_Phi;
  std::optional<double> sigmaS_U1;
  std::optional<double> lambdaS_RX, kappa_RX;
  std::optional<double> nu;
  std::optional<double> pic_violation;  // max_m |G(omega_2m) - G(omega_1m)|
  std::optional<double> pic_sup_tilde;  // sup over the doublet pool of |G(w + 1/2T) - G(w)|
  std::optional<double> dist_U;

  double C1 = 1.0;
  double C2 = 1.0;

  /// Default chord-to-arc constant 2/T.
  static double default_gamma(double period) { return 2.0 / period; }

  /// sigma^2 / (G_min^2 sigma_S^2(Phi) lambda_S(R_X)) from the populated fields.
  double compute_nu() const;
};

double prop1_bound(const TheoryContext& ctx);

struct PropCondition {
  bool satisfied = false;
  double lhs = 0.0;      // min over unitary R of || U_hat - U R ||
  double rhs = 0.0;      // sigma_S(U1) / 2
  double relaxed = 0.0;  // sqrt(2) dist(U_hat, U), an upper bound on lhs
};

/// lhs via orthogonal Procrustes: with U^H U_hat = W S V^H the minimiser is
/// R = W V^H. u1 is the first sub-array block of U.
PropCondition check_prop_condition(const CMatrix& u_hat, const CMatrix& u, const CMatrix& u1);

struct Thm1Result {
  double bound = 0.0;
  double noise_term = 0.0;
  double pic_term = 0.0;
  bool M_ok = false;
  bool L_ok = false;
};

/// Max-overlap bound. ctx.pic_violation is the sup over Omega_1 of
/// |G(w + 1/T) - G(w)|. Raises DegenerateM when 1 - 2 rho^2 S / M <= 0.
Thm1Result thm1_bound(const TheoryContext& ctx);

struct Thm2Result {
  double bound = 0.0;
  double noise_term = 0.0;
  double pic_term = 0.0;
  bool Mt_ok = false;
  bool M_ok = false;
  bool L_ok = false;
};

/// Random-doublet bound with the tilde quantities over the doublet pool.
Thm2Result thm2_bound(const TheoryContext& ctx);

/// sqrt((M + 1/delta - 1) / (M - 1/delta - 1)); BelowThreshold when
/// M <= 1/delta + 1.
double moitra_kappa_bound(double M, double delta_norm);

/// sqrt(max(0, 1 - rho^2 S / sigma_S^2(Phi))).
double sigmaU1_lower(double rho, double S, double sigmaS_Phi);

/// 2 pi R sup |G| for a time-limited pulse of support width R. Dirac gives 0;
/// Sinc raises UnboundedSupport.
double bernstein_pic_limit(const PulseShape& shape);

/// sup_w |G(w)| by a grid of step 1/(100 R) over [0, 50/R] with golden-section
/// refinement around the best grid point.
double sup_abs_gain(const PulseShape& shape);

struct DavisKahanResult {
  double bound = 0.0;
  bool condition_ok = false;
};

/// C2 sqrt(|Omega| nu max(rho^2 kappa^2(Phi) kappa(R_X), nu)) / sqrt(L). The
/// flag reports L >= C1 |Omega| nu max(rho^2 kappa^2(Phi) kappa(R_X), nu).
DavisKahanResult davis_kahan_bound(const TheoryContext& ctx);

}  // namespace pulse_esprit
