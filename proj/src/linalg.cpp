#include "pulse_esprit/linalg.hpp"

#include <cmath>
#include <numbers>

namespace pulse_esprit {

Complex unit_phasor(double tau, double omega) {
  const double p = tau * omega;
  const double err = std::fma(tau, omega, -p);
  const double frac = (p - std::nearbyint(p)) + err;
  const double angle = -2.0 * std::numbers::pi * frac;
  return {std::cos(angle), std::sin(angle)};
}

RVector singular_values(const CMatrix& a) {
  if (a.size() == 0) return RVector{};
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues();
}

double spectral_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

CMatrix pseudo_inverse(const CMatrix& a, double rel_cutoff) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? rel_cutoff * s(0) : 0.0;
  RVector inv = RVector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

}  // namespace pulse_esprit
