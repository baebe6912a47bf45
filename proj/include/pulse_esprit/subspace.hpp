#pragma once

#include "pulse_esprit/linalg.hpp"
#include "pulse_esprit/signal_model.hpp"

namespace pulse_esprit {

/// Orthonormal basis of an S-dimensional subspace and the spectrum it was
/// taken from (descending).
struct SubspaceEstimate {
  CMatrix basis;
  RVector eigenvalues;
};

/// R = (1/L) Y Y^H.
CMatrix empirical_covariance(const MeasurementSet& meas);

/// Eigenvectors of the S largest eigenvalues of a Hermitian matrix.
SubspaceEstimate signal_subspace(const CMatrix& cov, Index S);

/// Orthonormal basis of col(G Phi). Throws RankDeficient when
/// sigma_S(G Phi) < 1e-12 sigma_1(G Phi).
SubspaceEstimate oracle_subspace(const CVector& gains, const CMatrix& phi);

/// dist(U_hat, U) = || U_hat U_hat^H - U U^H ||, the sine of the largest
/// principal angle. Evaluated as || (I - U U^H) U_hat || which is the same
/// number for equal-dimension subspaces but avoids forming |Omega|^2 projectors.
double subspace_distance(const CMatrix& u_hat, const CMatrix& u);

}  // namespace pulse_esprit
