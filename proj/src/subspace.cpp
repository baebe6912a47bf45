#include "pulse_esprit/subspace.hpp"

#include <algorithm>

#include "pulse_esprit/error.hpp"

namespace pulse_esprit {

CMatrix empirical_covariance(const MeasurementSet& meas) {
  const Index L = meas.data.cols();
  if (L < 1) throw Error(ErrorCode::InvalidArgument, "need at least one snapshot");
  CMatrix cov = meas.data * meas.data.adjoint() / static_cast<double>(L);
  // Symmetrise away the rounding asymmetry of the product.
  return (cov + cov.adjoint()) / 2.0;
}

SubspaceEstimate signal_subspace(const CMatrix& cov, Index S) {
  if (cov.rows() != cov.cols()) throw Error(ErrorCode::DimensionMismatch, "covariance must be square");
  if (S < 1 || S > cov.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "subspace dimension out of range");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenFailure, "Hermitian eigendecomposition did not converge");
  }
  const Index n = cov.rows();
  SubspaceEstimate out;
  out.basis.resize(n, S);
  out.eigenvalues.resize(S);
  // Eigen orders eigenvalues ascending.
  for (Index k = 0; k < S; ++k) {
    out.basis.col(k) = eig.eigenvectors().col(n - 1 - k);
    out.eigenvalues(k) = std::max(0.0, eig.eigenvalues()(n - 1 - k));
  }
  return out;
}

SubspaceEstimate oracle_subspace(const CVector& gains, const CMatrix& phi) {
  if (gains.size() != phi.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "gain vector and Phi disagree on |Omega|");
  }
  const CMatrix a = gains.asDiagonal() * phi;
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  const RVector& s = svd.singularValues();
  const Index S = phi.cols();
  if (S == 0 || s(S - 1) < 1e-12 * s(0)) {
    throw Error(ErrorCode::RankDeficient, "G Phi is numerically rank deficient");
  }
  return SubspaceEstimate{svd.matrixU().leftCols(S), s.head(S).cwiseAbs2()};
}

double subspace_distance(const CMatrix& u_hat, const CMatrix& u) {
  if (u_hat.rows() != u.rows() || u_hat.cols() != u.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "subspace bases must have equal dimensions");
  }
  const CMatrix residual = u_hat - u * (u.adjoint() * u_hat);
  return std::min(1.0, spectral_norm(residual));
}

}  // namespace pulse_esprit
