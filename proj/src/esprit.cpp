#include "pulse_esprit/esprit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pulse_esprit/error.hpp"

namespace pulse_esprit {
namespace {

double wrap_into_period(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  if (r >= period) r = 0.0;
  return r;
}

}  // namespace

EstimationResult esprit_locate(const SubspaceEstimate& u_hat, const SubArrayPair& pair, double period) {
  const Index S = u_hat.basis.cols();
  if (S < 1) throw Error(ErrorCode::InvalidArgument, "empty subspace basis");
  if (pair.size() < S) {
    throw Error(ErrorCode::InvalidArgument, "sub-array size |Omega_1| must be at least S");
  }
  const auto [u1, u2] = select_rows(pair, u_hat.basis);

  const RVector s1 = singular_values(u1);
  const double sigma_s = s1(S - 1);
  if (!(sigma_s > kMinSubarraySigma)) {
    throw Error(ErrorCode::IllConditionedSubarray,
                "sigma_S(U1_hat) = " + std::to_string(sigma_s) + " is too small");
  }

  const CMatrix psi = pseudo_inverse(u1, kPinvCutoff) * u2;
  Eigen::ComplexEigenSolver<CMatrix> ces(psi, /*computeEigenvectors=*/true);
  if (ces.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenFailure, "eigendecomposition of U1^+ U2 did not converge");
  }

  EstimationResult out;
  out.diagnostics.sigmaS_U1hat = sigma_s;
  const RVector sv = singular_values(ces.eigenvectors());
  out.diagnostics.psi_condition =
      sv(S - 1) > 0.0 ? sv(0) / sv(S - 1) : std::numeric_limits<double>::infinity();

  const double two_pi_shift = 2.0 * std::numbers::pi * pair.shift_delta;
  for (Index k = 0; k < S; ++k) {
    const Complex lambda = ces.eigenvalues()(k);
    if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) {
      throw Error(ErrorCode::EigenFailure, "non-finite eigenvalue");
    }
    out.raw_eigenvalues.push_back(lambda);
    out.locations.push_back(wrap_into_period(-std::arg(lambda) / two_pi_shift, period));
  }
  std::sort(out.locations.begin(), out.locations.end());
  return out;
}

GainEstimate estimate_gains(const MeasurementSet& meas, const std::vector<double>& locations,
                            const GainOptions& options) {
  const Index n = meas.data.rows();
  const Index L = meas.data.cols();
  const auto S = static_cast<Index>(locations.size());
  if (n != static_cast<Index>(meas.frequencies.size())) {
    throw Error(ErrorCode::DimensionMismatch, "data rows must match the frequency list");
  }
  if (S < 1 || n < S) throw Error(ErrorCode::InvalidArgument, "need 1 <= S <= |Omega|");

  const CMatrix phi = vandermonde(locations, meas.frequencies);
  const RVector sphi = singular_values(phi);
  if (sphi(S - 1) < 1e-12 * sphi(0)) {
    throw Error(ErrorCode::RankDeficient, "Phi at the estimated locations is rank deficient");
  }

  const double ynorm = meas.data.norm();
  GainEstimate est;
  est.gains = CVector::Ones(n);
  if (ynorm == 0.0) {
    est.amplitudes = CMatrix::Zero(S, L);
    return est;
  }

  auto solve_amplitudes = [&](const CVector& g) -> CMatrix {
    const CMatrix a = g.asDiagonal() * phi;
    return a.colPivHouseholderQr().solve(meas.data);
  };

  double previous = std::numeric_limits<double>::infinity();
  CMatrix x = solve_amplitudes(est.gains);
  for (int it = 1; it <= options.max_iterations; ++it) {
    const CMatrix phix = phi * x;
    for (Index i = 0; i < n; ++i) {
      const double denom = phix.row(i).squaredNorm();
      // Eigen's dot conjugates its left operand.
      est.gains(i) = denom > 0.0 ? phix.row(i).dot(meas.data.row(i)) / denom : Complex{0.0, 0.0};
    }
    if (est.gains.cwiseAbs().maxCoeff() == 0.0) {
      throw Error(ErrorCode::RankDeficient, "gain estimate collapsed to zero");
    }
    x = solve_amplitudes(est.gains);
    const double residual = (meas.data - est.gains.asDiagonal() * (phi * x)).norm() / ynorm;
    est.iterations = it;
    est.relative_residual = residual;
    if (residual <= 1e-14) break;
    if (std::isfinite(previous) && std::abs(previous - residual) <= options.tolerance * previous) break;
    previous = residual;
  }

  Index imax = 0;
  est.gains.cwiseAbs().maxCoeff(&imax);
  const Complex scale = est.gains(imax);
  est.gains /= scale;
  est.amplitudes = x * scale;
  return est;
}

EstimationResult solve(const MeasurementSet& meas, const SubArrayPair& pair, Index S, double period) {
  if (S < 1) throw Error(ErrorCode::InvalidArgument, "S must be positive");
  if (meas.data.cols() < S) throw Error(ErrorCode::InvalidArgument, "need L >= S snapshots");
  if (pair.size() < S) throw Error(ErrorCode::InvalidArgument, "need |Omega_1| >= S");
  if (meas.frequencies.size() != pair.omega_union.size() ||
      meas.data.rows() != static_cast<Index>(pair.omega_union.size())) {
    throw Error(ErrorCode::DimensionMismatch, "measurement rows do not match the sub-array union");
  }
  for (std::size_t i = 0; i < meas.frequencies.size(); ++i) {
    const double w = pair.omega_union[i];
    if (std::abs(meas.frequencies[i] - w) > 1e-9 * std::max(1.0, std::abs(w))) {
      throw Error(ErrorCode::DimensionMismatch, "measurement frequencies differ from the design");
    }
  }

  const CMatrix cov = empirical_covariance(meas);
  const SubspaceEstimate u_hat = signal_subspace(cov, S);
  if (!(u_hat.eigenvalues(S - 1) > 1e-10 * u_hat.eigenvalues(0))) {
    throw Error(ErrorCode::RankDeficient, "covariance has fewer than S significant eigenvalues");
  }
  EstimationResult out = esprit_locate(u_hat, pair, period);
  GainEstimate gains = estimate_gains(meas, out.locations);
  out.gains = std::move(gains.gains);
  out.amplitudes = std::move(gains.amplitudes);
  return out;
}

}  // namespace pulse_esprit
