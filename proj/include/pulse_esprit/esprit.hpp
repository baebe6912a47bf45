#pragma once

#include <optional>
#include <vector>

#include "pulse_esprit/linalg.hpp"
#include "pulse_esprit/signal_model.hpp"
#include "pulse_esprit/subarrays.hpp"
#include "pulse_esprit/subspace.hpp"

namespace pulse_esprit {

struct EspritDiagnostics {
  double sigmaS_U1hat = 0.0;  // smallest singular value of the first sub-array block
  double psi_condition = 0.0;  // condition number of the eigenvector matrix of Psi_hat
};

struct EstimationResult {
  std::vector<double> locations;         // sorted, in [0, T)
  std::vector<Complex> raw_eigenvalues;  // eigenvalues of U1^+ U2, unordered
  std::optional<CVector> gains;          // over omega_union, max |g_i| = 1
  std::optional<CMatrix> amplitudes;     // S x L, paired with the normalised gains
  EspritDiagnostics diagnostics;
};

/// Relative singular value cutoff of the sub-array pseudo-inverse.
inline constexpr double kPinvCutoff = 1e-10;
/// sigma_S(U1_hat) at or below this raises IllConditionedSubarray.
inline constexpr double kMinSubarraySigma = 1e-10;

/// Locations from the eigenvalues of Psi = U1^+ U2:
/// tau_k = -arg(lambda_k) / (2 pi shift), reduced into [0, T).
EstimationResult esprit_locate(const SubspaceEstimate& u_hat, const SubArrayPair& pair, double period);

struct GainEstimate {
  CVector gains;
  CMatrix amplitudes;
  int iterations = 0;
  double relative_residual = 0.0;
};

struct GainOptions {
  double tolerance = 1e-8;
  int max_iterations = 100;
};

/// Alternating least squares for Y ~ diag(g) Phi(tau) X starting from g = 1.
/// The gain/amplitude scale ambiguity is fixed by max |g_i| = 1.
GainEstimate estimate_gains(const MeasurementSet& meas, const std::vector<double>& locations,
                            const GainOptions& options = {});

/// Covariance, signal subspace, ESPRIT and gain estimation in sequence.
EstimationResult solve(const MeasurementSet& meas, const SubArrayPair& pair, Index S, double period);

}  // namespace pulse_esprit
