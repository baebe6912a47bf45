#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "pulse_esprit/linalg.hpp"
#include "pulse_esprit/random.hpp"

namespace pulse_esprit {

// ---------------------------------------------------------------------------
// Pulse shapes
// ---------------------------------------------------------------------------

/// g(t) = delta(t); G(omega) = 1.
struct Dirac {};

/// Ideal low-pass pulse whose spectrum is the indicator of |omega| <= band_edge
/// (band_edge in cycles per unit time), 1/2 on the edge itself.
struct Sinc {
  double band_edge = 1.0;
};

/// g(t) = rect(20 a t / pi) cos^2(20 a t), supported on |t| <= pi / (40 a).
/// Larger a means a narrower pulse.
struct TruncatedCosineSquared {
  double a = 1.0;
};

/// Piecewise-linear pulse through (t, value) samples, zero outside the
/// sampled interval.
struct Tabulated {
  std::vector<double> t;
  std::vector<double> value;
};

struct PulseShape {
  std::variant<Dirac, Sinc, TruncatedCosineSquared, Tabulated> kind;

  /// Parses "dirac", "sinc:<band>", "cos2:<a>" or "table:<csv path>".
  static PulseShape parse(std::string_view spec);

  /// Canonical config spelling. Tabulated shapes round-trip only through the
  /// path they were loaded from, so they report "table".
  std::string to_string() const;

  bool is_dirac() const { return std::holds_alternative<Dirac>(kind); }

  /// Width parameter of a truncated cos^2 pulse, if this is one.
  std::optional<double> cos2_param() const;

  /// Support width R of a time-limited pulse, with g supported in
  /// [-R/2, R/2]. Dirac reports 0; Sinc is not time-limited.
  std::optional<double> support_width() const;
};

/// Loads a two-column CSV of (t, value) rows. A non-numeric first line is
/// treated as a header.
Tabulated load_tabulated(const std::string& path);

/// Continuous-time Fourier transform G(omega) = int g(t) e^{-j 2 pi omega t} dt.
Complex fourier_value(const PulseShape& shape, double omega);

// ---------------------------------------------------------------------------
// Ground truth and measurements
// ---------------------------------------------------------------------------

struct GroundTruth {
  double period = 1.0;
  std::vector<double> locations;  // in [0, period)
  CMatrix amplitudes;             // S x L
  PulseShape shape;

  Index num_sources() const { return static_cast<Index>(locations.size()); }
  Index num_snapshots() const { return amplitudes.cols(); }
};

/// Validates and normalises a ground truth: locations are reduced modulo the
/// period and must stay pairwise distinct on the torus; amplitude rows must
/// match the number of locations.
GroundTruth make_ground_truth(double period, std::vector<double> locations, CMatrix amplitudes,
                              PulseShape shape);

struct MeasurementSet {
  std::vector<double> frequencies;  // strictly increasing
  CMatrix data;                     // |Omega| x L
  double noise_sigma = 0.0;
};

/// Diagonal of G and the Vandermonde-like Phi for the given frequencies.
struct SystemMatrices {
  CVector gains;  // G(omega_i)
  CMatrix phi;    // e^{-j 2 pi tau_k omega_i}

  CMatrix gain_matrix() const { return gains.asDiagonal(); }
};

/// Phi with (Phi)_{i,k} = e^{-j 2 pi tau_k omega_i}.
CMatrix vandermonde(const std::vector<double>& locations, const std::vector<double>& frequencies);

/// Gains G(omega_i) sampled on the frequency list.
CVector sample_gains(const PulseShape& shape, const std::vector<double>& frequencies);

SystemMatrices build_system(const GroundTruth& truth, const std::vector<double>& frequencies);

/// Noise-free Y = G Phi X.
MeasurementSet synthesize(const GroundTruth& truth, const std::vector<double>& frequencies);

/// Adds circularly-symmetric complex Gaussian noise with per-entry variance
/// sigma^2. sigma == 0 returns the input unchanged.
MeasurementSet add_awgn(const MeasurementSet& meas, double sigma, Rng& rng);

/// sigma such that sigma^2 = 10^{-snr_db/10} * mean |Y_{i,l}|^2.
/// snr_db = +inf yields 0.
double sigma_from_snr(const MeasurementSet& meas, double snr_db);

}  // namespace pulse_esprit
