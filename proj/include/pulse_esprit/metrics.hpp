#pragma once

#include <string_view>
#include <vector>

#include "pulse_esprit/linalg.hpp"
#include "pulse_esprit/signal_model.hpp"
#include "pulse_esprit/subarrays.hpp"

namespace pulse_esprit {

/// Plain |tau - tau'| or the wrap-around distance on [0, T).
enum class MdMetric { Plain, Torus };

std::string_view to_string(MdMetric metric);
MdMetric parse_md_metric(std::string_view name);

struct SpectralStats {
  double sigma1 = 0.0;
  double sigmaS = 0.0;
  double kappa = 0.0;
  double G_min = 0.0;
  double G_max = 0.0;
  double rho = 0.0;
};

/// min over permutations of max_k d(tau_k, tau_hat_pi(k)). Exhaustive for
/// S <= 9, bottleneck assignment otherwise.
double matching_distance(const std::vector<double>& truth, const std::vector<double>& estimate,
                         MdMetric metric = MdMetric::Plain, double period = 1.0);

/// The bottleneck-assignment path of matching_distance, for any S.
double bottleneck_matching_distance(const std::vector<double>& truth,
                                    const std::vector<double>& estimate, MdMetric metric,
                                    double period);

/// Smallest wrap-around gap. With normalized = true the gap is divided by T,
/// which is the convention used for Delta everywhere else (M > 3/Delta + 1
/// compares dimensionless numbers).
double min_separation(const std::vector<double>& locations, double period, bool normalized = true);

/// sigma_1, sigma_S and kappa of Phi; kappa = +inf when sigma_S = 0. The gain
/// fields are left at zero.
SpectralStats vandermonde_stats(const CMatrix& phi);

/// max_m |G(omega_{2,m}) - G(omega_{1,m})|.
double pic_violation(const PulseShape& shape, const SubArrayPair& pair);

/// G_min, G_max and rho of |G| over the frequency list; singular value fields
/// are left at zero.
SpectralStats dynamic_range(const PulseShape& shape, const std::vector<double>& frequencies);

}  // namespace pulse_esprit
