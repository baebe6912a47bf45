#include "pulse_esprit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pulse_esprit/error.hpp"

namespace pulse_esprit {
namespace {

double point_distance(double a, double b, MdMetric metric, double period) {
  const double d = std::abs(a - b);
  if (metric == MdMetric::Plain) return d;
  const double r = std::fmod(d, period);
  return std::min(r, period - r);
}

std::vector<std::vector<double>> cost_matrix(const std::vector<double>& truth,
                                             const std::vector<double>& estimate, MdMetric metric,
                                             double period) {
  const std::size_t n = truth.size();
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i][j] = point_distance(truth[i], estimate[j], metric, period);
  }
  return cost;
}

void check_inputs(const std::vector<double>& truth, const std::vector<double>& estimate,
                  MdMetric metric, double period) {
  if (truth.size() != estimate.size()) {
    throw Error(ErrorCode::CardinalityMismatch, "location sets have sizes " +
                                                    std::to_string(truth.size()) + " and " +
                                                    std::to_string(estimate.size()));
  }
  if (metric == MdMetric::Torus && !(period > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "period must be positive");
  }
}

// Kuhn's augmenting paths restricted to edges with cost <= limit.
bool has_perfect_matching(const std::vector<std::vector<double>>& cost, double limit) {
  const std::size_t n = cost.size();
  std::vector<int> match_of_col(n, -1);
  std::vector<char> seen(n);
  auto augment = [&](auto&& self, std::size_t row) -> bool {
    for (std::size_t c = 0; c < n; ++c) {
      if (cost[row][c] > limit || seen[c]) continue;
      seen[c] = 1;
      if (match_of_col[c] < 0 || self(self, static_cast<std::size_t>(match_of_col[c]))) {
        match_of_col[c] = static_cast<int>(row);
        return true;
      }
    }
    return false;
  };
  for (std::size_t r = 0; r < n; ++r) {
    std::fill(seen.begin(), seen.end(), 0);
    if (!augment(augment, r)) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(MdMetric metric) { return metric == MdMetric::Plain ? "plain" : "torus"; }

MdMetric parse_md_metric(std::string_view name) {
  if (name == "plain") return MdMetric::Plain;
  if (name == "torus") return MdMetric::Torus;
  throw Error(ErrorCode::ParseError, "unknown md metric '" + std::string(name) + "'");
}

double bottleneck_matching_distance(const std::vector<double>& truth,
                                    const std::vector<double>& estimate, MdMetric metric,
                                    double period) {
  check_inputs(truth, estimate, metric, period);
  if (truth.empty()) return 0.0;
  const auto cost = cost_matrix(truth, estimate, metric, period);
  std::vector<double> candidates;
  for (const auto& row : cost) candidates.insert(candidates.end(), row.begin(), row.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::size_t lo = 0;
  std::size_t hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (has_perfect_matching(cost, candidates[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return candidates[lo];
}

double matching_distance(const std::vector<double>& truth, const std::vector<double>& estimate,
                         MdMetric metric, double period) {
  check_inputs(truth, estimate, metric, period);
  const std::size_t n = truth.size();
  if (n > 9) return bottleneck_matching_distance(truth, estimate, metric, period);
  if (n == 0) return 0.0;
  const auto cost = cost_matrix(truth, estimate, metric, period);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < n && worst < best; ++i) worst = std::max(worst, cost[i][perm[i]]);
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double min_separation(const std::vector<double>& locations, double period, bool normalized) {
  if (locations.size() < 2) throw Error(ErrorCode::TooFewLocations, "need at least two locations");
  if (!(period > 0.0)) throw Error(ErrorCode::InvalidArgument, "period must be positive");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < locations.size(); ++i) {
    for (std::size_t j = i + 1; j < locations.size(); ++j) {
      best = std::min(best, point_distance(locations[i], locations[j], MdMetric::Torus, period));
    }
  }
  return normalized ? best / period : best;
}

SpectralStats vandermonde_stats(const CMatrix& phi) {
  SpectralStats out;
  if (phi.cols() == 0 || phi.rows() == 0) return out;
  const RVector s = singular_values(phi);
  const Index S = std::min(phi.rows(), phi.cols());
  out.sigma1 = s(0);
  // A wide Phi (more columns than rows) has sigma_S = 0 by definition.
  out.sigmaS = phi.cols() > phi.rows() ? 0.0 : s(S - 1);
  out.kappa = out.sigmaS > 0.0 ? out.sigma1 / out.sigmaS : std::numeric_limits<double>::infinity();
  return out;
}

double pic_violation(const PulseShape& shape, const SubArrayPair& pair) {
  double worst = 0.0;
  for (std::size_t m = 0; m < pair.omega1.size(); ++m) {
    const Complex d = fourier_value(shape, pair.omega2[m]) - fourier_value(shape, pair.omega1[m]);
    worst = std::max(worst, std::abs(d));
  }
  return worst;
}

SpectralStats dynamic_range(const PulseShape& shape, const std::vector<double>& frequencies) {
  if (frequencies.empty()) throw Error(ErrorCode::InvalidArgument, "empty frequency list");
  SpectralStats out;
  out.G_min = std::numeric_limits<double>::infinity();
  for (double w : frequencies) {
    const double g = std::abs(fourier_value(shape, w));
    out.G_min = std::min(out.G_min, g);
    out.G_max = std::max(out.G_max, g);
  }
  if (out.G_min == 0.0) throw Error(ErrorCode::ZeroGain, "G vanishes on the frequency set");
  out.rho = out.G_max / out.G_min;
  return out;
}

}  // namespace pulse_esprit
