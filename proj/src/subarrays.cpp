#include "pulse_esprit/subarrays.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pulse_esprit/error.hpp"

namespace pulse_esprit {
namespace {

constexpr int kMaxEmptyRetries = 100;

// Frequencies are idx / denominator for integer grid indices so that identical
// grid points always map to bit-identical doubles.
SubArrayPair build_from_grid(SubArrayKind kind, double period, double denominator,
                             const std::vector<long>& idx1, long shift_steps) {
  SubArrayPair pair;
  pair.kind = kind;
  pair.period = period;
  pair.shift_delta = static_cast<double>(shift_steps) / denominator;

  std::vector<long> idx_union;
  idx_union.reserve(2 * idx1.size());
  for (long i : idx1) {
    idx_union.push_back(i);
    idx_union.push_back(i + shift_steps);
  }
  std::sort(idx_union.begin(), idx_union.end());
  idx_union.erase(std::unique(idx_union.begin(), idx_union.end()), idx_union.end());

  auto freq = [denominator](long i) { return static_cast<double>(i) / denominator; };
  auto position = [&idx_union](long i) {
    return static_cast<Index>(std::lower_bound(idx_union.begin(), idx_union.end(), i) -
                              idx_union.begin());
  };
  for (long i : idx_union) pair.omega_union.push_back(freq(i));
  for (long i : idx1) {
    pair.omega1.push_back(freq(i));
    pair.omega2.push_back(freq(i + shift_steps));
    pair.sel1.push_back(position(i));
    pair.sel2.push_back(position(i + shift_steps));
  }
  return pair;
}

}  // namespace

std::string_view to_string(SubArrayKind kind) {
  return kind == SubArrayKind::MaxOverlap ? "maxoverlap" : "doublet";
}

SubArrayKind parse_subarray_kind(std::string_view name) {
  if (name == "maxoverlap") return SubArrayKind::MaxOverlap;
  if (name == "doublet") return SubArrayKind::Doublet;
  throw Error(ErrorCode::ParseError, "unknown subarray design '" + std::string(name) + "'");
}

std::string_view to_string(DoubletShift shift) { return shift == DoubletShift::Half ? "half" : "full"; }

DoubletShift parse_doublet_shift(std::string_view name) {
  if (name == "half") return DoubletShift::Half;
  if (name == "full") return DoubletShift::Full;
  throw Error(ErrorCode::ParseError, "unknown doublet shift '" + std::string(name) + "'");
}

SubArrayPair max_overlap_design(Index M, double period) {
  if (M < 2) throw Error(ErrorCode::InvalidM, "max-overlap design needs M >= 2");
  if (!(period > 0.0)) throw Error(ErrorCode::InvalidArgument, "period must be positive");
  std::vector<long> idx1(static_cast<std::size_t>(M));
  for (Index l = 0; l < M; ++l) idx1[static_cast<std::size_t>(l)] = static_cast<long>(l);
  return build_from_grid(SubArrayKind::MaxOverlap, period, period, idx1, 1);
}

SubArrayPair doublet_design_from_pattern(const std::vector<bool>& beta, double period,
                                         DoubletShift shift) {
  if (!(period > 0.0)) throw Error(ErrorCode::InvalidArgument, "period must be positive");
  std::vector<long> idx1;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (beta[i]) idx1.push_back(2 * static_cast<long>(i));
  }
  if (idx1.empty()) throw Error(ErrorCode::EmptySelection, "no doublet selected");
  const long shift_steps = shift == DoubletShift::Half ? 1 : 2;
  SubArrayPair pair =
      build_from_grid(SubArrayKind::Doublet, period, 2.0 * period, idx1, shift_steps);
  pair.n_doublets = idx1.size();
  pair.pool.resize(2 * beta.size());
  for (std::size_t l = 0; l < pair.pool.size(); ++l) {
    pair.pool[l] = static_cast<double>(l) / (2.0 * period);
  }
  return pair;
}

SubArrayPair random_doublet_design(Index M_tilde, double M, double period, Rng& rng,
                                   DoubletShift shift) {
  if (M_tilde < 1) throw Error(ErrorCode::InvalidM, "doublet pool size must be >= 1");
  const double p = M / static_cast<double>(M_tilde);
  if (!(M >= 1.0) || !(p > 0.0) || p > 1.0) {
    throw Error(ErrorCode::InvalidProbability, "selection probability M/M_tilde must lie in (0,1]");
  }
  std::bernoulli_distribution coin(p);
  std::vector<bool> beta(static_cast<std::size_t>(M_tilde));
  for (int attempt = 0; attempt <= kMaxEmptyRetries; ++attempt) {
    bool any = false;
    for (std::size_t i = 0; i < beta.size(); ++i) {
      beta[i] = coin(rng);
      any = any || beta[i];
    }
    if (any) return doublet_design_from_pattern(beta, period, shift);
  }
  throw Error(ErrorCode::EmptySelection, "no doublet selected after 100 retries");
}

SubArrayPair pair_from_frequencies(const std::vector<double>& frequencies, SubArrayKind kind,
                                   double period, DoubletShift shift) {
  if (!(period > 0.0)) throw Error(ErrorCode::InvalidArgument, "period must be positive");
  for (std::size_t i = 1; i < frequencies.size(); ++i) {
    if (!(frequencies[i] > frequencies[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "frequencies must be strictly increasing");
    }
  }
  SubArrayPair pair;
  pair.kind = kind;
  pair.period = period;
  pair.shift_delta = (kind == SubArrayKind::Doublet && shift == DoubletShift::Half)
                         ? 1.0 / (2.0 * period)
                         : 1.0 / period;
  pair.omega_union = frequencies;

  const double scale = 1.0 / (2.0 * period);
  auto find = [&](double target) -> Index {
    const double tol = 1e-9 * std::max(1.0, std::abs(target)) * scale;
    auto it = std::lower_bound(frequencies.begin(), frequencies.end(), target - tol);
    if (it != frequencies.end() && std::abs(*it - target) <= tol) {
      return static_cast<Index>(it - frequencies.begin());
    }
    return -1;
  };

  std::vector<bool> used(frequencies.size(), false);
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    const double w = frequencies[i];
    if (kind == SubArrayKind::Doublet) {
      const double grid = w * 2.0 * period;
      const double nearest = std::nearbyint(grid);
      if (std::abs(grid - nearest) > 1e-9 * std::max(1.0, std::abs(grid))) {
        throw Error(ErrorCode::DimensionMismatch, "frequency off the 1/(2T) grid");
      }
      if (std::fmod(std::abs(nearest), 2.0) != 0.0) continue;
    }
    const Index j = find(w + pair.shift_delta);
    if (j < 0) continue;
    pair.omega1.push_back(w);
    pair.omega2.push_back(frequencies[static_cast<std::size_t>(j)]);
    pair.sel1.push_back(static_cast<Index>(i));
    pair.sel2.push_back(j);
    used[i] = true;
    used[static_cast<std::size_t>(j)] = true;
  }
  if (pair.omega1.empty()) {
    throw Error(ErrorCode::EmptySelection, "no shifted frequency pairs found");
  }
  if (std::find(used.begin(), used.end(), false) != used.end()) {
    throw Error(ErrorCode::DimensionMismatch,
                "frequency list is not the union of two shifted sub-arrays");
  }
  if (kind == SubArrayKind::Doublet) pair.n_doublets = pair.omega1.size();
  return pair;
}

std::pair<CMatrix, CMatrix> select_rows(const SubArrayPair& pair, const CMatrix& a) {
  if (a.rows() != static_cast<Index>(pair.omega_union.size())) {
    throw Error(ErrorCode::DimensionMismatch, "row count must equal |omega_union|");
  }
  const auto m = static_cast<Index>(pair.sel1.size());
  CMatrix a1(m, a.cols());
  CMatrix a2(m, a.cols());
  for (Index r = 0; r < m; ++r) {
    a1.row(r) = a.row(pair.sel1[static_cast<std::size_t>(r)]);
    a2.row(r) = a.row(pair.sel2[static_cast<std::size_t>(r)]);
  }
  return {std::move(a1), std::move(a2)};
}

double rotation_invariance_residual(const SubArrayPair& pair, const GroundTruth& truth) {
  // Every design frequency is k / (2T) for an integer k. Evaluating the phases
  // from k rather than from the rounded omega keeps the shifted rows exact.
  const double grid = 2.0 * pair.period;
  const auto S = truth.num_sources();
  std::vector<double> scaled;
  for (double tau : truth.locations) scaled.push_back(tau / grid);
  CMatrix phi(static_cast<Index>(pair.omega_union.size()), S);
  for (Index i = 0; i < phi.rows(); ++i) {
    const double k = std::nearbyint(pair.omega_union[static_cast<std::size_t>(i)] * grid);
    for (Index s = 0; s < S; ++s) phi(i, s) = unit_phasor(scaled[static_cast<std::size_t>(s)], k);
  }
  const auto [phi1, phi2] = select_rows(pair, phi);
  const double steps = std::nearbyint(pair.shift_delta * grid);
  CVector d(S);
  for (Index s = 0; s < S; ++s) d(s) = unit_phasor(scaled[static_cast<std::size_t>(s)], steps);
  return spectral_norm(phi2 - phi1 * d.asDiagonal());
}

}  // namespace pulse_esprit
