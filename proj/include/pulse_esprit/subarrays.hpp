#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "pulse_esprit/linalg.hpp"
#include "pulse_esprit/random.hpp"
#include "pulse_esprit/signal_model.hpp"

namespace pulse_esprit {

enum class SubArrayKind { MaxOverlap, Doublet };

/// Shift between the two halves of a doublet: 1/(2T) (adjacent points of the
/// half-period grid) or 1/T.
enum class DoubletShift { Half, Full };

std::string_view to_string(SubArrayKind kind);
SubArrayKind parse_subarray_kind(std::string_view name);
std::string_view to_string(DoubletShift shift);
DoubletShift parse_doublet_shift(std::string_view name);

/// Two equally sized frequency sets related by a uniform shift, together with
/// the row selections that extract them from the sorted union.
struct SubArrayPair {
  SubArrayKind kind = SubArrayKind::MaxOverlap;
  double period = 1.0;
  double shift_delta = 1.0;
  std::vector<double> omega1;
  std::vector<double> omega2;
  std::vector<double> omega_union;
  std::vector<Index> sel1;
  std::vector<Index> sel2;
  /// Candidate grid the doublets were drawn from; empty for max-overlap.
  std::vector<double> pool;
  /// Number of selected doublets; equals |Omega_1| for doublet designs.
  std::size_t n_doublets = 0;

  Index size() const { return static_cast<Index>(omega1.size()); }
};

/// Omega_1 = {l/T : l = 0..M-1}, Omega_2 = {l/T : l = 1..M}.
SubArrayPair max_overlap_design(Index M, double period);

/// Pool of M_tilde doublets on the 1/(2T) grid; each doublet is kept with
/// probability M / M_tilde. Omega_1 holds the even grid points of the kept
/// doublets and Omega_2 = Omega_1 + shift. An empty draw is resampled up to
/// 100 times before EmptySelection is raised.
SubArrayPair random_doublet_design(Index M_tilde, double M, double period, Rng& rng,
                                   DoubletShift shift = DoubletShift::Half);

/// Same construction from an explicit selection pattern (one flag per doublet).
SubArrayPair doublet_design_from_pattern(const std::vector<bool>& beta, double period,
                                         DoubletShift shift = DoubletShift::Half);

/// Recovers a pair from a measured frequency list: Omega_1 contains every
/// frequency whose shifted copy is also present (restricted to even points of
/// the 1/(2T) grid for doublet designs). Every listed frequency must be used.
SubArrayPair pair_from_frequencies(const std::vector<double>& frequencies, SubArrayKind kind,
                                   double period, DoubletShift shift = DoubletShift::Half);

/// Rows sel1 and sel2 of a matrix indexed by omega_union.
std::pair<CMatrix, CMatrix> select_rows(const SubArrayPair& pair, const CMatrix& a);

/// || Pi_2 Phi - Pi_1 Phi D || with D_kk = e^{-j 2 pi tau_k shift}, with Phi
/// evaluated on the exact 1/(2T) grid behind the frequency list.
double rotation_invariance_residual(const SubArrayPair& pair, const GroundTruth& truth);

}  // namespace pulse_esprit
