// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pulse_esprit/error.hpp"
#include "pulse_esprit/esprit.hpp"
#include "pulse_esprit/experiments.hpp"
#include "pulse_esprit/metrics.hpp"
#include "pulse_esprit/random.hpp"
#include "pulse_esprit/subarrays.hpp"
#include "pulse_esprit/subspace.hpp"
#include "pulse_esprit/theory.hpp"

using namespace pulse_esprit;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Index integer(Rng& rng, Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); }

std::vector<double> separated(Rng& rng, Index S, double delta, double T) {
  // S gaps of at least delta*T summing to T, rotated by a random offset.
  std::vector<double> w(static_cast<std::size_t>(S));
  double total = 0.0;
  for (auto& x : w) total += (x = -std::log(uniform(rng, 1e-12, 1.0)));
  const double slack = 1.0 - static_cast<double>(S) * delta;
  std::vector<double> out;
  double pos = uniform(rng, 0.0, T);
  for (std::size_t k = 0; k < w.size(); ++k) {
    out.push_back(std::fmod(pos, T));
    pos += T * (delta * (1.0 + 1e-9) + slack * (1.0 - 1e-8) * w[k] / total);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CMatrix amplitudes(Rng& rng, Index S, Index L) {
  CMatrix x(S, L);
  for (Index l = 0; l < L; ++l) {
    for (Index k = 0; k < S; ++k) x(k, l) = complex_gaussian(rng, 1.0);
  }
  return x;
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> medians(const SweepConfig& config) {
  std::vector<double> out;
  for (const auto& s : summarize(run_sweep(config))) out.push_back(s.median_md);
  return out;
}

// 1. Noise-free recovery with an exact PIC.
Outcome exact_recovery() {
  Rng rng(stable_hash({kSeed, 1}));
  double worst = 0.0;
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const Index S = integer(rng, 1, 8);
    const Index M = integer(rng, S + 1, 64);
    const Index L = integer(rng, S, 2 * S);
    const double T = uniform(rng, 0.5, 4.0);
    // Odd instances use a sinc whose passband covers every sample.
    const PulseShape shape = i % 2 ? PulseShape{Sinc{(static_cast<double>(M) + 1.5) / T}} : PulseShape{Dirac{}};
    const GroundTruth gt = make_ground_truth(T, separated(rng, S, 1.0 / static_cast<double>(M), T),
                                             amplitudes(rng, S, L), shape);
    const SubArrayPair pair = max_overlap_design(M, T);
    try {
      const EstimationResult r = solve(synthesize(gt, pair.omega_union), pair, S, T);
      worst = std::max(worst, matching_distance(gt.locations, r.locations, MdMetric::Torus, T) / T);
    } catch (const Error&) {
      ++failures;
    }
  }
  return {failures == 0 && worst <= 1e-8, fmt("max md/T = %.3g over 100 instances, %d errors", worst, failures)};
}

// 2. Rotation invariance of Phi for both designs.
Outcome rotation_invariance() {
  Rng rng(stable_hash({kSeed, 2}));
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Index S = integer(rng, 1, 10);
    const Index M = integer(rng, 2, 256);
    const double T = uniform(rng, 0.5, 20.0);
    const GroundTruth gt = make_ground_truth(T, separated(rng, S, 0.5 / static_cast<double>(S), T),
                                             CMatrix::Ones(S, 1), PulseShape{Dirac{}});
    worst = std::max(worst, rotation_invariance_residual(max_overlap_design(M, T), gt));
    const Index Mt = M + integer(rng, 0, 100);
    worst = std::max(worst, rotation_invariance_residual(
                                random_doublet_design(Mt, static_cast<double>(M), T, rng,
                                                      i % 2 ? DoubletShift::Half : DoubletShift::Full),
                                gt));
  }
  return {worst <= 1e-12, fmt("max residual = %.3g over 100 draws x 2 designs", worst)};
}

// 3. Condition number of Phi against the Moitra bound.
Outcome moitra_dominance() {
  Rng rng(stable_hash({kSeed, 3}));
  int violations = 0;
  int sqrt2_checked = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Index S = integer(rng, 2, 12);
    const double delta = uniform(rng, 0.005, 1.0 / static_cast<double>(S));
    const auto floor_M = static_cast<Index>(std::floor(1.0 / delta + 1.0)) + 1;
    // Half of the draws land past 3/delta + 2.
    const Index M = i % 2 ? floor_M + integer(rng, 0, static_cast<Index>(2.0 / delta))
                          : static_cast<Index>(std::ceil(3.0 / delta + 2.0)) + integer(rng, 0, 50);
    std::vector<double> freqs;
    for (Index m = 0; m < M; ++m) freqs.push_back(static_cast<double>(m));
    const double kappa = vandermonde_stats(vandermonde(separated(rng, S, delta, 1.0), freqs)).kappa;
    const double bound = moitra_kappa_bound(static_cast<double>(M), delta);
    worst_ratio = std::max(worst_ratio, kappa / bound);
    if (kappa > bound) ++violations;
    if (static_cast<double>(M) >= 3.0 / delta + 2.0) {
      ++sqrt2_checked;
      if (kappa > std::numbers::sqrt2) ++violations;
    }
  }
  return {violations == 0, fmt("%d violations; max kappa/bound = %.4f; sqrt(2) cap checked on %d", violations,
                              worst_ratio, sqrt2_checked)};
}

// 4. Lower bound on the sub-array singular values.
Outcome subarray_singular_values() {
  Rng rng(stable_hash({kSeed, 4}));
  int violations = 0;
  int nontrivial = 0;
  double min_margin = 1e300;
  for (int i = 0; i < 200; ++i) {
    const Index S = integer(rng, 1, 6);
    const Index M = integer(rng, 40, 160);
    const double a = uniform(rng, 0.75, 1.0);
    // Keep the band below the first spectral zero of the pulse at 40a/pi.
    const double T = static_cast<double>(M) / (uniform(rng, 0.1, 0.6) * 40.0 * a / std::numbers::pi);
    const PulseShape shape{TruncatedCosineSquared{a}};
    const SubArrayPair pair = max_overlap_design(M, T);
    const auto tau = separated(rng, S, 2.0 / static_cast<double>(M), T);
    const CMatrix phi = vandermonde(tau, pair.omega_union);
    const CVector g = sample_gains(shape, pair.omega_union);
    const auto [u1, u2] = select_rows(pair, oracle_subspace(g, phi).basis);
    const double s = std::min(singular_values(u1)(S - 1), singular_values(u2)(S - 1));
    const double rho = dynamic_range(shape, pair.omega_union).rho;
    const double lhs = s * s;
    const double lower = sigmaU1_lower(rho, static_cast<double>(S), vandermonde_stats(phi).sigmaS);
    const double rhs = lower * lower;
    if (rhs > 0.0) ++nontrivial;
    min_margin = std::min(min_margin, lhs - rhs);
    if (lhs < rhs) ++violations;
  }
  return {violations == 0, fmt("%d violations; %d of 200 nontrivial; min margin %.3g", violations, nontrivial,
                              min_margin)};
}

// 5. Perturbation bound with exact U and controlled perturbations.
Outcome prop1_oracle() {
  Rng rng(stable_hash({kSeed, 5}));
  int satisfied = 0;
  int violations = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < 500; ++i) {
    const bool dirac = i % 2 == 0;
    const Index S = integer(rng, 2, 6);
    const Index M = integer(rng, 20, 80);
    const double a = uniform(rng, 0.75, 1.0);
    const double T = dirac ? 1.0 : static_cast<double>(M) / (0.7 * 40.0 * a / std::numbers::pi);
    const PulseShape shape = dirac ? PulseShape{Dirac{}} : PulseShape{TruncatedCosineSquared{a}};
    const SubArrayPair pair = max_overlap_design(M, T);
    const GroundTruth gt = make_ground_truth(T, separated(rng, S, 2.0 / static_cast<double>(M), T),
                                             CMatrix::Ones(S, 1), shape);
    const SystemMatrices sys = build_system(gt, pair.omega_union);
    const CMatrix u = oracle_subspace(sys.gains, sys.phi).basis;
    const double eps = std::pow(10.0, uniform(rng, -7.0, -0.5));
    CMatrix e(u.rows(), S);
    for (Index j = 0; j < S; ++j) {
      for (Index r = 0; r < u.rows(); ++r) e(r, j) = complex_gaussian(rng, 1.0);
    }
    Eigen::HouseholderQR<CMatrix> qr(u + eps * e / e.norm());
    SubspaceEstimate u_hat;
    u_hat.basis = qr.householderQ() * CMatrix::Identity(u.rows(), S);

    const CMatrix u1 = select_rows(pair, u).first;
    const PropCondition cond = check_prop_condition(u_hat.basis, u, u1);
    if (!cond.satisfied) continue;
    ++satisfied;

    const EstimationResult est = esprit_locate(u_hat, pair, T);
    const double md = matching_distance(gt.locations, est.locations, MdMetric::Torus, T);
    const SpectralStats g = dynamic_range(shape, pair.omega_union);
    TheoryContext ctx;
    ctx.kappa_Phi = vandermonde_stats(sys.phi).kappa;
    ctx.G_max = g.G_max;
    ctx.G_min = g.G_min;
    ctx.Gamma = TheoryContext::default_gamma(T);
    ctx.dist_U = subspace_distance(u_hat.basis, u);
    ctx.sigmaS_U1 = singular_values(u1)(S - 1);
    ctx.pic_violation = pic_violation(shape, pair);
    const double bound = prop1_bound(ctx);
    worst_ratio = std::max(worst_ratio, md / bound);
    if (md > bound) ++violations;
  }
  return {violations == 0 && satisfied > 0,
          fmt("%d violations; condition held in %d of 500; max md/bound = %.3g", violations, satisfied,
              worst_ratio)};
}

// 6. Error decay in L.
Outcome sqrt_l_decay() {
  SweepConfig c;
  c.preset = "acceptance-6";
  c.fixed.pulse = PulseShape{Dirac{}};
  c.fixed.M = 64;
  c.fixed.S = 4;
  c.fixed.delta = 0.02;
  c.fixed.snr_db = 15.0;
  c.axes = {{"L", {"32", "64", "128", "256", "512", "1024"}}};
  c.trials_per_point = 200;
  c.master_seed = stable_hash({kSeed, 6});
  const auto med = medians(c);
  const std::vector<double> L = {32, 64, 128, 256, 512, 1024};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(L.size());
  for (std::size_t i = 0; i < L.size(); ++i) {
    const double x = std::log(L[i]);
    const double y = std::log(med[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope >= -0.65 && slope <= -0.35, fmt("log-log slope = %.3f (medians %.3g .. %.3g)", slope,
                                                med.front(), med.back())};
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  double d2 = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double n = static_cast<double>(x.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

// 7. Narrower pulses give smaller errors.
Outcome pulse_width_monotonicity() {
  SweepConfig c = preset("fig4");
  c.preset = "acceptance-7";
  c.axes = {{"a", {"0.75", "0.78", "0.81", "0.84", "0.87", "0.9"}}};
  c.trials_per_point = 200;
  c.master_seed = stable_hash({kSeed, 7});
  const auto med = medians(c);
  bool strict = true;
  for (std::size_t i = 1; i < med.size(); ++i) strict = strict && med[i] < med[i - 1];
  const double rho = spearman({0.75, 0.78, 0.81, 0.84, 0.87, 0.9}, med);
  std::string list;
  for (double m : med) list += fmt("%.4g ", m);
  return {strict || rho < -0.9, fmt("medians %sspearman %.3f", list.c_str(), rho)};
}

// 8. Saturation in the doublet pool size.
Outcome doublet_saturation() {
  SweepConfig c = preset("fig5");
  c.preset = "acceptance-8";
  c.fixed.pulse = PulseShape{Dirac{}};
  c.axes = {{"M_tilde", {"40", "80", "120", "200", "260"}}};
  c.trials_per_point = 300;
  c.master_seed = stable_hash({kSeed, 8});
  const auto med = medians(c);
  const double m120 = med[2];
  const bool flat = med[3] <= 2.0 * m120 && med[3] >= m120 / 2.0 && med[4] <= 2.0 * m120 && med[4] >= m120 / 2.0;
  const bool drop = med[0] >= 5.0 * m120;
  return {flat && drop, fmt("medians %.3g %.3g %.3g %.3g %.3g; 200/120 = %.2f, 260/120 = %.2f, 40/120 = %.1f",
                            med[0], med[1], med[2], med[3], med[4], med[3] / m120, med[4] / m120, med[0] / m120)};
}

// 9. Difference quotients of G against the Bernstein limit.
Outcome bernstein() {
  int violations = 0;
  double worst_ratio = 0.0;
  for (double a : {0.75, 0.9}) {
    const PulseShape shape{TruncatedCosineSquared{a}};
    const double R = std::numbers::pi / (20.0 * a);
    const double limit = 2.0 * std::numbers::pi * R * sup_abs_gain(shape);
    for (int i = 0; i <= 20000; ++i) {
      const double w = -100.0 + 0.01 * i;
      for (double d : {1e-4, 1e-2, 0.1, 0.5, 1.0}) {
        const double q = std::abs(fourier_value(shape, w + d) - fourier_value(shape, w)) / d;
        worst_ratio = std::max(worst_ratio, q / limit);
        if (q > limit) ++violations;
      }
    }
  }
  return {violations == 0, fmt("%d violations; max quotient/limit = %.3f", violations, worst_ratio)};
}

// 10. Same seed, different worker counts, same bytes.
Outcome determinism() {
  SweepConfig c = preset("bounds", 0.02);
  c.master_seed = stable_hash({kSeed, 10});
  auto sorted_csv = [&](unsigned workers) {
    c.workers = workers;
    std::ostringstream os;
    run_sweep(c, &os);
    std::istringstream is(os.str());
    std::vector<std::string> lines;
    for (std::string line; std::getline(is, line);) lines.push_back(line);
    std::sort(lines.begin() + 1, lines.end());
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
  };
  const std::string one = sorted_csv(1);
  const bool same = one == sorted_csv(4) && one == sorted_csv(2) && one == sorted_csv(1);
  return {same, fmt("%zu bytes, workers 1/2/4 %s", one.size(), same ? "identical" : "differ")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "exact recovery", 30, exact_recovery},
      {2, "rotation invariance", 10, rotation_invariance},
      {3, "Moitra bound dominance", 60, moitra_dominance},
      {4, "sub-array singular value bound", 60, subarray_singular_values},
      {5, "perturbation bound dominance", 120, prop1_oracle},
      {6, "sigma/sqrt(L) decay", 180, sqrt_l_decay},
      {7, "pulse-width monotonicity", 300, pulse_width_monotonicity},
      {8, "doublet pool saturation", 300, doublet_saturation},
      {9, "Bernstein PIC limit", 30, bernstein},
      {10, "determinism", 60, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.limit_s;
    failed += pass ? 0 : 1;
    std::printf("criterion %2d %-32s %s  %s [%.1f s, limit %.0f s]\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.limit_s);
    std::fflush(stdout);
  }
  return failed;
}
