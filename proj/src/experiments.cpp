#include "pulse_esprit/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pulse_esprit/esprit.hpp"
#include "pulse_esprit/random.hpp"
#include "pulse_esprit/subspace.hpp"
#include "pulse_esprit/theory.hpp"

namespace pulse_esprit {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kLocationTag = 0x6c6f636174696f6eULL;
constexpr std::string_view kCodeVersion = "0.1.0";

Index parse_index(std::string_view name, std::string_view text) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ConfigError,
                "parameter " + std::string(name) + " expects an integer, got '" + std::string(text) + "'");
  }
  return static_cast<Index>(v);
}

double parse_real(std::string_view name, std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorCode::ConfigError,
                "parameter " + std::string(name) + " expects a number, got '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

CMatrix draw_amplitudes(Index S, Index L, bool real, Rng& rng) {
  CMatrix x(S, L);
  std::normal_distribution<double> n(0.0, 1.0);
  for (Index l = 0; l < L; ++l) {
    for (Index k = 0; k < S; ++k) x(k, l) = real ? Complex{n(rng), 0.0} : complex_gaussian(rng, 1.0);
  }
  return x;
}

// Sup over the doublet pool of |G(w + 1/(2T)) - G(w)|.
double pool_pic(const PulseShape& shape, const SubArrayPair& pair) {
  double worst = 0.0;
  const double step = 1.0 / (2.0 * pair.period);
  for (double w : pair.pool) {
    worst = std::max(worst, std::abs(fourier_value(shape, w + step) - fourier_value(shape, w)));
  }
  return worst;
}

void fill_point_fields(TrialRecord& r, const GridPoint& point, std::string_view preset) {
  const PointParams& p = point.params;
  r.preset = preset;
  r.point_id = point.point_id;
  if (!point.coords.empty()) {
    r.axis1_name = point.coords[0].first;
    r.axis1_value = point.coords[0].second;
  }
  if (point.coords.size() > 1) {
    r.axis2_name = point.coords[1].first;
    r.axis2_value = point.coords[1].second;
  }
  r.S = p.S;
  r.M = p.M;
  r.M_tilde = p.subarray == SubArrayKind::Doublet ? p.M_tilde : 0;
  r.L = p.L;
  r.snr_db = p.snr_db;
  r.delta = p.delta;
  r.pulse = p.pulse.to_string();
  r.a_param = p.pulse.cos2_param().value_or(kNaN);
  r.subarray = std::string(to_string(p.subarray));
}

void mark_failed(TrialRecord& r, ErrorCode code) {
  r.error_code = code;
  r.md = r.dist_U = r.sigmaS_U1hat = r.kappa_Phi = r.pic_violation = kNaN;
  r.bound_prop1 = r.bound_thm = kNaN;
  r.prop_cond_satisfied = false;
}

void measure_trial(TrialRecord& r, const GridPoint& point, const std::vector<double>& locations,
                   std::uint64_t seed) {
  const PointParams& p = point.params;
  if (p.L < p.S) throw Error(ErrorCode::InvalidArgument, "infeasible point: L < S");
  Rng rng(seed);

  const SubArrayPair pair = p.subarray == SubArrayKind::Doublet
                                ? random_doublet_design(p.M_tilde, static_cast<double>(p.M), p.period,
                                                        rng, p.shift)
                                : max_overlap_design(p.M, p.period);
  r.n_doublets = p.subarray == SubArrayKind::Doublet ? static_cast<Index>(pair.n_doublets) : 0;
  r.n_frequencies = static_cast<Index>(pair.omega_union.size());
  if (pair.size() < p.S) {
    throw Error(ErrorCode::IllConditionedSubarray, "|Omega_1| < S for this draw");
  }

  const CMatrix x = draw_amplitudes(p.S, p.L, p.real_amplitudes, rng);
  const GroundTruth truth = make_ground_truth(p.period, locations, x, p.pulse);
  const MeasurementSet clean = synthesize(truth, pair.omega_union);
  const double sigma = sigma_from_snr(clean, p.snr_db);
  const MeasurementSet noisy = add_awgn(clean, sigma, rng);

  const SubspaceEstimate u_hat = signal_subspace(empirical_covariance(noisy), p.S);
  if (!(u_hat.eigenvalues(p.S - 1) > 1e-10 * u_hat.eigenvalues(0))) {
    throw Error(ErrorCode::RankDeficient, "covariance has fewer than S significant eigenvalues");
  }
  const EstimationResult est = esprit_locate(u_hat, pair, p.period);
  r.sigmaS_U1hat = est.diagnostics.sigmaS_U1hat;
  r.md = matching_distance(truth.locations, est.locations, p.md_metric, p.period);

  const SystemMatrices sys = build_system(truth, pair.omega_union);
  r.kappa_Phi = vandermonde_stats(sys.phi).kappa;
  r.pic_violation = pic_violation(p.pulse, pair);

  // Oracle quantities; failures here leave the estimate valid.
  r.dist_U = r.bound_prop1 = r.bound_thm = kNaN;
  CMatrix u;
  try {
    u = oracle_subspace(sys.gains, sys.phi).basis;
  } catch (const Error&) {
    return;
  }
  r.dist_U = subspace_distance(u_hat.basis, u);
  const CMatrix u1 = select_rows(pair, u).first;
  const PropCondition cond = check_prop_condition(u_hat.basis, u, u1);
  r.prop_cond_satisfied = cond.satisfied;

  const CMatrix rx = x * x.adjoint() / static_cast<double>(p.L);
  Eigen::SelfAdjointEigenSolver<CMatrix> rx_eig(rx, Eigen::EigenvaluesOnly);
  const double lam_min = rx_eig.eigenvalues()(0);
  const double lam_max = rx_eig.eigenvalues()(p.S - 1);

  TheoryContext ctx;
  ctx.T = p.period;
  ctx.S = static_cast<double>(p.S);
  ctx.M = static_cast<double>(p.M);
  ctx.L = static_cast<double>(p.L);
  ctx.sigma = sigma;
  // Chord-to-arc constant for the phase map tau -> 2 pi tau * shift.
  ctx.Gamma = 2.0 * pair.shift_delta;
  ctx.delta = p.S >= 2 ? min_separation(truth.locations, p.period) : 1.0;
  ctx.omega_size = static_cast<double>(pair.omega_union.size());
  ctx.kappa_Phi = r.kappa_Phi;
  ctx.sigmaS_U1 = singular_values(u1)(p.S - 1);
  ctx.lambdaS_RX = lam_min;
  ctx.kappa_RX = lam_min > 0.0 ? lam_max / lam_min : std::numeric_limits<double>::infinity();
  ctx.pic_violation = r.pic_violation;
  ctx.dist_U = r.dist_U;
  try {
    const SpectralStats g = dynamic_range(p.pulse, pair.omega_union);
    ctx.G_min = g.G_min;
    ctx.G_max = g.G_max;
    ctx.rho = g.rho;
    r.bound_prop1 = prop1_bound(ctx);
  } catch (const Error&) {
  }
  try {
    if (p.subarray == SubArrayKind::MaxOverlap) {
      r.bound_thm = thm1_bound(ctx).bound;
    } else {
      const SpectralStats gt = dynamic_range(p.pulse, pair.pool);
      ctx.M_tilde = static_cast<double>(p.M_tilde);
      ctx.Gt_min = gt.G_min;
      ctx.Gt_max = gt.G_max;
      ctx.rho_tilde = gt.rho;
      ctx.pic_sup_tilde = pool_pic(p.pulse, pair);
      r.bound_thm = thm2_bound(ctx).bound;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateM) r.bound_thm = std::numeric_limits<double>::infinity();
  }
}

std::string csv_index(Index v, bool present) { return present ? std::to_string(v) : std::string(); }

std::string csv_real(double v) { return std::isnan(v) ? std::string() : format_double(v); }

double field_real(const std::string& s) {
  if (s.empty()) return kNaN;
  return parse_real("csv field", s);
}

std::vector<std::string> thin(const std::vector<std::string>& values, int stride) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < values.size(); i += static_cast<std::size_t>(stride)) out.push_back(values[i]);
  return out;
}

std::vector<std::string> int_range(int first, int last, int step) {
  std::vector<std::string> out;
  for (int v = first; v <= last; v += step) out.push_back(std::to_string(v));
  return out;
}

}  // namespace

std::string_view to_string(LocationMode mode) {
  return mode == LocationMode::Equispaced ? "equispaced" : "jittered";
}

LocationMode parse_location_mode(std::string_view name) {
  if (name == "equispaced") return LocationMode::Equispaced;
  if (name == "jittered") return LocationMode::Jittered;
  throw Error(ErrorCode::ConfigError, "unknown location mode '" + std::string(name) + "'");
}

void set_parameter(PointParams& params, std::string_view name, std::string_view value) {
  try {
    if (name == "period") {
      params.period = parse_real(name, value);
    } else if (name == "S") {
      params.S = parse_index(name, value);
    } else if (name == "M") {
      params.M = parse_index(name, value);
    } else if (name == "M_tilde") {
      params.M_tilde = parse_index(name, value);
    } else if (name == "L") {
      params.L = parse_index(name, value);
    } else if (name == "snr_db") {
      params.snr_db = parse_real(name, value);
    } else if (name == "delta") {
      params.delta = parse_real(name, value);
    } else if (name == "pulse") {
      params.pulse = PulseShape::parse(value);
    } else if (name == "a") {
      params.pulse = PulseShape::parse("cos2:" + std::string(value));
    } else if (name == "subarray") {
      params.subarray = parse_subarray_kind(value);
    } else if (name == "shift") {
      params.shift = parse_doublet_shift(value);
    } else if (name == "amplitudes") {
      if (value != "complex" && value != "real") {
        throw Error(ErrorCode::ConfigError, "amplitudes must be complex or real");
      }
      params.real_amplitudes = value == "real";
    } else if (name == "locations") {
      params.locations = parse_location_mode(value);
    } else if (name == "md_metric") {
      params.md_metric = parse_md_metric(value);
    } else {
      throw Error(ErrorCode::ConfigError, "unknown parameter '" + std::string(name) + "'");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, "parameter " + std::string(name) + ": " + e.what());
  }
}

std::vector<GridPoint> expand_grid(const SweepConfig& config) {
  if (config.axes.size() > 2) throw Error(ErrorCode::ConfigError, "at most two sweep axes");
  for (const Axis& a : config.axes) {
    if (a.values.empty()) throw Error(ErrorCode::ConfigError, "axis '" + a.name + "' has no values");
  }
  std::vector<GridPoint> points;
  const std::size_t n1 = config.axes.empty() ? 1 : config.axes[0].values.size();
  const std::size_t n2 = config.axes.size() < 2 ? 1 : config.axes[1].values.size();
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      GridPoint gp;
      gp.point_id = static_cast<Index>(points.size());
      gp.params = config.fixed;
      if (!config.axes.empty()) {
        set_parameter(gp.params, config.axes[0].name, config.axes[0].values[i]);
        gp.coords.emplace_back(config.axes[0].name, config.axes[0].values[i]);
      }
      if (config.axes.size() > 1) {
        set_parameter(gp.params, config.axes[1].name, config.axes[1].values[j]);
        gp.coords.emplace_back(config.axes[1].name, config.axes[1].values[j]);
      }
      points.push_back(std::move(gp));
    }
  }
  return points;
}

std::uint64_t location_seed(std::uint64_t master_seed, Index S) {
  return stable_hash({master_seed, kLocationTag, static_cast<std::uint64_t>(S)});
}

std::uint64_t trial_seed(std::uint64_t master_seed, Index point_id, Index trial) {
  return stable_hash({master_seed, static_cast<std::uint64_t>(point_id), static_cast<std::uint64_t>(trial)});
}

std::vector<double> generate_locations(Index S, double delta, double period, LocationMode mode,
                                       std::uint64_t seed) {
  if (S < 1) throw Error(ErrorCode::InvalidArgument, "S must be positive");
  if (!(period > 0.0) || !(delta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "period and delta must be positive");
  }
  if (static_cast<double>(S) * delta > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "S sources at separation delta do not fit on the torus");
  }
  Rng rng(seed);
  std::vector<double> locs(static_cast<std::size_t>(S));
  auto wrap = [period](double t) {
    double r = std::fmod(t, period);
    if (r < 0.0) r += period;
    return r >= period ? 0.0 : r;
  };
  if (mode == LocationMode::Equispaced) {
    // Slightly wider than delta*T so rounding never pulls a gap below it.
    const double spacing = delta * period * (1.0 + 1e-12);
    const double lo = spacing;
    const double hi = period - static_cast<double>(S) * spacing;
    const double offset = hi >= lo ? std::uniform_real_distribution<double>(lo, hi)(rng)
                                   : std::uniform_real_distribution<double>(0.0, period)(rng);
    for (Index k = 0; k < S; ++k) locs[static_cast<std::size_t>(k)] = wrap(offset + static_cast<double>(k) * spacing);
  } else {
    const double spacing = period / static_cast<double>(S);
    const double slack = std::max(0.0, (spacing - delta * period * (1.0 + 1e-12)) / 2.0);
    const double offset = std::uniform_real_distribution<double>(0.0, period)(rng);
    std::uniform_real_distribution<double> jitter(-slack, slack);
    for (Index k = 0; k < S; ++k) {
      locs[static_cast<std::size_t>(k)] = wrap(offset + static_cast<double>(k) * spacing + jitter(rng));
    }
  }
  std::sort(locs.begin(), locs.end());
  if (S >= 2 && min_separation(locs, period) < delta) {
    throw Error(ErrorCode::InvalidArgument, "generated locations violate the separation");
  }
  return locs;
}

TrialRecord run_trial(const GridPoint& point, const std::vector<double>& locations,
                      std::uint64_t seed, Index trial, std::string_view preset, bool record_runtime) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord r;
  fill_point_fields(r, point, preset);
  r.trial = trial;
  r.seed = seed;
  try {
    measure_trial(r, point, locations, seed);
  } catch (const Error& e) {
    mark_failed(r, e.code());
  } catch (const std::exception&) {
    mark_failed(r, ErrorCode::EigenFailure);
  }
  if (record_runtime) {
    r.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return r;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string to_csv_row(const TrialRecord& r) {
  const bool doublet = r.subarray == "doublet";
  std::ostringstream os;
  os << r.preset << ',' << r.point_id << ',' << r.axis1_name << ',' << r.axis1_value << ','
     << r.axis2_name << ',' << r.axis2_value << ',' << r.trial << ',' << r.seed << ',' << r.S << ','
     << r.M << ',' << csv_index(r.M_tilde, doublet) << ',' << r.L << ',' << format_double(r.snr_db)
     << ',' << format_double(r.delta) << ',' << r.pulse << ',' << csv_real(r.a_param) << ','
     << r.subarray << ',' << format_double(r.md) << ',' << format_double(r.dist_U) << ','
     << format_double(r.sigmaS_U1hat) << ',' << format_double(r.kappa_Phi) << ','
     << format_double(r.pic_violation) << ',' << csv_index(r.n_doublets, doublet) << ','
     << r.n_frequencies << ',' << format_double(r.bound_prop1) << ',' << format_double(r.bound_thm)
     << ',' << (r.prop_cond_satisfied ? 1 : 0) << ',' << to_string(r.error_code) << ','
     << format_double(r.runtime_ms);
  return os.str();
}

TrialRecord parse_csv_row(const std::string& line) {
  const auto f = split(line, ',');
  if (f.size() != 29) {
    throw Error(ErrorCode::SchemaError, "expected 29 columns, got " + std::to_string(f.size()));
  }
  try {
    TrialRecord r;
    r.preset = f[0];
    r.point_id = parse_index("point_id", f[1]);
    r.axis1_name = f[2];
    r.axis1_value = f[3];
    r.axis2_name = f[4];
    r.axis2_value = f[5];
    r.trial = parse_index("trial", f[6]);
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(f[7].data(), f[7].data() + f[7].size(), seed);
    if (ec != std::errc() || ptr != f[7].data() + f[7].size()) {
      throw Error(ErrorCode::SchemaError, "bad seed '" + f[7] + "'");
    }
    r.seed = seed;
    r.S = parse_index("S", f[8]);
    r.M = parse_index("M", f[9]);
    r.M_tilde = f[10].empty() ? 0 : parse_index("M_tilde", f[10]);
    r.L = parse_index("L", f[11]);
    r.snr_db = field_real(f[12]);
    r.delta = field_real(f[13]);
    r.pulse = f[14];
    r.a_param = field_real(f[15]);
    r.subarray = f[16];
    r.md = field_real(f[17]);
    r.dist_U = field_real(f[18]);
    r.sigmaS_U1hat = field_real(f[19]);
    r.kappa_Phi = field_real(f[20]);
    r.pic_violation = field_real(f[21]);
    r.n_doublets = f[22].empty() ? 0 : parse_index("n_doublets", f[22]);
    r.n_frequencies = parse_index("n_frequencies", f[23]);
    r.bound_prop1 = field_real(f[24]);
    r.bound_thm = field_real(f[25]);
    if (f[26] != "0" && f[26] != "1") throw Error(ErrorCode::SchemaError, "bad prop_cond_satisfied");
    r.prop_cond_satisfied = f[26] == "1";
    r.error_code = error_code_from_string(f[27]);
    if (r.error_code == ErrorCode::InvalidArgument && f[27] != "InvalidArgument") {
      throw Error(ErrorCode::SchemaError, "unknown error code '" + f[27] + "'");
    }
    r.runtime_ms = field_real(f[28]);
    return r;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    throw Error(ErrorCode::SchemaError, e.what());
  }
}

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) out << to_csv_row(r) << '\n';
}

std::vector<TrialRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::SchemaError, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw Error(ErrorCode::SchemaError, "CSV header does not match the schema");
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(parse_csv_row(line));
  }
  return out;
}

std::vector<TrialRecord> read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return read_csv(in);
}

unsigned effective_workers(unsigned requested) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("PULSE_ESPRIT_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(cap, &end, 10);
    if (end != cap && *end == '\0' && v >= 1) n = std::min(n, static_cast<unsigned>(v));
  }
  return n;
}

std::vector<TrialRecord> run_sweep(const SweepConfig& config, std::ostream* csv) {
  if (config.trials_per_point < 1) throw Error(ErrorCode::ConfigError, "trials_per_point must be >= 1");
  const std::vector<GridPoint> points = expand_grid(config);

  // Locations are fixed per S; a failure marks every trial of the point.
  std::map<Index, std::vector<double>> locations;
  std::map<Index, ErrorCode> location_errors;
  for (const GridPoint& gp : points) {
    const Index S = gp.params.S;
    if (locations.count(S) || location_errors.count(S)) continue;
    try {
      locations[S] = generate_locations(S, gp.params.delta, gp.params.period, gp.params.locations,
                                        location_seed(config.master_seed, S));
    } catch (const Error& e) {
      location_errors[S] = e.code();
    }
  }
  // delta may vary along an axis; regenerate per point in that case.
  auto locations_for = [&](const GridPoint& gp) -> std::vector<double> {
    if (gp.params.delta == config.fixed.delta && locations.count(gp.params.S)) return locations.at(gp.params.S);
    return generate_locations(gp.params.S, gp.params.delta, gp.params.period, gp.params.locations,
                              location_seed(config.master_seed, gp.params.S));
  };

  const auto trials = static_cast<std::size_t>(config.trials_per_point);
  const std::size_t total = points.size() * trials;
  std::vector<TrialRecord> results(total);
  std::vector<char> ready(total, 0);
  std::mutex mutex;
  std::size_t next_write = 0;
  std::atomic<std::size_t> next_task{0};

  if (csv) *csv << kCsvHeader << '\n';

  auto work = [&]() {
    for (;;) {
      const std::size_t t = next_task.fetch_add(1);
      if (t >= total) return;
      const GridPoint& gp = points[t / trials];
      const auto trial = static_cast<Index>(t % trials);
      const std::uint64_t seed = trial_seed(config.master_seed, gp.point_id, trial);
      TrialRecord rec;
      try {
        rec = run_trial(gp, locations_for(gp), seed, trial, config.preset, config.record_runtime);
      } catch (const Error& e) {
        fill_point_fields(rec, gp, config.preset);
        rec.trial = trial;
        rec.seed = seed;
        mark_failed(rec, e.code());
      }
      std::lock_guard<std::mutex> lock(mutex);
      results[t] = std::move(rec);
      ready[t] = 1;
      while (next_write < total && ready[next_write]) {
        if (csv) *csv << to_csv_row(results[next_write]) << '\n';
        ++next_write;
      }
    }
  };

  const unsigned n_workers =
      std::min<unsigned>(effective_workers(config.workers), static_cast<unsigned>(std::max<std::size_t>(1, total)));
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (csv) csv->flush();
  return results;
}

std::vector<TrialRecord> run_sweep_to_file(const SweepConfig& config, const std::string& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + csv_path + "'");
  const auto start = std::chrono::steady_clock::now();
  auto records = run_sweep(config, &out);
  if (!out) throw Error(ErrorCode::IoError, "write to '" + csv_path + "' failed");
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  nlohmann::ordered_json manifest;
  manifest["preset"] = config.preset;
  manifest["master_seed"] = config.master_seed;
  manifest["trials_per_point"] = config.trials_per_point;
  nlohmann::ordered_json axes = nlohmann::ordered_json::array();
  for (const Axis& a : config.axes) axes.push_back({{"name", a.name}, {"values", a.values}});
  manifest["axes"] = axes;
  const PointParams& p = config.fixed;
  manifest["fixed"] = {{"period", p.period},
                       {"S", p.S},
                       {"M", p.M},
                       {"M_tilde", p.M_tilde},
                       {"L", p.L},
                       {"snr_db", format_double(p.snr_db)},
                       {"delta", p.delta},
                       {"pulse", p.pulse.to_string()},
                       {"subarray", to_string(p.subarray)},
                       {"shift", to_string(p.shift)},
                       {"amplitudes", p.real_amplitudes ? "real" : "complex"},
                       {"locations", to_string(p.locations)},
                       {"md_metric", to_string(p.md_metric)}};
  manifest["workers"] = effective_workers(config.workers);
  manifest["records"] = records.size();
  manifest["code_version"] = kCodeVersion;
  manifest["wall_time_s"] = wall;
  std::ofstream mf(csv_path + ".manifest.json");
  if (!mf) throw Error(ErrorCode::IoError, "cannot write manifest for '" + csv_path + "'");
  mf << manifest.dump(2) << '\n';
  return records;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, values.size() - 1);
  return values[i] + (pos - static_cast<double>(i)) * (values[j] - values[i]);
}

std::vector<PointSummary> summarize(const std::vector<TrialRecord>& records) {
  std::map<Index, std::pair<PointSummary, std::vector<double>>> by_point;
  for (const auto& r : records) {
    auto& [s, mds] = by_point[r.point_id];
    s.point_id = r.point_id;
    s.axis1_name = r.axis1_name;
    s.axis1_value = r.axis1_value;
    s.axis2_name = r.axis2_name;
    s.axis2_value = r.axis2_value;
    ++s.trials;
    if (r.error_code != ErrorCode::None) {
      ++s.failures;
    } else {
      mds.push_back(r.md);
    }
  }
  std::vector<PointSummary> out;
  for (auto& [id, entry] : by_point) {
    auto& [s, mds] = entry;
    s.median_md = quantile(mds, 0.5);
    s.p90_md = quantile(mds, 0.9);
    s.mean_md = mds.empty() ? kNaN : std::accumulate(mds.begin(), mds.end(), 0.0) / static_cast<double>(mds.size());
    out.push_back(s);
  }
  return out;
}

std::vector<std::string> preset_names() {
  return {"fig3-trivial", "fig3-narrow", "fig3-wide", "fig4", "fig5", "fig6", "bounds"};
}

SweepConfig preset(std::string_view name, double scale) {
  SweepConfig c;
  c.preset = std::string(name);
  PointParams& p = c.fixed;
  p.period = 1.0;
  Index full_trials = 500;
  if (name == "fig3-trivial" || name == "fig3-narrow" || name == "fig3-wide") {
    p.M = 240;
    p.delta = 0.0125;
    p.S = 5;
    p.pulse = PulseShape::parse(name == "fig3-trivial" ? "dirac"
                                : name == "fig3-narrow" ? "cos2:0.9"
                                                        : "cos2:0.75");
    c.axes = {{"L", {"5", "10", "20", "40", "80", "160", "320", "640"}},
              {"snr_db", int_range(10, 20, 1)}};
  } else if (name == "fig4") {
    p.M = 160;
    p.delta = 0.025;
    p.S = 5;
    p.L = 20;
    p.snr_db = 20.0;
    Axis a{"a", {}};
    for (int i = 75; i <= 90; ++i) a.values.push_back("0." + std::to_string(i));
    c.axes = {a};
    full_trials = 1000;
  } else if (name == "fig5") {
    p.subarray = SubArrayKind::Doublet;
    p.M = 40;
    p.delta = 0.008;
    p.S = 7;
    p.L = 50;
    p.snr_db = 28.0;
    p.M_tilde = 260;
    c.axes = {{"M_tilde", int_range(40, 260, 20)}, {"pulse", {"dirac", "cos2:1"}}};
    full_trials = 1000;
  } else if (name == "fig6") {
    p.subarray = SubArrayKind::Doublet;
    p.M_tilde = 260;
    p.delta = 0.008;
    p.L = 50;
    p.snr_db = 26.0;
    p.pulse = PulseShape::parse("cos2:1");
    c.axes = {{"S", int_range(2, 20, 2)}, {"M", int_range(20, 200, 20)}};
    full_trials = 500;
  } else if (name == "bounds") {
    p.M = 64;
    p.S = 4;
    p.delta = 0.02;
    p.L = 64;
    p.md_metric = MdMetric::Torus;
    c.axes = {{"pulse", {"dirac", "cos2:0.9"}}, {"snr_db", {"10", "20", "30", "40"}}};
    full_trials = 200;
  } else {
    throw Error(ErrorCode::UnknownPreset, "unknown preset '" + std::string(name) + "'");
  }

  // Presets fix Delta but not T. T = 0.1/Delta puts neighbouring sources
  // 0.1 time units apart, about half the cos^2 support, so pulses overlap
  // while the sampled band stays in the low-order lobes of G.
  p.period = 0.1 / p.delta;

  int stride = 2;
  if (scale < 0.0) {
    c.trials_per_point = 100;
  } else {
    if (!(scale > 0.0)) throw Error(ErrorCode::ConfigError, "scale must be positive");
    c.trials_per_point = std::max<Index>(1, static_cast<Index>(std::llround(static_cast<double>(full_trials) * scale)));
    stride = scale >= 1.0 ? 1 : 1 + static_cast<int>(std::ceil(std::log10(1.0 / scale)));
  }
  for (Axis& a : c.axes) {
    // Categorical axes are never thinned.
    if (a.name != "pulse") a.values = thin(a.values, stride);
  }
  return c;
}

VerificationReport verify_bounds(const std::vector<TrialRecord>& records) {
  std::map<Index, std::pair<PointVerification, std::vector<double>>> by_point;
  for (const auto& r : records) {
    auto& [v, mds] = by_point[r.point_id];
    v.point_id = r.point_id;
    v.axis1_name = r.axis1_name;
    v.axis1_value = r.axis1_value;
    v.axis2_name = r.axis2_name;
    v.axis2_value = r.axis2_value;
    ++v.trials;
    if (r.error_code != ErrorCode::None) {
      ++v.failures;
      continue;
    }
    mds.push_back(r.md);
    if (!r.prop_cond_satisfied) {
      ++v.prop_cond_failures;
    } else if (!std::isnan(r.bound_prop1)) {
      ++v.prop1_checked;
      if (r.md <= r.bound_prop1 * (1.0 + 1e-9) + 1e-12) {
        ++v.prop1_dominated;
      } else {
        ++v.prop1_violations;
      }
    }
    if (std::isfinite(r.bound_thm)) {
      ++v.thm_checked;
      if (r.md <= r.bound_thm) ++v.thm_dominated;
    }
  }
  VerificationReport report;
  for (auto& [id, entry] : by_point) {
    auto& [v, mds] = entry;
    v.median_md = quantile(mds, 0.5);
    report.total_prop1_checked += v.prop1_checked;
    report.total_prop1_violations += v.prop1_violations;
    report.points.push_back(v);
  }
  return report;
}

std::string report_to_json(const VerificationReport& report) {
  nlohmann::ordered_json j;
  j["prop1_checked"] = report.total_prop1_checked;
  j["prop1_violations"] = report.total_prop1_violations;
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const auto& v : report.points) {
    nlohmann::ordered_json p;
    p["point_id"] = v.point_id;
    if (!v.axis1_name.empty()) p[v.axis1_name] = v.axis1_value;
    if (!v.axis2_name.empty()) p[v.axis2_name] = v.axis2_value;
    p["trials"] = v.trials;
    p["failures"] = v.failures;
    p["prop_cond_failures"] = v.prop_cond_failures;
    p["prop1_checked"] = v.prop1_checked;
    p["prop1_dominated"] = v.prop1_dominated;
    p["prop1_violations"] = v.prop1_violations;
    p["prop1_fraction"] =
        v.prop1_checked > 0 ? static_cast<double>(v.prop1_dominated) / static_cast<double>(v.prop1_checked) : 1.0;
    p["thm_checked"] = v.thm_checked;
    p["thm_dominated"] = v.thm_dominated;
    p["median_md"] = std::isnan(v.median_md) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v.median_md);
    pts.push_back(p);
  }
  j["points"] = pts;
  return j.dump(2);
}

}  // namespace pulse_esprit
