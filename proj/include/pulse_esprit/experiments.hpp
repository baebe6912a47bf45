#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pulse_esprit/error.hpp"
#include "pulse_esprit/metrics.hpp"
#include "pulse_esprit/signal_model.hpp"
#include "pulse_esprit/subarrays.hpp"

namespace pulse_esprit {

/// Equispaced: S points at spacing delta*T from a random offset.
/// Jittered: S points at spacing T/S, each moved uniformly by at most
/// (T/S - delta*T)/2, so the separation never drops below delta*T.
enum class LocationMode { Equispaced, Jittered };

std::string_view to_string(LocationMode mode);
LocationMode parse_location_mode(std::string_view name);

struct PointParams {
  double period = 1.0;
  Index S = 4;
  Index M = 64;
  Index M_tilde = 0;  // doublet pool size; 0 for max-overlap
  Index L = 32;
  double snr_db = 20.0;
  double delta = 0.02;  // normalised by T
  PulseShape pulse;
  SubArrayKind subarray = SubArrayKind::MaxOverlap;
  DoubletShift shift = DoubletShift::Half;
  bool real_amplitudes = false;
  LocationMode locations = LocationMode::Equispaced;
  MdMetric md_metric = MdMetric::Plain;
};

/// Sets one named parameter from its text form. Names: period, S, M, M_tilde,
/// L, snr_db, delta, pulse, a (shorthand for pulse = cos2:<a>), subarray,
/// shift, amplitudes (complex|real), locations, md_metric.
void set_parameter(PointParams& params, std::string_view name, std::string_view value);

struct Axis {
  std::string name;
  std::vector<std::string> values;
};

struct SweepConfig {
  std::string preset = "custom";
  PointParams fixed;
  std::vector<Axis> axes;  // at most two; the first varies slowest
  Index trials_per_point = 100;
  std::uint64_t master_seed = 0;
  unsigned workers = 0;  // 0: hardware concurrency
  bool record_runtime = false;
};

struct GridPoint {
  Index point_id = 0;
  std::vector<std::pair<std::string, std::string>> coords;
  PointParams params;
};

/// Cartesian product of the axes applied on top of the fixed parameters.
std::vector<GridPoint> expand_grid(const SweepConfig& config);

/// Seed of the fixed ground-truth locations. Shared by all grid points with
/// the same S so that points differ only in the swept parameter.
std::uint64_t location_seed(std::uint64_t master_seed, Index S);

/// Trial seed; independent of execution order.
std::uint64_t trial_seed(std::uint64_t master_seed, Index point_id, Index trial);

/// Locations in [0, T) with wrap-around separation >= delta*T. Equispaced
/// offsets are drawn from [delta*T, T - S*delta*T] when that interval is
/// nonempty so the set stays away from the wrap point.
std::vector<double> generate_locations(Index S, double delta, double period, LocationMode mode,
                                       std::uint64_t seed);

struct TrialRecord {
  std::string preset;
  Index point_id = 0;
  std::string axis1_name, axis1_value, axis2_name, axis2_value;
  Index trial = 0;
  std::uint64_t seed = 0;
  Index S = 0;
  Index M = 0;
  Index M_tilde = 0;
  Index L = 0;
  double snr_db = 0.0;
  double delta = 0.0;
  std::string pulse;
  double a_param = 0.0;  // NaN when the pulse is not cos^2
  std::string subarray;
  double md = 0.0;
  double dist_U = 0.0;
  double sigmaS_U1hat = 0.0;
  double kappa_Phi = 0.0;
  double pic_violation = 0.0;
  Index n_doublets = 0;
  Index n_frequencies = 0;
  double bound_prop1 = 0.0;
  double bound_thm = 0.0;
  bool prop_cond_satisfied = false;
  ErrorCode error_code = ErrorCode::None;
  double runtime_ms = 0.0;
};

/// One Monte Carlo draw: fresh amplitudes and noise (and doublet pattern) from
/// the seed, ESPRIT on the noisy data, metrics and bound values. Never throws;
/// failures land in error_code with NaN numeric fields.
TrialRecord run_trial(const GridPoint& point, const std::vector<double>& locations,
                      std::uint64_t seed, Index trial, std::string_view preset = "custom",
                      bool record_runtime = false);

inline constexpr std::string_view kCsvHeader =
    "preset,point_id,axis1_name,axis1_value,axis2_name,axis2_value,trial,seed,S,M,M_tilde,L,"
    "snr_db,delta,pulse,a_param,subarray,md,dist_U,sigmaS_U1hat,kappa_Phi,pic_violation,"
    "n_doublets,n_frequencies,bound_prop1,bound_thm,prop_cond_satisfied,error_code,runtime_ms";

/// Shortest round-trip text of a double; "inf", "-inf", "nan" for the
/// non-finite values.
std::string format_double(double v);

std::string to_csv_row(const TrialRecord& r);
TrialRecord parse_csv_row(const std::string& line);

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records);
/// Raises SchemaError on a missing or different header, wrong column count or
/// unparsable field.
std::vector<TrialRecord> read_csv(std::istream& in);
std::vector<TrialRecord> read_csv_file(const std::string& path);

/// Worker count after applying the PULSE_ESPRIT_WORKERS cap.
unsigned effective_workers(unsigned requested);

/// All points x trials, in parallel. When csv is non-null the header and the
/// rows are streamed to it in (point, trial) order as they complete.
std::vector<TrialRecord> run_sweep(const SweepConfig& config, std::ostream* csv = nullptr);

/// run_sweep writing the CSV to csv_path and a JSON manifest to
/// csv_path + ".manifest.json". Raises IoError on unwritable paths.
std::vector<TrialRecord> run_sweep_to_file(const SweepConfig& config, const std::string& csv_path);

struct PointSummary {
  Index point_id = 0;
  std::string axis1_name, axis1_value, axis2_name, axis2_value;
  Index trials = 0;
  Index failures = 0;
  double median_md = 0.0;
  double mean_md = 0.0;
  double p90_md = 0.0;
};

/// Per-point statistics of md over the trials without error, in point order.
std::vector<PointSummary> summarize(const std::vector<TrialRecord>& records);

/// Linear-interpolated quantile of an unsorted sample; NaN when empty.
double quantile(std::vector<double> values, double q);

std::vector<std::string> preset_names();

/// Paper parameter sets. scale < 0 selects the desk default (100 trials,
/// every second grid value); otherwise trials = max(1, round(full * scale))
/// and axes are thinned by 1 + ceil(log10(1/scale)) for scale < 1.
/// UnknownPreset for other names. The master seed is left at zero.
SweepConfig preset(std::string_view name, double scale = -1.0);

struct PointVerification {
  Index point_id = 0;
  std::string axis1_name, axis1_value, axis2_name, axis2_value;
  Index trials = 0;
  Index failures = 0;
  Index prop_cond_failures = 0;    // excluded from the perturbation-bound denominator
  Index prop1_checked = 0;
  Index prop1_dominated = 0;
  Index prop1_violations = 0;
  Index thm_checked = 0;           // finite bound_thm available
  Index thm_dominated = 0;
  double median_md = 0.0;
};

struct VerificationReport {
  std::vector<PointVerification> points;
  Index total_prop1_checked = 0;
  Index total_prop1_violations = 0;
};

/// Dominance bookkeeping per grid point. prop1_bound is checked on trials without
/// error whose prop condition holds; md <= bound up to a relative 1e-9 slack.
/// bound_thm carries unknown absolute constants and is reported only.
VerificationReport verify_bounds(const std::vector<TrialRecord>& records);

std::string report_to_json(const VerificationReport& report);

}  // namespace pulse_esprit
