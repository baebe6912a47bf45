#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pulse_esprit/esprit.hpp"
#include "pulse_esprit/experiments.hpp"
#include "pulse_esprit/random.hpp"
#include "pulse_esprit/subarrays.hpp"

namespace pulse_esprit::cli {
namespace {

using nlohmann::ordered_json;

const std::map<std::string, std::set<std::string>>& config_sections() {
  static const std::map<std::string, std::set<std::string>> sections = {
      {"signal-model", {"pulse", "period", "S", "L", "snr_db", "delta", "amplitudes", "locations"}},
      {"subarrays", {"subarray", "M", "M_tilde", "shift"}},
      {"metrics", {"md_metric"}},
      {"experiments", {"preset", "scale", "trials", "seed", "workers", "output", "timing", "axis1", "axis2"}},
  };
  return sections;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& what, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw Error(ErrorCode::ParseError, what + ": cannot parse '" + text + "'");
  }
  return v;
}

std::uint64_t parse_seed(const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ConfigError, "seed must be a non-negative 64-bit integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& what, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(what, trim(item)));
  if (out.empty()) throw Error(ErrorCode::ParseError, what + ": empty list");
  return out;
}

Axis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "axis must look like name=v1,v2,...");
  Axis a;
  a.name = trim(text.substr(0, eq));
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) a.values.push_back(item);
  }
  if (a.values.empty()) throw Error(ErrorCode::ConfigError, "axis '" + a.name + "' has no values");
  return a;
}

ordered_json complex_array(const CVector& v) {
  ordered_json arr = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back({v(i).real(), v(i).imag()});
  return arr;
}

// Random complex Gaussian amplitudes for synthetic data.
CMatrix synthetic_amplitudes(Index S, Index L, Rng& rng) {
  CMatrix x(S, L);
  for (Index l = 0; l < L; ++l) {
    for (Index k = 0; k < S; ++k) x(k, l) = complex_gaussian(rng, 1.0);
  }
  return x;
}

struct DesignOptions {
  std::string subarray = "maxoverlap";
  std::string shift = "half";
  int M = 0;
  int M_tilde = 0;
  double period = 1.0;
};

void add_design_options(CLI::App* cmd, DesignOptions& d) {
  cmd->add_option("--subarray", d.subarray, "maxoverlap | doublet")->check(CLI::IsMember({"maxoverlap", "doublet"}));
  cmd->add_option("--shift", d.shift, "doublet shift: half | full")->check(CLI::IsMember({"half", "full"}));
  cmd->add_option("--M", d.M, "max-overlap M, or expected doublet count");
  cmd->add_option("--M_tilde", d.M_tilde, "doublet pool size");
  cmd->add_option("--period", d.period, "period T");
}

SubArrayPair make_pair_from_options(const DesignOptions& d, Rng& rng) {
  if (d.subarray == "doublet") {
    if (d.M_tilde < 1) throw Error(ErrorCode::InvalidM, "doublet design needs --M_tilde");
    return random_doublet_design(d.M_tilde, d.M, d.period, rng, parse_doublet_shift(d.shift));
  }
  return max_overlap_design(d.M, d.period);
}

struct SynthSpec {
  std::string pulse;
  std::string tau;
  int L = 1;
  std::string snr = "inf";
  std::uint64_t seed = 0;
};

struct SynthOutput {
  MeasurementSet meas;
  GroundTruth truth;
  SubArrayPair pair;
};

SynthOutput synthesize_from(const SynthSpec& spec, const DesignOptions& d) {
  Rng rng(spec.seed);
  SynthOutput o;
  o.pair = make_pair_from_options(d, rng);
  const std::vector<double> tau = parse_list("--tau", spec.tau);
  const auto S = static_cast<Index>(tau.size());
  o.truth = make_ground_truth(d.period, tau, synthetic_amplitudes(S, spec.L, rng),
                              PulseShape::parse(spec.pulse));
  const MeasurementSet clean = synthesize(o.truth, o.pair.omega_union);
  const double sigma = sigma_from_snr(clean, parse_number("--snr", spec.snr));
  o.meas = add_awgn(clean, sigma, rng);
  return o;
}

std::string summary_table(const std::vector<PointSummary>& summaries) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-6s %-14s %-14s %7s %6s %14s %14s %14s\n", "point", "axis1", "axis2",
                "trials", "fail", "median_md", "mean_md", "p90_md");
  os << line;
  for (const auto& s : summaries) {
    const std::string a1 = s.axis1_name.empty() ? "-" : s.axis1_name + "=" + s.axis1_value;
    const std::string a2 = s.axis2_name.empty() ? "-" : s.axis2_name + "=" + s.axis2_value;
    std::snprintf(line, sizeof line, "%-6lld %-14s %-14s %7lld %6lld %14.6g %14.6g %14.6g\n",
                  static_cast<long long>(s.point_id), a1.c_str(), a2.c_str(),
                  static_cast<long long>(s.trials), static_cast<long long>(s.failures), s.median_md,
                  s.mean_md, s.p90_md);
    os << line;
  }
  return os.str();
}

std::string verify_table(const VerificationReport& rep) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-6s %-14s %-14s %7s %6s %9s %9s %6s %10s %14s\n", "point", "axis1", "axis2",
                "trials", "fail", "cond_fail", "p1_check", "p1_viol", "thm_dom", "median_md");
  os << line;
  for (const auto& v : rep.points) {
    const std::string a1 = v.axis1_name.empty() ? "-" : v.axis1_name + "=" + v.axis1_value;
    const std::string a2 = v.axis2_name.empty() ? "-" : v.axis2_name + "=" + v.axis2_value;
    const std::string thm = std::to_string(v.thm_dominated) + "/" + std::to_string(v.thm_checked);
    std::snprintf(line, sizeof line, "%-6lld %-14s %-14s %7lld %6lld %9lld %9lld %6lld %10s %14.6g\n",
                  static_cast<long long>(v.point_id), a1.c_str(), a2.c_str(),
                  static_cast<long long>(v.trials), static_cast<long long>(v.failures),
                  static_cast<long long>(v.prop_cond_failures), static_cast<long long>(v.prop1_checked),
                  static_cast<long long>(v.prop1_violations), thm.c_str(), v.median_md);
    os << line;
  }
  os << "perturbation bound dominance: " << (rep.total_prop1_checked - rep.total_prop1_violations) << "/"
     << rep.total_prop1_checked << " trials, " << rep.total_prop1_violations << " violations\n";
  return os.str();
}

}  // namespace

int exit_code_for(ErrorCode code) { return 10 + static_cast<int>(code); }

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
  std::map<std::string, std::string> values;
  std::string section;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::ConfigError, where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!config_sections().count(section)) {
        throw Error(ErrorCode::ConfigError, where + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    bool known = false;
    if (section.empty()) {
      for (const auto& [name, keys] : config_sections()) known = known || keys.count(key) > 0;
    } else {
      known = config_sections().at(section).count(key) > 0;
    }
    if (!known) {
      throw Error(ErrorCode::ConfigError,
                  where + ": unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"));
    }
    values[key] = value;
  }
  return values;
}

void write_measurements(std::ostream& out, const MeasurementSet& meas) {
  out << "omega,l,re,im\n";
  for (Index i = 0; i < meas.data.rows(); ++i) {
    for (Index l = 0; l < meas.data.cols(); ++l) {
      const Complex v = meas.data(i, l);
      out << format_double(meas.frequencies[static_cast<std::size_t>(i)]) << ',' << l << ','
          << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
    }
  }
}

MeasurementSet read_measurements(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "omega,l,re,im") {
    throw Error(ErrorCode::ParseError, "measurement file must start with 'omega,l,re,im'");
  }
  struct Row {
    double omega;
    long l;
    Complex v;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[4];
    for (auto& s : f) {
      if (!std::getline(ss, s, ',')) throw Error(ErrorCode::ParseError, "short measurement row '" + line + "'");
    }
    std::string extra;
    if (std::getline(ss, extra, ',')) throw Error(ErrorCode::ParseError, "long measurement row '" + line + "'");
    const double l = parse_number("l", f[1]);
    if (l < 0 || l != std::floor(l)) throw Error(ErrorCode::ParseError, "bad snapshot index '" + f[1] + "'");
    rows.push_back({parse_number("omega", f[0]), static_cast<long>(l),
                    {parse_number("re", f[2]), parse_number("im", f[3])}});
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, "measurement file has no rows");
  std::vector<double> freqs;
  long L = 0;
  for (const Row& r : rows) {
    freqs.push_back(r.omega);
    L = std::max(L, r.l + 1);
  }
  std::sort(freqs.begin(), freqs.end());
  freqs.erase(std::unique(freqs.begin(), freqs.end()), freqs.end());
  MeasurementSet meas;
  meas.frequencies = freqs;
  meas.data = CMatrix::Zero(static_cast<Index>(freqs.size()), L);
  std::vector<char> seen(freqs.size() * static_cast<std::size_t>(L), 0);
  for (const Row& r : rows) {
    const auto i = static_cast<std::size_t>(std::lower_bound(freqs.begin(), freqs.end(), r.omega) - freqs.begin());
    char& s = seen[i * static_cast<std::size_t>(L) + static_cast<std::size_t>(r.l)];
    if (s) throw Error(ErrorCode::ParseError, "duplicate measurement cell");
    s = 1;
    meas.data(static_cast<Index>(i), r.l) = r.v;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw Error(ErrorCode::ParseError, "measurement matrix has missing cells");
  }
  return meas;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blind super-resolution of pulses of unknown shape via ESPRIT", "pulse_esprit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize a measurement CSV");
  SynthSpec synth_spec;
  DesignOptions synth_design;
  std::string synth_out;
  synth->add_option("--pulse", synth_spec.pulse, "dirac | sinc:<B> | cos2:<a> | table:<path>")->required();
  synth->add_option("--tau", synth_spec.tau, "comma-separated locations")->required();
  synth->add_option("--L", synth_spec.L, "snapshots")->required();
  synth->add_option("--snr", synth_spec.snr, "SNR in dB, or inf");
  synth->add_option("--seed", synth_spec.seed, "seed for amplitudes, noise and doublet draw");
  synth->add_option("--out", synth_out, "measurement CSV path")->required();
  add_design_options(synth, synth_design);

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Estimate locations and gains");
  int est_S = 0;
  std::string est_input;
  SynthSpec est_spec;
  DesignOptions est_design;
  std::string est_out;
  estimate->add_option("--S", est_S, "number of pulses")->required();
  auto* input_opt = estimate->add_option("--input", est_input, "measurement CSV (omega,l,re,im)");
  auto* synthetic_opt = estimate->add_option("--synthetic", est_spec.pulse, "pulse spec for in-memory data");
  input_opt->excludes(synthetic_opt);
  estimate->add_option("--tau", est_spec.tau, "locations for --synthetic");
  estimate->add_option("--L", est_spec.L, "snapshots for --synthetic");
  estimate->add_option("--snr", est_spec.snr, "SNR in dB for --synthetic, or inf");
  estimate->add_option("--seed", est_spec.seed, "seed for --synthetic");
  estimate->add_option("--out", est_out, "write JSON here instead of stdout");
  add_design_options(estimate, est_design);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a Monte Carlo sweep");
  std::optional<std::string> sw_preset, sw_config, sw_seed, sw_out, sw_scale, sw_trials, sw_workers;
  std::map<std::string, std::optional<std::string>> sw_params = {
      {"pulse", {}}, {"S", {}}, {"M", {}}, {"M_tilde", {}}, {"L", {}}, {"snr_db", {}}, {"delta", {}},
      {"period", {}}, {"subarray", {}}, {"shift", {}}, {"md_metric", {}}, {"amplitudes", {}}, {"locations", {}}};
  std::vector<std::string> sw_axes;
  bool sw_timing = false;
  sweep->add_option("--preset", sw_preset, "preset name");
  sweep->add_option("--config", sw_config, "config file");
  sweep->add_option("--seed", sw_seed, "master seed (required)");
  sweep->add_option("--out", sw_out, "CSV output path");
  sweep->add_option("--scale", sw_scale, "fraction of the full trial count and grid");
  sweep->add_option("--trials", sw_trials, "trials per grid point");
  sweep->add_option("--workers", sw_workers, "worker threads");
  sweep->add_option("--axis", sw_axes, "sweep axis name=v1,v2,... (up to two)");
  sweep->add_flag("--timing", sw_timing, "record per-trial runtime_ms");
  for (auto& [key, slot] : sw_params) {
    sweep->add_option(key == "snr_db" ? "--snr" : "--" + key, slot, "override " + key);
  }

  // verify
  auto* verify = app.add_subcommand("verify", "Check bound dominance in a sweep CSV");
  std::string ver_input;
  std::string ver_json;
  std::string ver_format = "text";
  verify->add_option("records", ver_input, "sweep CSV")->required();
  verify->add_option("--json", ver_json, "also write the JSON report here");
  verify->add_option("--format", ver_format, "text | json")->check(CLI::IsMember({"text", "json"}));

  // preset list
  auto* preset_cmd = app.add_subcommand("preset", "Preset utilities");
  auto* preset_list = preset_cmd->add_subcommand("list", "List presets");
  preset_cmd->require_subcommand(1);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      const SynthOutput o = synthesize_from(synth_spec, synth_design);
      std::ofstream f(synth_out, std::ios::binary);
      if (!f) throw Error(ErrorCode::IoError, "cannot write '" + synth_out + "'");
      write_measurements(f, o.meas);
      ordered_json j;
      j["locations"] = o.truth.locations;
      j["frequencies"] = o.meas.frequencies.size();
      j["snapshots"] = o.meas.data.cols();
      j["noise_sigma"] = o.meas.noise_sigma;
      j["output"] = synth_out;
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (estimate->parsed()) {
      MeasurementSet meas;
      SubArrayPair pair;
      if (!est_input.empty()) {
        std::ifstream f(est_input);
        if (!f) throw Error(ErrorCode::IoError, "cannot open '" + est_input + "'");
        meas = read_measurements(f);
        pair = pair_from_frequencies(meas.frequencies, parse_subarray_kind(est_design.subarray),
                                     est_design.period, parse_doublet_shift(est_design.shift));
      } else if (!est_spec.pulse.empty()) {
        if (est_spec.tau.empty()) {
          err << "usage error: --synthetic needs --tau\n";
          return kExitUsage;
        }
        SynthOutput o = synthesize_from(est_spec, est_design);
        meas = std::move(o.meas);
        pair = std::move(o.pair);
      } else {
        err << "usage error: estimate needs --input or --synthetic\n";
        return kExitUsage;
      }
      const EstimationResult r = solve(meas, pair, est_S, est_design.period);
      ordered_json j;
      j["locations"] = r.locations;
      if (r.gains) {
        j["frequencies"] = meas.frequencies;
        j["gains"] = complex_array(*r.gains);
      }
      ordered_json ev = ordered_json::array();
      for (const Complex& c : r.raw_eigenvalues) ev.push_back({c.real(), c.imag()});
      j["eigenvalues"] = ev;
      j["diagnostics"] = {{"sigmaS_U1hat", r.diagnostics.sigmaS_U1hat},
                          {"psi_condition", r.diagnostics.psi_condition}};
      if (est_out.empty()) {
        out << j.dump(2) << '\n';
      } else {
        std::ofstream f(est_out);
        if (!f) throw Error(ErrorCode::IoError, "cannot write '" + est_out + "'");
        f << j.dump(2) << '\n';
      }
      return kExitOk;
    }

    if (sweep->parsed()) {
      std::map<std::string, std::string> file;
      if (sw_config) file = read_config(*sw_config);
      auto pick = [&](const std::optional<std::string>& flag, const char* key) -> std::optional<std::string> {
        if (flag) return flag;
        if (auto it = file.find(key); it != file.end()) return it->second;
        return std::nullopt;
      };
      const auto seed = pick(sw_seed, "seed");
      if (!seed) {
        err << "usage error: sweep requires --seed (or seed in the config file)\n";
        return kExitUsage;
      }
      const auto preset_name = pick(sw_preset, "preset");
      const auto scale = pick(sw_scale, "scale");
      SweepConfig config = preset_name ? preset(*preset_name, scale ? parse_number("scale", *scale) : -1.0)
                                       : SweepConfig{};
      if (!preset_name && scale) throw Error(ErrorCode::ConfigError, "--scale needs a preset");
      config.master_seed = parse_seed(*seed);

      std::vector<Axis> axes;
      for (const char* key : {"axis1", "axis2"}) {
        if (auto it = file.find(key); it != file.end()) axes.push_back(parse_axis(it->second));
      }
      if (!sw_axes.empty()) {
        axes.clear();
        for (const auto& a : sw_axes) axes.push_back(parse_axis(a));
      }
      if (!axes.empty()) config.axes = axes;

      for (const auto& [key, flag] : sw_params) {
        if (auto v = pick(flag, key.c_str())) set_parameter(config.fixed, key, *v);
      }
      if (auto v = pick(sw_trials, "trials")) config.trials_per_point = static_cast<Index>(parse_number("trials", *v));
      if (auto v = pick(sw_workers, "workers")) config.workers = static_cast<unsigned>(parse_number("workers", *v));
      if (auto it = file.find("timing"); it != file.end()) config.record_runtime = it->second == "true" || it->second == "1";
      if (sw_timing) config.record_runtime = true;
      const std::string path = pick(sw_out, "output").value_or(config.preset + ".csv");

      const auto records = run_sweep_to_file(config, path);
      out << summary_table(summarize(records));
      out << "wrote " << records.size() << " records to " << path << '\n';
      return kExitOk;
    }

    if (verify->parsed()) {
      const auto records = read_csv_file(ver_input);
      const VerificationReport rep = verify_bounds(records);
      const std::string json = report_to_json(rep);
      if (!ver_json.empty()) {
        std::ofstream f(ver_json);
        if (!f) throw Error(ErrorCode::IoError, "cannot write '" + ver_json + "'");
        f << json << '\n';
      }
      if (ver_format == "json") {
        out << json << '\n';
      } else {
        out << verify_table(rep);
      }
      return kExitOk;
    }

    if (preset_list->parsed()) {
      for (const auto& name : preset_names()) {
        const SweepConfig c = preset(name);
        const PointParams& p = c.fixed;
        out << name << ": pulse=" << p.pulse.to_string() << " subarray=" << to_string(p.subarray)
            << " S=" << p.S << " M=" << p.M;
        if (p.subarray == SubArrayKind::Doublet) out << " M_tilde=" << p.M_tilde;
        out << " L=" << p.L << " snr_db=" << format_double(p.snr_db) << " delta=" << format_double(p.delta)
            << " T=" << format_double(p.period) << " axes=";
        for (std::size_t i = 0; i < c.axes.size(); ++i) out << (i ? "x" : "") << c.axes[i].name;
        out << '\n';
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace pulse_esprit::cli
