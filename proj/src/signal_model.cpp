#include "pulse_esprit/signal_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pulse_esprit/error.hpp"

namespace pulse_esprit {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuadratureTol = 1e-10;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw Error(ErrorCode::ParseError, "cannot parse " + std::string(what) + " from '" +
                                           std::string(text) + "'");
  }
  return v;
}

// sin(x h) / x with the removable singularity at x = 0.
double sin_ratio(double x, double h) {
  const double xh = x * h;
  if (std::abs(xh) < 1e-4) {
    const double s = xh * xh;
    return h * (1.0 - s / 6.0 + s * s / 120.0);
  }
  return std::sin(xh) / x;
}

Complex cos2_transform(double a, double omega) {
  // g(t) = (1 + cos(2bt)) / 2 on |t| <= h, b = 20a, h = pi/(2b); g is even so
  // G is real.
  const double b = 20.0 * a;
  const double h = kPi / (2.0 * b);
  const double k = 2.0 * kPi * omega;
  const double g = sin_ratio(k, h) + 0.5 * (sin_ratio(2.0 * b + k, h) + sin_ratio(2.0 * b - k, h));
  return {g, 0.0};
}

Complex tabulated_transform(const Tabulated& tab, double omega) {
  using boost::math::quadrature::gauss_kronrod;
  const auto& t = tab.t;
  const auto& v = tab.value;
  if (t.size() == 1) return {0.0, 0.0};
  double re = 0.0;
  double im = 0.0;
  for (std::size_t s = 0; s + 1 < t.size(); ++s) {
    const double t0 = t[s];
    const double t1 = t[s + 1];
    const double width = t1 - t0;
    if (width <= 0.0) continue;
    const double v0 = v[s];
    const double v1 = v[s + 1];
    auto value_at = [&](double x) { return v0 + (v1 - v0) * (x - t0) / width; };
    auto fr = [&](double x) { return value_at(x) * std::cos(2.0 * kPi * omega * x); };
    auto fi = [&](double x) { return -value_at(x) * std::sin(2.0 * kPi * omega * x); };
    double err_r = 0.0;
    double err_i = 0.0;
    re += gauss_kronrod<double, 31>::integrate(fr, t0, t1, 15, 1e-12, &err_r);
    im += gauss_kronrod<double, 31>::integrate(fi, t0, t1, 15, 1e-12, &err_i);
    if (!(err_r <= kQuadratureTol) || !(err_i <= kQuadratureTol)) {
      throw Error(ErrorCode::UnsupportedShape,
                  "tabulated pulse quadrature did not converge at omega=" + std::to_string(omega));
    }
  }
  return {re, im};
}

double reduce_mod(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  if (r >= period) r = 0.0;
  return r;
}

}  // namespace

PulseShape PulseShape::parse(std::string_view spec) {
  if (spec == "dirac") return PulseShape{Dirac{}};
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::ParseError, "unknown pulse '" + std::string(spec) + "'");
  }
  const auto kind = spec.substr(0, colon);
  const auto arg = spec.substr(colon + 1);
  if (kind == "sinc") {
    const double band = parse_double(arg, "sinc band edge");
    if (!(band > 0.0)) throw Error(ErrorCode::InvalidArgument, "sinc band edge must be positive");
    return PulseShape{Sinc{band}};
  }
  if (kind == "cos2") {
    const double a = parse_double(arg, "cos2 width parameter");
    if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "cos2 parameter must be positive");
    return PulseShape{TruncatedCosineSquared{a}};
  }
  if (kind == "table") return PulseShape{load_tabulated(std::string(arg))};
  throw Error(ErrorCode::ParseError, "unknown pulse '" + std::string(spec) + "'");
}

std::string PulseShape::to_string() const {
  return std::visit(Overloaded{
                        [](const Dirac&) { return std::string("dirac"); },
                        [](const Sinc& s) {
                          std::ostringstream os;
                          os << "sinc:" << s.band_edge;
                          return os.str();
                        },
                        [](const TruncatedCosineSquared& c) {
                          std::ostringstream os;
                          os << "cos2:" << c.a;
                          return os.str();
                        },
                        [](const Tabulated&) { return std::string("table"); },
                    },
                    kind);
}

std::optional<double> PulseShape::cos2_param() const {
  if (const auto* c = std::get_if<TruncatedCosineSquared>(&kind)) return c->a;
  return std::nullopt;
}

std::optional<double> PulseShape::support_width() const {
  return std::visit(Overloaded{
                        [](const Dirac&) -> std::optional<double> { return 0.0; },
                        [](const Sinc&) -> std::optional<double> { return std::nullopt; },
                        [](const TruncatedCosineSquared& c) -> std::optional<double> {
                          return kPi / (20.0 * c.a);
                        },
                        [](const Tabulated& t) -> std::optional<double> {
                          double m = 0.0;
                          for (double x : t.t) m = std::max(m, std::abs(x));
                          return 2.0 * m;
                        },
                    },
                    kind);
}

Tabulated load_tabulated(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open pulse table '" + path + "'");
  Tabulated tab;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double t = 0.0;
    double v = 0.0;
    if (!(row >> t >> v)) {
      if (first) {
        first = false;
        continue;
      }
      throw Error(ErrorCode::ParseError, "malformed pulse table row '" + line + "'");
    }
    first = false;
    tab.t.push_back(t);
    tab.value.push_back(v);
  }
  if (tab.t.empty()) throw Error(ErrorCode::ParseError, "pulse table '" + path + "' is empty");
  if (!std::is_sorted(tab.t.begin(), tab.t.end())) {
    throw Error(ErrorCode::ParseError, "pulse table '" + path + "' is not sorted in t");
  }
  return tab;
}

Complex fourier_value(const PulseShape& shape, double omega) {
  return std::visit(Overloaded{
                        [](const Dirac&) { return Complex{1.0, 0.0}; },
                        [omega](const Sinc& s) {
                          const double w = std::abs(omega);
                          if (w < s.band_edge) return Complex{1.0, 0.0};
                          if (w == s.band_edge) return Complex{0.5, 0.0};
                          return Complex{0.0, 0.0};
                        },
                        [omega](const TruncatedCosineSquared& c) { return cos2_transform(c.a, omega); },
                        [omega](const Tabulated& t) {
                          if (t.t.empty() || !std::is_sorted(t.t.begin(), t.t.end())) {
                            throw Error(ErrorCode::InvalidArgument,
                                        "tabulated pulse needs sorted, nonempty samples");
                          }
                          return tabulated_transform(t, omega);
                        },
                    },
                    shape.kind);
}

GroundTruth make_ground_truth(double period, std::vector<double> locations, CMatrix amplitudes,
                              PulseShape shape) {
  if (!(period > 0.0)) throw Error(ErrorCode::InvalidArgument, "period must be positive");
  if (locations.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one location");
  if (amplitudes.cols() < 1) throw Error(ErrorCode::InvalidArgument, "need at least one snapshot");
  if (amplitudes.rows() != static_cast<Index>(locations.size())) {
    throw Error(ErrorCode::DimensionMismatch, "amplitude rows must equal the number of locations");
  }
  for (double& tau : locations) tau = reduce_mod(tau, period);
  for (std::size_t i = 0; i < locations.size(); ++i) {
    for (std::size_t j = i + 1; j < locations.size(); ++j) {
      const double d = std::abs(locations[i] - locations[j]);
      if (std::min(d, period - d) <= 0.0) {
        throw Error(ErrorCode::InvalidArgument, "locations must be distinct on the torus");
      }
    }
  }
  if (const auto* tab = std::get_if<Tabulated>(&shape.kind)) {
    if (tab->t.empty()) throw Error(ErrorCode::InvalidArgument, "empty pulse table");
    if (tab->t.front() < -period / 2.0 || tab->t.back() > period / 2.0) {
      throw Error(ErrorCode::InvalidArgument, "tabulated pulse support exceeds [-T/2, T/2]");
    }
  }
  return GroundTruth{period, std::move(locations), std::move(amplitudes), std::move(shape)};
}

CMatrix vandermonde(const std::vector<double>& locations, const std::vector<double>& frequencies) {
  const auto rows = static_cast<Index>(frequencies.size());
  const auto cols = static_cast<Index>(locations.size());
  CMatrix phi(rows, cols);
  for (Index k = 0; k < cols; ++k) {
    for (Index i = 0; i < rows; ++i) phi(i, k) = unit_phasor(locations[k], frequencies[i]);
  }
  return phi;
}

CVector sample_gains(const PulseShape& shape, const std::vector<double>& frequencies) {
  CVector g(static_cast<Index>(frequencies.size()));
  for (Index i = 0; i < g.size(); ++i) g(i) = fourier_value(shape, frequencies[i]);
  return g;
}

namespace {
void check_frequencies(const std::vector<double>& frequencies) {
  if (frequencies.empty()) throw Error(ErrorCode::InvalidArgument, "empty frequency list");
  for (std::size_t i = 1; i < frequencies.size(); ++i) {
    if (!(frequencies[i] > frequencies[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "frequencies must be strictly increasing");
    }
  }
}
}  // namespace

SystemMatrices build_system(const GroundTruth& truth, const std::vector<double>& frequencies) {
  check_frequencies(frequencies);
  return SystemMatrices{sample_gains(truth.shape, frequencies),
                        vandermonde(truth.locations, frequencies)};
}

MeasurementSet synthesize(const GroundTruth& truth, const std::vector<double>& frequencies) {
  const SystemMatrices sys = build_system(truth, frequencies);
  MeasurementSet out;
  out.frequencies = frequencies;
  out.data = sys.gains.asDiagonal() * (sys.phi * truth.amplitudes);
  out.noise_sigma = 0.0;
  return out;
}

MeasurementSet add_awgn(const MeasurementSet& meas, double sigma, Rng& rng) {
  if (sigma < 0.0 || std::isnan(sigma)) throw Error(ErrorCode::NegativeSigma, "sigma must be >= 0");
  MeasurementSet out = meas;
  if (sigma == 0.0) return out;
  const double var = sigma * sigma;
  for (Index l = 0; l < out.data.cols(); ++l) {
    for (Index i = 0; i < out.data.rows(); ++i) out.data(i, l) += complex_gaussian(rng, var);
  }
  out.noise_sigma = std::sqrt(meas.noise_sigma * meas.noise_sigma + var);
  return out;
}

double sigma_from_snr(const MeasurementSet& meas, double snr_db) {
  if (meas.data.size() == 0) throw Error(ErrorCode::ZeroSignal, "empty measurement");
  const double power = meas.data.squaredNorm() / static_cast<double>(meas.data.size());
  if (!(power > 0.0)) throw Error(ErrorCode::ZeroSignal, "measurement is identically zero");
  if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
  return std::sqrt(std::pow(10.0, -snr_db / 10.0) * power);
}

}  // namespace pulse_esprit
