#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "generators.hpp"
#include "pulse_esprit/error.hpp"
#include "pulse_esprit/signal_model.hpp"

using namespace pulse_esprit;

namespace {

constexpr double kPi = std::numbers::pi;

// Composite Simpson on the cos^2 support; the integrand is smooth there.
Complex cos2_transform_simpson(double a, double omega) {
  const double half = kPi / (40.0 * a);
  const int n = 4000;
  const double h = 2.0 * half / n;
  Complex acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = -half + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double c = std::cos(20.0 * a * t);
    acc += w * c * c * std::exp(Complex(0.0, -2.0 * kPi * omega * t));
  }
  return acc * h / 3.0;
}

double sinc_sq(double x) {
  if (x == 0.0) return 1.0;
  const double s = std::sin(kPi * x) / (kPi * x);
  return s * s;
}

}  // namespace

TEST_CASE("pulse name parsing") {
  CHECK(PulseShape::parse("dirac").is_dirac());
  CHECK(PulseShape::parse("cos2:0.8").cos2_param().value() == doctest::Approx(0.8));
  CHECK(PulseShape::parse("sinc:40").to_string() == "sinc:40");
  CHECK(PulseShape::parse("cos2:0.75").to_string() == "cos2:0.75");
  CHECK_FALSE(PulseShape::parse("dirac").cos2_param().has_value());

  auto code_of = [](const char* s) {
    try {
      PulseShape::parse(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::None;
  };
  CHECK(code_of("gauss") == ErrorCode::ParseError);
  CHECK(code_of("cos2:abc") == ErrorCode::ParseError);
  CHECK(code_of("cos2:-1") == ErrorCode::InvalidArgument);
  CHECK(code_of("sinc:0") == ErrorCode::InvalidArgument);
}

TEST_CASE("support width") {
  CHECK(PulseShape::parse("dirac").support_width().value() == 0.0);
  CHECK(gen::cos2(0.9).support_width().value() == doctest::Approx(kPi / (20.0 * 0.9)));
  CHECK_FALSE(PulseShape::parse("sinc:3").support_width().has_value());
}

TEST_CASE("cos2 transform at zero is the pulse area") {
  for (double a : {0.75, 0.9, 1.0, 2.5}) {
    const Complex g0 = fourier_value(gen::cos2(a), 0.0);
    CHECK(g0.real() == doctest::Approx(kPi / (40.0 * a)).epsilon(1e-12));
    CHECK(std::abs(g0.imag()) < 1e-15);
  }
  CHECK(fourier_value(gen::cos2(0.9), 0.0).real() == doctest::Approx(kPi / 36.0).epsilon(1e-12));
}

TEST_CASE("cos2 transform matches direct quadrature at random frequencies") {
  Rng rng(7);
  for (int i = 0; i < 60; ++i) {
    const double a = gen::uniform(rng, 0.5, 1.5);
    const double omega = gen::uniform(rng, -300.0, 300.0);
    const Complex want = cos2_transform_simpson(a, omega);
    const Complex got = fourier_value(gen::cos2(a), omega);
    CHECK(std::abs(got - want) < 1e-9);
  }
}

TEST_CASE("cos2 transform is real and even") {
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const double a = gen::uniform(rng, 0.3, 2.0);
    const double omega = gen::uniform(rng, 0.0, 500.0);
    const Complex p = fourier_value(gen::cos2(a), omega);
    const Complex m = fourier_value(gen::cos2(a), -omega);
    CHECK(std::abs(p - m) <= 1e-14 * (1.0 + std::abs(p)));
    CHECK(std::abs(p.imag()) < 1e-14);
  }
}

TEST_CASE("dirac and sinc transforms") {
  CHECK(fourier_value(PulseShape::parse("dirac"), 123.4) == Complex(1.0, 0.0));
  const PulseShape s = PulseShape::parse("sinc:10");
  CHECK(fourier_value(s, 0.0) == Complex(1.0, 0.0));
  CHECK(fourier_value(s, 9.99) == Complex(1.0, 0.0));
  CHECK(fourier_value(s, -10.0) == Complex(0.5, 0.0));
  CHECK(fourier_value(s, 10.0) == Complex(0.5, 0.0));
  CHECK(fourier_value(s, 10.01) == Complex(0.0, 0.0));
  CHECK(fourier_value(PulseShape::parse("sinc:5"), 4.0) == Complex(1.0, 0.0));
  CHECK(fourier_value(PulseShape::parse("sinc:5"), 6.0) == Complex(0.0, 0.0));
}

TEST_CASE("tabulated triangle has a squared sinc transform") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = (dir / "pulse_esprit_triangle.csv").string();
  {
    std::ofstream f(path);
    f << "t,value\n-0.25,0\n0,1\n0.25,0\n";
  }
  const Tabulated tab = load_tabulated(path);
  REQUIRE(tab.t.size() == 3);
  const PulseShape shape{tab};
  // Triangle of half-width w: G = w sinc^2(w omega).
  const double w = 0.25;
  for (double omega : {0.0, 0.7, 1.3, 3.9, 10.2}) {
    const Complex g = fourier_value(shape, omega);
    CHECK(std::abs(g - Complex(w * sinc_sq(w * omega), 0.0)) < 1e-9);
  }
  CHECK(shape.support_width().value() == doctest::Approx(0.5));
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_tabulated((dir / "pulse_esprit_missing.csv").string()), Error);
}

TEST_CASE("ground truth validation") {
  const CMatrix x = CMatrix::Ones(2, 3);
  const GroundTruth gt = make_ground_truth(2.0, {2.5, -0.5}, x, PulseShape::parse("dirac"));
  CHECK(gt.locations[0] == doctest::Approx(0.5));
  CHECK(gt.locations[1] == doctest::Approx(1.5));

  auto code_of = [&](double period, std::vector<double> tau, const CMatrix& amp) {
    try {
      make_ground_truth(period, std::move(tau), amp, PulseShape::parse("dirac"));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::None;
  };
  CHECK(code_of(1.0, {0.1, 0.2, 0.3}, x) == ErrorCode::DimensionMismatch);
  CHECK(code_of(1.0, {0.25, 1.25}, x) == ErrorCode::InvalidArgument);
  CHECK(code_of(0.0, {0.1, 0.2}, x) == ErrorCode::InvalidArgument);
  CHECK(code_of(1.0, {}, CMatrix(0, 3)) == ErrorCode::InvalidArgument);
}

TEST_CASE("synthesize agrees with the direct sum") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Index S = gen::integer(rng, 1, 6);
    const Index L = gen::integer(rng, 1, 5);
    const double T = gen::uniform(rng, 0.5, 3.0);
    const double a = gen::uniform(rng, 0.6, 1.2);
    const auto tau = gen::separated_locations(rng, S, 0.05, T);
    const GroundTruth gt = make_ground_truth(T, tau, gen::amplitudes(rng, S, L), gen::cos2(a));
    std::vector<double> freqs;
    for (int m = 0; m < 17; ++m) freqs.push_back(m / T);

    const MeasurementSet meas = synthesize(gt, freqs);
    REQUIRE(meas.data.rows() == 17);
    REQUIRE(meas.data.cols() == L);
    CHECK(meas.noise_sigma == 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      const Complex g = cos2_transform_simpson(a, freqs[i]);
      for (Index l = 0; l < L; ++l) {
        Complex y = 0.0;
        for (Index k = 0; k < S; ++k) {
          y += std::exp(Complex(0.0, -2.0 * kPi * tau[static_cast<std::size_t>(k)] * freqs[i])) *
               gt.amplitudes(k, l);
        }
        worst = std::max(worst, std::abs(meas.data(static_cast<Index>(i), l) - g * y));
      }
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("unit phasor stays accurate for large products") {
  const double tau = 0.123456789;
  const double omega = 1.0e7 + 0.5;
  // Reference phase from an extended-precision product.
  const long double prod = static_cast<long double>(tau) * static_cast<long double>(omega);
  const long double frac = prod - std::floor(prod);
  const Complex want = std::polar(1.0, -2.0 * kPi * static_cast<double>(frac));
  CHECK(std::abs(unit_phasor(tau, omega) - want) < 1e-9);
  CHECK(std::abs(unit_phasor(0.25, 1.0) - Complex(0.0, -1.0)) < 1e-15);
}

TEST_CASE("awgn statistics and snr") {
  MeasurementSet m;
  m.frequencies = {0.0, 1.0};
  m.data = CMatrix::Constant(2, 20000, Complex(2.0, 0.0));
  CHECK(sigma_from_snr(m, 20.0) == doctest::Approx(std::sqrt(4.0 * 0.01)));
  CHECK(sigma_from_snr(m, std::numeric_limits<double>::infinity()) == 0.0);

  Rng rng(3);
  const MeasurementSet noisy = add_awgn(m, 0.5, rng);
  CHECK(noisy.noise_sigma == 0.5);
  const CMatrix e = noisy.data - m.data;
  const double power = e.squaredNorm() / static_cast<double>(e.size());
  CHECK(power == doctest::Approx(0.25).epsilon(0.03));
  CHECK(std::abs(e.mean()) < 0.01);

  Rng rng2(3);
  CHECK(add_awgn(m, 0.0, rng2).data == m.data);
  CHECK_THROWS_AS(add_awgn(m, -1.0, rng2), Error);

  MeasurementSet zero = m;
  zero.data.setZero();
  CHECK_THROWS_AS(sigma_from_snr(zero, 10.0), Error);
}

TEST_CASE("vandermonde entries") {
  const CMatrix phi = vandermonde({0.1, 0.4}, {0.0, 1.0, 2.0});
  CHECK(phi.rows() == 3);
  CHECK(phi.cols() == 2);
  CHECK(std::abs(phi(0, 0) - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(phi(2, 1) - std::exp(Complex(0.0, -2.0 * kPi * 0.8))) < 1e-14);
}
