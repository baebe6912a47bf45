#include <doctest.h>

#include "generators.hpp"
#include "pulse_esprit/error.hpp"
#include "pulse_esprit/subspace.hpp"

using namespace pulse_esprit;

namespace {

// Spectral norm of the projector difference, formed explicitly.
double projector_distance(const CMatrix& a, const CMatrix& b) {
  const CMatrix d = a * a.adjoint() - b * b.adjoint();
  return Eigen::JacobiSVD<CMatrix>(d).singularValues()(0);
}

}  // namespace

TEST_CASE("empirical covariance is the snapshot average") {
  Rng rng(1);
  MeasurementSet m;
  m.frequencies = {0.0, 1.0, 2.0};
  m.data = gen::gaussian_matrix(rng, 3, 7);
  const CMatrix r = empirical_covariance(m);
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 3; ++j) {
      Complex acc = 0.0;
      for (Index l = 0; l < 7; ++l) acc += m.data(i, l) * std::conj(m.data(j, l));
      CHECK(std::abs(r(i, j) - acc / 7.0) < 1e-14);
    }
  }
  CHECK((r - r.adjoint()).norm() == 0.0);
}

TEST_CASE("signal subspace of a planted covariance") {
  Rng rng(2);
  const CMatrix q = gen::orthonormal(rng, 8, 8);
  RVector lam(8);
  lam << 9, 7, 5, 0.3, 0.2, 0.1, 0.05, 0.01;
  const CMatrix cov = q * lam.cast<Complex>().asDiagonal() * q.adjoint();
  const SubspaceEstimate est = signal_subspace(cov, 3);
  REQUIRE(est.basis.cols() == 3);
  CHECK((est.basis.adjoint() * est.basis - CMatrix::Identity(3, 3)).norm() < 1e-12);
  CHECK(est.eigenvalues(0) == doctest::Approx(9.0));
  CHECK(est.eigenvalues(2) == doctest::Approx(5.0));
  for (Index i = 1; i < est.eigenvalues.size(); ++i) CHECK(est.eigenvalues(i) <= est.eigenvalues(i - 1));
  CHECK(subspace_distance(est.basis, q.leftCols(3)) < 1e-12);
  CHECK_THROWS_AS(signal_subspace(cov, 9), Error);
  CHECK_THROWS_AS(signal_subspace(CMatrix(3, 4), 1), Error);
}

TEST_CASE("oracle subspace spans G Phi") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Index S = gen::integer(rng, 1, 6);
    const auto tau = gen::separated_locations(rng, S, 0.05, 1.0);
    std::vector<double> freqs;
    for (int m = 0; m < 24; ++m) freqs.push_back(m);
    const CMatrix phi = vandermonde(tau, freqs);
    const CVector g = sample_gains(gen::cos2(gen::uniform(rng, 0.9, 1.5)), freqs);
    const SubspaceEstimate u = oracle_subspace(g, phi);
    const CMatrix gphi = g.asDiagonal() * phi;
    // Projecting G Phi on U loses nothing.
    CHECK((gphi - u.basis * (u.basis.adjoint() * gphi)).norm() < 1e-10 * gphi.norm());
    CHECK((u.basis.adjoint() * u.basis - CMatrix::Identity(S, S)).norm() < 1e-12);
  }
  const CMatrix rank1 = vandermonde({0.1, 0.1 + 1e-15}, {0.0, 1.0, 2.0});
  CHECK_THROWS_AS(oracle_subspace(CVector::Ones(3), rank1), Error);
}

TEST_CASE("subspace distance equals the projector formula") {
  Rng rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = gen::integer(rng, 2, 12);
    const Index s = gen::integer(rng, 1, n);
    const CMatrix a = gen::orthonormal(rng, n, s);
    CMatrix b = gen::orthonormal(rng, n, s);
    if (rep % 3 == 0) {
      // Small perturbations exercise the regime the bounds care about.
      Eigen::HouseholderQR<CMatrix> qr(a + 1e-3 * gen::gaussian_matrix(rng, n, s));
      b = qr.householderQ() * CMatrix::Identity(n, s);
    }
    const double d = subspace_distance(a, b);
    CHECK(d == doctest::Approx(projector_distance(a, b)).epsilon(1e-9));
    CHECK(d >= 0.0);
    CHECK(d <= 1.0 + 1e-12);
    CHECK(d == doctest::Approx(subspace_distance(b, a)).epsilon(1e-9));
  }
}

TEST_CASE("subspace distance ignores the choice of basis") {
  Rng rng(5);
  const CMatrix a = gen::orthonormal(rng, 10, 4);
  const CMatrix r = gen::orthonormal(rng, 4, 4);
  CHECK(subspace_distance(a * r, a) < 1e-14);
  CHECK_THROWS_AS(subspace_distance(a, a.leftCols(3)), Error);
}
