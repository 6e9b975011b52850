#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "../core/src/eigensolve_internal.hpp"
#include "shubin/errors.hpp"
#include "shubin/operator.hpp"
#include "shubin/spectral.hpp"

using namespace shubin;

namespace {

ExpansionCoefficients coeffs_on(const SpectralDecomposition& dec, const VectorXcd& v) {
  ExpansionCoefficients c;
  c.values = v;
  c.dec_signature = dec.signature;
  return c;
}

}  // namespace

TEST_CASE("eigendecompose: harmonic oscillator eigenvalues are 2j-1") {
  auto A = assemble(model_operator(1, 2, 2), BasisSpec(1, 64, 2));
  auto dec = eigendecompose(A, 10, 1e-10);
  REQUIRE(dec.J_trusted == 10);
  for (int j = 1; j <= 10; ++j)
    CHECK(std::abs(dec.lambda(j) - (2.0 * j - 1.0)) <= 1e-12 * (2.0 * j - 1.0));
  // orthonormality of trusted vectors
  MatrixXd G = dec.eigenvectors.transpose() * dec.eigenvectors;
  CHECK((G - MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("eigendecompose: identity operator gives unit eigenvalues") {
  ShubinOperator id(1, 2, 2, {{MultiIndex{0}, MultiIndex{0}, cxd(1.0, 0.0)}});
  auto A = assemble(id, BasisSpec(1, 32, 0));
  auto dec = eigendecompose(A, 8, 1e-10);
  CHECK(dec.J_trusted == 8);
  for (int j = 1; j <= 8; ++j) CHECK(dec.lambda(j) == doctest::Approx(1.0).epsilon(1e-12));
  MatrixXd G = dec.eigenvectors.transpose() * dec.eigenvectors;
  CHECK((G - MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("eigendecompose: guards") {
  auto A = assemble(model_operator(1, 2, 2), BasisSpec(1, 16, 2));
  CHECK_THROWS_AS(eigendecompose(A, 17, 1e-10), capability_error);
  CHECK_THROWS_AS(eigendecompose(A, 0, 1e-10), validation_error);

  auto bad = A;
  bad.hermitian_defect = 1.0;
  CHECK_THROWS_AS(eigendecompose(bad, 4, 1e-10), error);

  // Not formally self-adjoint: the recorded defect is order one.
  ShubinOperator xd(1, 2, 2, {{MultiIndex{1}, MultiIndex{1}, cxd(1.0, 0.0)}});
  auto C = assemble(xd, BasisSpec(1, 16, 2));
  CHECK(C.hermitian_defect > 0.9);
  CHECK_THROWS_AS(eigendecompose(C, 4, 1e-10), error);

  // Hermitian but genuinely complex (xD - i/2): out of the spectral path's scope.
  ShubinOperator xdh(1, 2, 2,
                     {{MultiIndex{1}, MultiIndex{1}, cxd(1.0, 0.0)},
                      {MultiIndex{0}, MultiIndex{0}, cxd(0.0, -0.5)}});
  auto CH = assemble(xdh, BasisSpec(1, 16, 2));
  CHECK(CH.hermitian_defect <= 1e-12);
  CHECK_THROWS_AS(eigendecompose(CH, 4, 1e-10), capability_error);
}

TEST_CASE("banded and dense eigensolvers agree on the quartic oscillator") {
  auto A = assemble(model_operator(1, 2, 4), BasisSpec(1, 192, 4));
  auto banded = eigendecompose(A, 12, 1e-9);
  auto dense = detail::dense_lowest(A.to_dense().real(), 12);
  for (int j = 0; j < 12; ++j)
    CHECK(banded.eigenvalues(j) == doctest::Approx(dense.values(j)).epsilon(1e-10));
  // vectors agree up to sign
  for (int j = 0; j < 12; ++j) {
    double dot = std::abs(banded.eigenvectors.col(j).dot(dense.vectors.col(j)));
    CHECK(dot == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("quartic ground state matches the high-truncation reference") {
  // Reference run first (oracle), then the desk-scale solve.
  auto ref = eigendecompose(assemble(model_operator(1, 2, 4), BasisSpec(1, 2048, 4)), 1,
                            1e-9);
  auto dec = eigendecompose(assemble(model_operator(1, 2, 4), BasisSpec(1, 512, 4)), 1,
                            1e-9);
  CHECK(dec.lambda(1) == doctest::Approx(ref.lambda(1)).epsilon(1e-10));
  CHECK(std::abs(dec.lambda(1) - 1.0603620904) < 1e-8);
}

TEST_CASE("2-D harmonic oscillator spectrum through the dense path") {
  auto A = assemble(model_operator(2, 2, 2), BasisSpec(2, 8, 2));  // size 64 -> dense
  auto dec = eigendecompose(A, 20, 1e-10);
  // sorted eigenvalues of 2(i1+i2)+2 over the 8x8 box
  std::vector<double> expect;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) expect.push_back(2.0 * (i + j) + 2.0);
  std::sort(expect.begin(), expect.end());
  for (int j = 0; j < 20; ++j)
    CHECK(dec.eigenvalues(j) == doctest::Approx(expect[static_cast<size_t>(j)]).epsilon(1e-12));
}

TEST_CASE("2-D filtered subspace path matches the exact degenerate spectrum") {
  auto A = assemble(model_operator(2, 2, 2), BasisSpec(2, 50, 2));  // size 2500 -> filtered
  auto dec = eigendecompose(A, 60, 1e-8);
  REQUIRE(dec.J_trusted >= 60);
  std::vector<double> expect;
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) expect.push_back(2.0 * (i + j) + 2.0);
  std::sort(expect.begin(), expect.end());
  for (int j = 0; j < 60; ++j)
    CHECK(dec.eigenvalues(j) == doctest::Approx(expect[static_cast<size_t>(j)]).epsilon(1e-9));
  MatrixXd G = dec.eigenvectors.transpose() * dec.eigenvectors;
  CHECK((G - MatrixXd::Identity(60, 60)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("convergence_study: harmonic terminates fast, non-elliptic is rejected") {
  ConvergenceOptions opt;
  opt.tol = 1e-10;
  auto [spec, dec] = convergence_study(model_operator(1, 2, 2), 20, opt);
  CHECK(dec.J_trusted == 20);
  CHECK(spec.N <= 128);
  for (int j = 1; j <= 20; ++j)
    CHECK(dec.lambda(j) == doctest::Approx(2.0 * j - 1.0).epsilon(1e-12));

  ShubinOperator bad(1, 2, 2,
                     {{MultiIndex{2}, MultiIndex{0}, cxd(1, 0)},
                      {MultiIndex{0}, MultiIndex{2}, cxd(-1, 0)}});
  CHECK_THROWS_AS(convergence_study(bad, 10, opt), ellipticity_error);
}

TEST_CASE("convergence_study: quartic stabilizes and the cap error carries spectra") {
  ConvergenceOptions opt;
  opt.tol = 1e-8;
  auto [spec, dec] = convergence_study(model_operator(1, 2, 4), 50, opt);
  CHECK(dec.J_trusted == 50);
  CHECK(dec.lambda(1) == doctest::Approx(1.0603620904).epsilon(1e-9));

  ConvergenceOptions tight;
  tight.tol = 1e-10;
  tight.cap_N = 128;
  try {
    convergence_study(model_operator(1, 2, 4), 100, tight);
    CHECK(false);
  } catch (const convergence_error& e) {
    CHECK(e.spectrum_last.size() == 100);
  }
}

TEST_CASE("eigenvalue monotonicity under truncation nesting") {
  auto op = model_operator(1, 2, 4);
  auto d1 = eigendecompose(assemble(op, BasisSpec(1, 128, 4)), 30, 1e-9);
  auto d2 = eigendecompose(assemble(op, BasisSpec(1, 256, 4)), 30, 1e-9);
  auto d3 = eigendecompose(assemble(op, BasisSpec(1, 512, 4)), 30, 1e-9);
  // slack: the spec's 1e-12 relative plus the solver's backward-error floor
  auto slack = [](double lam, int N) {
    return 1e-12 * std::abs(lam) + 64 * 2.22e-16 * (1.5 * N * N);
  };
  for (int j = 0; j < 30; ++j) {
    CHECK(d2.eigenvalues(j) <= d1.eigenvalues(j) + slack(d1.eigenvalues(j), 256));
    CHECK(d3.eigenvalues(j) <= d2.eigenvalues(j) + slack(d2.eigenvalues(j), 512));
  }
}

TEST_CASE("weyl_fit: harmonic oscillator exponent 1") {
  auto A = assemble(model_operator(1, 2, 2), BasisSpec(1, 512, 2));
  auto dec = eigendecompose(A, 460, 1e-8);
  REQUIRE(dec.J_trusted >= 450);
  auto fit = weyl_fit(dec, 50, 400, 1, 2, 2);
  CHECK(fit.exponent_theory == doctest::Approx(1.0));
  CHECK(std::abs(fit.exponent_hat - 1.0) < 0.01);
  CHECK(fit.prefactor_hat > 0.0);

  // window stability: translate by 25% of its length
  auto fit2 = weyl_fit(dec, 50 + 87, 400 + 50, 1, 2, 2);
  CHECK(std::abs(fit2.exponent_hat - fit.exponent_hat) < 0.02);

  CHECK_THROWS_AS(weyl_fit(dec, 1, 5, 1, 2, 2), validation_error);
  CHECK_THROWS_AS(weyl_fit(dec, 400, 461, 1, 2, 2), validation_error);
}

TEST_CASE("weyl_fit rejects nonpositive eigenvalues") {
  SpectralDecomposition dec;
  dec.spec = BasisSpec(1, 32, 0);
  dec.eigenvalues = VectorXd::LinSpaced(32, -1.0, 30.0);
  dec.eigenvectors = MatrixXd::Identity(32, 32);
  dec.residuals = VectorXd::Zero(32);
  dec.J_trusted = 32;
  CHECK_THROWS_AS(weyl_fit(dec, 1, 20, 1, 2, 2), domain_error);
}

TEST_CASE("spectral_power: identity, eigenvector scaling, semigroup") {
  auto A = assemble(model_operator(1, 2, 2), BasisSpec(1, 64, 2));
  auto dec = eigendecompose(A, 20, 1e-10);

  VectorXcd e1 = VectorXcd::Zero(20);
  e1(0) = 1.0;
  auto c = coeffs_on(dec, e1);

  auto p0 = spectral_power(dec, 0.0, c);
  CHECK((p0.values - c.values).norm() == 0.0);

  auto p1 = spectral_power(dec, 1.0, c);
  CHECK(std::abs(p1.values(0) - cxd(dec.lambda(1), 0.0)) < 1e-14);

  VectorXcd mixed(20);
  for (int j = 0; j < 20; ++j) mixed(j) = cxd(1.0 / (1.0 + j), 0.5 / (1.0 + j));
  auto cm = coeffs_on(dec, mixed);
  auto half_twice = spectral_power(dec, 0.5, spectral_power(dec, 0.5, cm));
  auto whole = spectral_power(dec, 1.0, cm);
  CHECK((half_twice.values - whole.values).norm() <= 1e-12 * whole.values.norm());

  // support beyond trusted range
  SpectralDecomposition chopped = dec;
  chopped.J_trusted = 10;
  CHECK_THROWS_AS(spectral_power(chopped, 1.0, cm), truncation_error);

  // signature mismatch
  auto other = eigendecompose(assemble(model_operator(1, 2, 4), BasisSpec(1, 64, 4)), 20, 1e-9);
  CHECK_THROWS_AS(spectral_power(other, 1.0, cm), validation_error);
}

TEST_CASE("sobolev_norm: plain L2 at s=0, single mode, direct-sum oracle") {
  auto A = assemble(model_operator(1, 2, 2), BasisSpec(1, 128, 2));
  auto dec = eigendecompose(A, 100, 1e-10);

  VectorXcd u(100);
  for (int j = 0; j < 100; ++j) u(j) = 1.0 / ((j + 1.0) * (j + 1.0));
  auto c = coeffs_on(dec, u);

  CHECK(sobolev_norm(dec, c, 0.0, 2, 2) == doctest::Approx(u.norm()).epsilon(1e-14));

  VectorXcd e1 = VectorXcd::Zero(100);
  e1(0) = 1.0;
  auto ce = coeffs_on(dec, e1);
  for (double s : {1.0, 2.0, 3.5})
    CHECK(sobolev_norm(dec, ce, s, 2, 2) ==
          doctest::Approx(std::pow(dec.lambda(1), s / 2.0)).epsilon(1e-13));

  // independent direct summation with the known lambda_j = 2j-1
  double direct = 0.0;
  for (int j = 1; j <= 100; ++j)
    direct += std::pow(2.0 * j - 1.0, 2.0 * (1.0 / 2.0)) * std::norm(u(j - 1));
  direct = std::sqrt(direct);
  CHECK(sobolev_norm(dec, c, 1.0, 2, 2) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("schwartz_test: synthetic decay profiles") {
  auto A = assemble(model_operator(1, 2, 2), BasisSpec(1, 128, 2));
  auto dec = eigendecompose(A, 120, 1e-10);

  VectorXcd fast(120), slow(120);
  for (int j = 1; j <= 120; ++j) {
    fast(j - 1) = std::exp(-static_cast<double>(j));
    slow(j - 1) = 1.0 / (static_cast<double>(j) * j);
  }
  auto rf = schwartz_test(dec, coeffs_on(dec, fast), 8);
  CHECK(rf.consistent);

  auto rs = schwartz_test(dec, coeffs_on(dec, slow), 3);
  CHECK_FALSE(rs.consistent);
  CHECK(rs.growth_slopes[2] > 0.15);   // s = 3: sup grows through the window
  CHECK(rs.growth_slopes[1] <= 0.15);  // s = 2 is still bounded
  CHECK(rs.fitted_decay_order == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("Parseval: orthonormal change of basis preserves the norm") {
  auto A = assemble(model_operator(1, 2, 4), BasisSpec(1, 96, 4));
  auto dec = eigendecompose(A, 96, 1e-9);
  REQUIRE(dec.J_trusted >= 90);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    VectorXd h(96);
    for (int i = 0; i < 96; ++i) h(i) = g(rng);
    // u in the trusted span
    VectorXd u_span = dec.eigenvectors.leftCols(dec.J_trusted) *
                      (dec.eigenvectors.leftCols(dec.J_trusted).transpose() * h);
    VectorXd u_eig = dec.eigenvectors.leftCols(dec.J_trusted).transpose() * u_span;
    CHECK(u_eig.squaredNorm() ==
          doctest::Approx(u_span.squaredNorm()).epsilon(1e-12));
  }
}
