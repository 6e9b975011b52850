#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "shubin/errors.hpp"
#include "shubin/hermite.hpp"

using namespace shubin;

namespace {

// Quadrature inner product of raw sampled functions (independent oracle path).
double quad_ip(const QuadratureRule& rule, const VectorXd& fa, const VectorXd& fb) {
  return (rule.total_weights.array() * fa.array() * fb.array()).sum();
}

}  // namespace

TEST_CASE("hermite_eval low-order closed forms") {
  auto h1 = hermite_eval(1, 0.0);
  CHECK(h1.values(0) == doctest::Approx(std::pow(M_PI, -0.25)).epsilon(1e-15));

  auto h2 = hermite_eval(2, 0.0);
  CHECK(h2.values(1) == 0.0);  // h_1 is odd

  // h_2(x) = pi^{-1/4} (2x^2 - 1)/sqrt(2) e^{-x^2/2}
  auto h3 = hermite_eval(3, 1.0);
  double expect = std::pow(M_PI, -0.25) * (2.0 - 1.0) / std::sqrt(2.0) * std::exp(-0.5);
  CHECK(h3.values(2) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("hermite_eval input validation and range guard") {
  CHECK_THROWS_AS(hermite_eval(4, std::nan("")), domain_error);
  CHECK_THROWS_AS(hermite_eval(0, 1.0), validation_error);

  // e^{-x^2/2} underflows at x = 50 for the low modes: exact zeros plus flag.
  auto far = hermite_eval(4, 50.0);
  CHECK(far.underflow_guarded);
  for (int i = 0; i < 4; ++i) CHECK(far.values(i) == 0.0);

  // Deep basis at x = 40: high modes live beyond the turning point and must
  // come out finite and nonzero.
  auto deep = hermite_eval(4096, 40.0);
  CHECK(deep.values.allFinite());
  CHECK(deep.values.cwiseAbs().maxCoeff() > 1e-8);

  // Spot-check a recovered value against the recurrence run in long double.
  {
    int N = 2048;
    double x = 30.0;
    long double p = std::pow((long double)M_PI, -0.25L) * std::exp(-0.5L * x * x);
    long double c = std::sqrt(2.0L) * x * p;
    for (int j = 1; j + 1 < N; ++j) {
      long double nxt = std::sqrt(2.0L / (j + 1)) * x * c -
                        std::sqrt((long double)j / (j + 1)) * p;
      p = c;
      c = nxt;
    }
    auto got = hermite_eval(N, x);
    CHECK(got.values(N - 1) ==
          doctest::Approx(static_cast<double>(c)).epsilon(1e-10));
  }
}

TEST_CASE("gauss_hermite_rule exactness") {
  auto r1 = gauss_hermite_rule(1);
  CHECK(r1.nodes(0) == 0.0);
  CHECK(r1.weights(0) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-15));

  // Analytic Gaussian moment: integral of x^2 e^{-x^2} = sqrt(pi)/2.
  auto r2 = gauss_hermite_rule(2);
  double m2 = (r2.weights.array() * r2.nodes.array().square()).sum();
  CHECK(m2 == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-14));

  for (int q : {3, 8, 33}) {
    auto r = gauss_hermite_rule(q);
    double odd1 = (r.weights.array() * r.nodes.array()).sum();
    double odd3 = (r.weights.array() * r.nodes.array().cube()).sum();
    CHECK(std::abs(odd1) < 1e-14);
    CHECK(std::abs(odd3) < 1e-13);
    CHECK(r.weights.sum() == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
    // node symmetry about 0
    for (int i = 0; i < q / 2; ++i)
      CHECK(r.nodes(i) == doctest::Approx(-r.nodes(q - 1 - i)).epsilon(1e-13));
  }

  // weights sum at large q (underflowed far-tail weights are harmless zeros)
  auto big = gauss_hermite_rule(2048);
  CHECK(big.weights.sum() == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));

  CHECK_THROWS_AS(gauss_hermite_rule(10001), capability_error);
  CHECK_THROWS_AS(gauss_hermite_rule(0), validation_error);
}

TEST_CASE("orthonormality: quadrature Gram is the identity") {
  for (int N : {64, 512}) {
    auto rule = gauss_hermite_rule(N);
    MatrixXd E = hermite_eval_matrix(N, rule.nodes);  // q x N
    MatrixXd G = E.transpose() * rule.total_weights.asDiagonal() * E;
    double err = (G - MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff();
    CHECK(err < 1e-10);
  }
}

TEST_CASE("position_matrix entries and quadrature oracle") {
  auto X2 = position_matrix(2);
  auto D2 = X2.to_dense();
  CHECK(D2(0, 1).real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(D2(0, 1) == D2(1, 0));  // symmetric

  int N = 64;
  auto X = position_matrix(N).to_dense();
  CHECK((X - X.transpose()).cwiseAbs().maxCoeff() == 0.0);

  auto rule = gauss_hermite_rule(2 * N);
  MatrixXd E = hermite_eval_matrix(N, rule.nodes);
  VectorXd xh4 = rule.nodes.array() * E.col(4).array();
  double ip = quad_ip(rule, E.col(3), xh4);
  CHECK(ip == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(X(3, 4).real() == doctest::Approx(ip).epsilon(1e-12));
}

TEST_CASE("derivative_matrix: Hermitian, entry signs, quadrature oracle") {
  auto D = derivative_matrix(2).to_dense();
  CHECK(D(1, 0).real() == 0.0);
  CHECK(D(0, 1).real() == 0.0);
  CHECK(D(1, 0).imag() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(D(0, 1).imag() == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(D(0, 1) == std::conj(D(1, 0)));

  int N = 64;
  auto Dn = derivative_matrix(N).to_dense();
  CHECK((Dn - Dn.adjoint()).cwiseAbs().maxCoeff() == 0.0);  // exact by construction

  // D^2 = -d^2/dx^2: <h_i, -h_j''> = integral h_i' h_j' (by parts), with h'
  // evaluated through the analytic recurrence at quadrature nodes.
  auto rule = gauss_hermite_rule(2 * N + 8);
  MatrixXd E = hermite_eval_matrix(N + 1, rule.nodes);
  MatrixXd Ep(rule.nodes.size(), N);  // h_j'(x_a)
  for (int j = 0; j < N; ++j) {
    VectorXd lower = j >= 1 ? VectorXd(E.col(j - 1)) : VectorXd(VectorXd::Zero(rule.nodes.size()));
    Ep.col(j) = std::sqrt(j / 2.0) * lower - std::sqrt((j + 1) / 2.0) * E.col(j + 1);
  }
  Eigen::MatrixXcd Dsq = (derivative_matrix(N + 2).to_dense() *
                          derivative_matrix(N + 2).to_dense())
                             .topLeftCorner(N, N);
  for (int i = 0; i < N - 2; ++i)
    for (int j = 0; j < N - 2; ++j) {
      double oracle = quad_ip(rule, Ep.col(i), Ep.col(j));
      CHECK(std::abs(Dsq(i, j) - cxd(oracle, 0.0)) < 1e-10);
    }
}

TEST_CASE("recurrence consistency between evaluation and position matrix") {
  int N = 48;
  auto Xd = position_matrix(N + 1).to_dense();
  for (double x : {-3.7, -0.4, 0.9, 2.25}) {
    auto h = hermite_eval(N + 1, x);
    for (int i = 1; i < N; ++i) {
      double lhs = x * h.values(i);
      double rhs = Xd(i, i - 1).real() * h.values(i - 1) + Xd(i, i + 1).real() * h.values(i + 1);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("monomial_matrix: x^2 equals squared position matrix") {
  BasisSpec spec(1, 16, 2);
  auto M = monomial_matrix(MultiIndex{0}, MultiIndex{2}, spec).to_dense();
  // oracle: build X at padded truncation, square, crop
  auto Xp = position_matrix(18).to_dense();
  Eigen::MatrixXcd oracle = (Xp * Xp).topLeftCorner(16, 16);
  CHECK((M - oracle).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("monomial_matrix: D^2 diagonal is i + 1/2") {
  BasisSpec spec(1, 12, 2);
  auto M = monomial_matrix(MultiIndex{2}, MultiIndex{0}, spec).to_dense();
  for (int i = 0; i < 12; ++i) {
    CHECK(M(i, i).real() == doctest::Approx(i + 0.5).epsilon(1e-15));
    CHECK(M(i, i).imag() == 0.0);
  }
}

TEST_CASE("monomial_matrix: empty monomial in 2-D is the identity") {
  BasisSpec spec(2, 6, 0);
  auto M = monomial_matrix(MultiIndex{0, 0}, MultiIndex{0, 0}, spec).to_dense();
  CHECK((M - Eigen::MatrixXcd::Identity(36, 36)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("monomial_matrix rejects insufficient pad") {
  BasisSpec spec(1, 16, 1);
  CHECK_THROWS_AS(monomial_matrix(MultiIndex{2}, MultiIndex{0}, spec), truncation_error);
  CHECK_THROWS_AS(monomial_matrix(MultiIndex{1}, MultiIndex{1}, spec), truncation_error);
}

TEST_CASE("commutator [D, x] = -i I on the interior block") {
  int N = 32;
  BasisSpec spec(1, N, 2);
  // products at padded truncation, cropped: Dx and xD
  auto X = position_matrix(N + 2).to_dense();
  auto D = derivative_matrix(N + 2).to_dense();
  Eigen::MatrixXcd comm = (D * X - X * D).topLeftCorner(N - 1, N - 1);
  Eigen::MatrixXcd expect = cxd(0.0, -1.0) * Eigen::MatrixXcd::Identity(N - 1, N - 1);
  // entries are products of once-rounded square roots: zero up to a few ulps of i
  CHECK((comm - expect).cwiseAbs().maxCoeff() < 16 * N * 2.22e-16);
}

TEST_CASE("parity: entries vanish exactly when i + j + |alpha| + |beta| is odd") {
  BasisSpec spec(1, 20, 4);
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {1, 0}, {2, 1}, {1, 2}, {2, 2}}) {
    auto M = monomial_matrix(MultiIndex{a}, MultiIndex{b}, spec).to_dense();
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j)
        if ((i + j + a + b) % 2 == 1) CHECK(std::abs(M(i, j)) == 0.0);
  }
}
