#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shubin/io.hpp"
#include "shubin/operator.hpp"

using namespace shubin;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto p = fs::temp_directory_path() / "shubin_io_test";
  fs::create_directories(p);
  return p;
}

SpectralDecomposition small_dec() {
  auto A = assemble(model_operator(1, 2, 2), BasisSpec(1, 16, 2));
  return eigendecompose(A, 8, 1e-10);
}

}  // namespace

TEST_CASE("atomic_write leaves no temp files and round-trips content") {
  auto dir = temp_dir();
  auto file = dir / "x.csv";
  atomic_write(file, "a,b\n1,2\n");
  std::ifstream in(file);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(s == "a,b\n1,2\n");
  int leftovers = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().string().find(".tmp.") != std::string::npos) ++leftovers;
  CHECK(leftovers == 0);
  atomic_write(file, "c\n");  // overwrite is atomic too
  std::ifstream in2(file);
  std::string s2((std::istreambuf_iterator<char>(in2)), std::istreambuf_iterator<char>());
  CHECK(s2 == "c\n");
}

TEST_CASE("CSV bodies carry headers, LF endings, 1-based indices") {
  auto dec = small_dec();
  auto s = spectrum_csv(dec);
  CHECK(s.rfind("j,lambda,residual\n", 0) == 0);
  CHECK(s.find("\r") == std::string::npos);
  // lambda_1 = 1 for the oscillator (up to assembly rounding)
  std::istringstream sin(s);
  std::string line;
  std::getline(sin, line);
  std::getline(sin, line);
  CHECK(line.rfind("1,1", 0) == 0);
  CHECK(std::abs(std::stod(line.substr(2)) - 1.0) < 1e-13);

  WeylFit fit;
  fit.exponent_hat = 1.25;
  fit.prefactor_hat = 2.0;
  fit.exponent_theory = 4.0 / 3.0;
  fit.window_lo = 50;
  fit.window_hi = 400;
  fit.residual = 0.01;
  auto w = weyl_csv(fit);
  CHECK(w.rfind("exponent_hat,prefactor_hat,exponent_theory,window_lo,window_hi,residual\n",
                0) == 0);
  CHECK(w.find("1.25,2,") != std::string::npos);

  ExpansionCoefficients c;
  c.values = VectorXcd(2);
  c.values << cxd(1.0, -2.0), cxd(0.5, 0.0);
  auto cs = coefficients_csv(c);
  CHECK(cs == "j,re,im,abs\n1,1,-2," + format_double(std::sqrt(5.0)) + "\n2,0.5,0,0.5\n");

  IterateSeries it;
  it.M_max = 2;
  it.log_norms = VectorXd(3);
  it.log_norms << 0.0, 1.5, 3.0;
  CHECK(iterates_csv(it) == "M,log_norm\n0,0\n1,1.5\n2,3\n");
}

TEST_CASE("coefficients CSV parse round-trip and validation") {
  ExpansionCoefficients c;
  c.values = VectorXcd(3);
  c.values << cxd(0.1, 0.2), cxd(-3.5e-7, 0.0), cxd(1.0 / 3.0, -2.0 / 7.0);
  auto parsed = parse_coefficients_csv(coefficients_csv(c));
  REQUIRE(parsed.count() == 3);
  for (int j = 0; j < 3; ++j) CHECK(parsed.values(j) == c.values(j));  // %.17g round-trips

  CHECK_THROWS_AS(parse_coefficients_csv(""), parse_error);
  CHECK_THROWS_AS(parse_coefficients_csv("j,re,im\n2,1,0\n"), parse_error);  // gap
  CHECK_THROWS_AS(parse_coefficients_csv("j,re,im\n1,x,0\n"), parse_error);
}

TEST_CASE("decomposition cache round-trip, corrupt file reads as absent") {
  auto dir = temp_dir();
  auto dec = small_dec();
  auto file = dir / cache_key(0xabcdefULL, 8, 1e-10, 0);
  save_decomposition(file, dec);
  auto back = load_decomposition(file);
  REQUIRE(back.has_value());
  CHECK(back->J_trusted == dec.J_trusted);
  CHECK(back->signature == dec.signature);
  CHECK((back->eigenvalues - dec.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back->eigenvectors - dec.eigenvectors).cwiseAbs().maxCoeff() == 0.0);

  atomic_write(dir / "corrupt.bin", "BOGUS");
  CHECK_FALSE(load_decomposition(dir / "corrupt.bin").has_value());
  CHECK_FALSE(load_decomposition(dir / "missing.bin").has_value());

  CHECK(cache_key(1, 2, 1e-8, 0) != cache_key(1, 3, 1e-8, 0));
  CHECK(cache_key(1, 2, 1e-8, 0) != cache_key(2, 2, 1e-8, 0));
}
