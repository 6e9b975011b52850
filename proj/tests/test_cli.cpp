// End-to-end checks of the command-line tool: exit-code contract, output
// formats, byte-determinism, cache behavior, config precedence.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <cmath>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const char* cli = SHUBIN_CLI_PATH;

fs::path fresh_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("shubin_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  std::string cmd = std::string(cli) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("spectrum: outputs, exit 0, determinism, cache") {
  auto dir = fresh_dir("spectrum");
  std::string base = "spectrum --model 1,2,2 -J 64 --out " + dir.string();
  CHECK(run(base) == 0);
  CHECK(fs::exists(dir / "spectrum.csv"));
  CHECK(fs::exists(dir / "weyl.csv"));
  auto spec1 = slurp(dir / "spectrum.csv");
  auto weyl1 = slurp(dir / "weyl.csv");
  CHECK(spec1.rfind("j,lambda,residual\n", 0) == 0);

  // identical config -> byte-identical outputs (second run hits the cache)
  CHECK(run(base) == 0);
  CHECK(slurp(dir / "spectrum.csv") == spec1);
  CHECK(slurp(dir / "weyl.csv") == weyl1);
  CHECK(fs::exists(dir / "cache"));

  // and with the cache disabled, still byte-identical (fixed enumeration,
  // fixed sign convention, no time or seed dependence)
  auto dir2 = fresh_dir("spectrum2");
  std::string nb = "spectrum --model 1,2,2 -J 64 --no-cache --out " + dir2.string();
  CHECK(run(nb) == 0);
  CHECK(run(nb) == 0);
  CHECK(slurp(dir2 / "spectrum.csv") == spec1);
}

TEST_CASE("exit-code contract") {
  auto dir = fresh_dir("exits");
  // 2: ellipticity failure
  {
    std::ofstream f(dir / "bad.shubin");
    f << "shubin n=1 m=2 k=2\n"
         "term alpha=2 beta=0 re=1 im=0\n"
         "term alpha=0 beta=2 re=-1 im=0\n";
  }
  CHECK(run("spectrum --op " + (dir / "bad.shubin").string() + " --out " + dir.string()) == 2);
  CHECK(run("check --op " + (dir / "bad.shubin").string() + " --out " + dir.string()) == 2);

  // 3: convergence failure (cap too low for the requested trust)
  CHECK(run("spectrum --model 1,2,4 -J 128 --tol 1e-10 --cap 256 --no-cache --out " +
            dir.string()) == 3);

  // 4: insufficient data: a single injected coefficient with the iterate cap
  // below the Gevrey minimum starves all three routes
  {
    std::ofstream f(dir / "one.csv");
    f << "j,re,im\n1,1,0\n";
  }
  CHECK(run("classify --model 1,2,2 --fn coeffs:" + (dir / "one.csv").string() +
            " -J 12 --N 32 --Mmax 8 --no-cache --out " + dir.string()) == 4);

  // 1: everything else (parse errors, bad flags, missing operator)
  {
    std::ofstream f(dir / "broken.shubin");
    f << "shubin n=1 m=2 k=2\nterm alpha=oops beta=0 re=1 im=0\n";
  }
  CHECK(run("spectrum --op " + (dir / "broken.shubin").string() + " --out " + dir.string()) ==
        1);
  CHECK(run("spectrum --out " + dir.string()) == 1);  // no operator given

  // 0: success paths
  CHECK(run("check --model 1,2,2 --out " + dir.string()) == 0);
}

TEST_CASE("expand and iterate write their tables") {
  auto dir = fresh_dir("expand");
  CHECK(run("expand --model 1,2,2 --fn gaussian:1.0 -J 48 --out " + dir.string()) == 0);
  auto c = slurp(dir / "coefficients.csv");
  CHECK(c.rfind("j,re,im,abs\n", 0) == 0);
  // odd-mode coefficients of the even Gaussian vanish exactly
  std::istringstream in(c);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);  // j=1
  std::getline(in, line);  // j=2 (odd eigenfunction): vanishes to solver noise
  CHECK(line.rfind("2,", 0) == 0);
  {
    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 + 1);
    double re = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    CHECK(std::abs(re) < 1e-12);
  }

  CHECK(run("iterate --model 1,2,2 --fn eigen:1 -J 48 --Mmax 20 --out " + dir.string()) == 0);
  auto it = slurp(dir / "iterates.csv");
  CHECK(it.rfind("M,log_norm\n0,", 0) == 0);
  // ground state: log||P^M u|| = M log(lambda_1) with lambda_1 = 1 to rounding
  auto pos = it.rfind("\n20,");
  REQUIRE(pos != std::string::npos);
  CHECK(std::abs(std::stod(it.substr(pos + 4))) < 1e-12);
}

TEST_CASE("classify writes report and artifacts") {
  auto dir = fresh_dir("classify");
  CHECK(run("classify --model 1,2,2 --fn gaussian:1.0 -J 128 --out " + dir.string()) == 0);
  auto rep = slurp(dir / "classification.txt");
  CHECK(rep.find("t_hat=") != std::string::npos);
  CHECK(rep.find("mu_hat=") != std::string::npos);
  CHECK(rep.find("nu_hat=") != std::string::npos);
  CHECK(rep.find("route_iterates=") != std::string::npos);
  CHECK(rep.find("route_decay=") != std::string::npos);
  CHECK(rep.find("route_seminorms=") != std::string::npos);
  CHECK(rep.find("verdict=") != std::string::npos);
  CHECK(rep.find("space_kind_note=") != std::string::npos);
  CHECK(fs::exists(dir / "coefficients.csv"));
  CHECK(fs::exists(dir / "iterates.csv"));
}

TEST_CASE("config file, overridden by flags") {
  auto dir = fresh_dir("config");
  {
    std::ofstream f(dir / "run.conf");
    f << "model=1,2,2\neigs=32\nout=" << dir.string() << "\n";
  }
  CHECK(run("spectrum --config " + (dir / "run.conf").string()) == 0);
  auto s1 = slurp(dir / "spectrum.csv");
  // 32 trusted rows plus header
  CHECK(std::count(s1.begin(), s1.end(), '\n') == 33);

  // flag overrides the config value
  CHECK(run("spectrum --config " + (dir / "run.conf").string() + " -J 16 --no-cache") == 0);
  auto s2 = slurp(dir / "spectrum.csv");
  CHECK(std::count(s2.begin(), s2.end(), '\n') == 17);
}
