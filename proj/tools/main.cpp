// Command-line front end: spectra, Weyl fits, eigenfunction expansions and
// Gelfand-Shilov classification for anisotropic Shubin operators.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "shubin/classify.hpp"
#include "shubin/errors.hpp"
#include "shubin/expansion.hpp"
#include "shubin/fits.hpp"
#include "shubin/io.hpp"
#include "shubin/operator.hpp"
#include "shubin/spectral.hpp"

namespace fs = std::filesystem;
using namespace shubin;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string model;  // "n,m,k"
  std::string op_path;
  int J = 200;
  double tol = 1e-8;
  int N_override = 0;
  int pad_override = -1;
  int q_override = 0;
  int cap = 8192;
  std::string out = ".";
  std::string fn = "gaussian:1.0";
  int M_max = 100;
  std::string window;  // "lo:hi"
  double route_tol = 0.25;
  int grid = 64;
  bool no_cache = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_fn) {
  cmd->add_option("--model", o.model, "builtin model operator n,m,k");
  cmd->add_option("--op", o.op_path, "operator spec file");
  cmd->add_option("-J,--eigs", o.J, "number of eigenpairs to trust");
  cmd->add_option("--tol", o.tol, "relative eigenvalue drift tolerance for the study");
  cmd->add_option("--N", o.N_override, "fixed per-axis truncation (skips the study)");
  cmd->add_option("--pad", o.pad_override, "assembly padding override");
  cmd->add_option("--q", o.q_override, "quadrature node count override");
  cmd->add_option("--cap", o.cap, "truncation cap for the study");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--grid", o.grid, "ellipticity sampling grid");
  cmd->add_flag("--no-cache", o.no_cache, "ignore and do not write the spectrum cache");
  if (with_fn) {
    cmd->add_option("--fn", o.fn,
                    "function: gaussian:<a> | hermite:<i> | eigen:<j> | coeffs:<csv>");
    cmd->add_option("--Mmax", o.M_max, "iterate series cap");
    cmd->add_option("--route-tol", o.route_tol, "route agreement tolerance");
  }
  cmd->add_option("--window", o.window, "Weyl fit window lo:hi");
  cmd->add_option("--config", o.config_path, "key=value configuration file");
}

// Flat key=value config; values apply only where no flag was given
// (precedence: flags > config file > defaults).
void apply_config(CLI::App* cmd, CommonOpts& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) throw error("cannot open config file: " + o.config_path);
  std::string line;
  int lineno = 0;
  auto unset = [&](const std::string& flag) { return cmd->count(flag) == 0; };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
      line.pop_back();
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw parse_error("config line needs key=value", lineno);
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    try {
      if (key == "model" && unset("--model")) o.model = val;
      else if (key == "op" && unset("--op")) o.op_path = val;
      else if ((key == "J" || key == "eigs") && unset("-J")) o.J = std::stoi(val);
      else if (key == "tol" && unset("--tol")) o.tol = std::stod(val);
      else if (key == "N" && unset("--N")) o.N_override = std::stoi(val);
      else if (key == "pad" && unset("--pad")) o.pad_override = std::stoi(val);
      else if (key == "q" && unset("--q")) o.q_override = std::stoi(val);
      else if (key == "cap" && unset("--cap")) o.cap = std::stoi(val);
      else if (key == "out" && unset("--out")) o.out = val;
      else if (key == "grid" && unset("--grid")) o.grid = std::stoi(val);
      else if (key == "fn" && cmd->count("--fn") == 0) o.fn = val;
      else if (key == "Mmax" && cmd->count("--Mmax") == 0) o.M_max = std::stoi(val);
      else if (key == "window" && unset("--window")) o.window = val;
      else if (key == "route_tol" && cmd->count("--route-tol") == 0) o.route_tol = std::stod(val);
      else if (key == "no_cache") o.no_cache = o.no_cache || val == "true" || val == "1";
      // unknown keys are ignored so one file can serve several subcommands
    } catch (const std::invalid_argument&) {
      throw parse_error("bad value for config key '" + key + "'", lineno);
    }
  }
}

ShubinOperator resolve_operator(const CommonOpts& o) {
  if (!o.model.empty() && !o.op_path.empty())
    throw validation_error("give either --model or --op, not both");
  if (!o.model.empty()) {
    int n, m, k;
    if (std::sscanf(o.model.c_str(), "%d,%d,%d", &n, &m, &k) != 3)
      throw validation_error("--model expects n,m,k");
    return model_operator(n, m, k);
  }
  if (!o.op_path.empty()) return load_operator_file(o.op_path);
  throw validation_error("an operator is required (--model or --op)");
}

void gate_elliptic(const ShubinOperator& op, int grid) {
  auto rep = ellipticity_check(op, grid);
  if (rep.verdict != EllipticityVerdict::Elliptic) {
    std::ostringstream os;
    os << (rep.verdict == EllipticityVerdict::Inconclusive
               ? "ellipticity inconclusive"
               : "operator not elliptic")
       << ": min symbol modulus " << rep.min_modulus << " at x=(";
    for (int d = 0; d < rep.witness.x.size(); ++d) os << (d ? "," : "") << rep.witness.x(d);
    os << ") xi=(";
    for (int d = 0; d < rep.witness.xi.size(); ++d)
      os << (d ? "," : "") << rep.witness.xi(d);
    os << ")";
    std::vector<double> wx(rep.witness.x.data(), rep.witness.x.data() + rep.witness.x.size());
    std::vector<double> wxi(rep.witness.xi.data(),
                            rep.witness.xi.data() + rep.witness.xi.size());
    throw ellipticity_error(os.str(), wx, wxi);
  }
}

SpectralDecomposition spectrum_for(const ShubinOperator& op, const CommonOpts& o) {
  fs::path cache_dir = fs::path(o.out) / "cache";
  fs::path cache_file = cache_dir / cache_key(operator_hash(op), o.J, o.tol, o.N_override);
  if (!o.no_cache) {
    if (auto cached = load_decomposition(cache_file)) {
      if (cached->J_trusted >= o.J) return *cached;
    }
  }

  gate_elliptic(op, o.grid);
  SpectralDecomposition dec;
  if (o.N_override > 0) {
    int pad = o.pad_override >= 0 ? o.pad_override : op.max_axis_order();
    dec = eigendecompose(assemble(op, BasisSpec(op.n, o.N_override, pad)), o.J, o.tol);
  } else {
    ConvergenceOptions copt;
    copt.tol = o.tol;
    copt.cap_N = o.cap;
    auto [spec, d] = convergence_study(op, o.J, copt);
    dec = std::move(d);
  }
  if (!o.no_cache) save_decomposition(cache_file, dec);
  return dec;
}

std::pair<int, int> weyl_window(const CommonOpts& o, const SpectralDecomposition& dec) {
  if (!o.window.empty()) {
    int lo, hi;
    if (std::sscanf(o.window.c_str(), "%d:%d", &lo, &hi) != 2)
      throw validation_error("--window expects lo:hi");
    return {lo, hi};
  }
  int lo = std::max(1, dec.J_trusted / 8);
  int hi = std::max(lo + 9, (3 * dec.J_trusted) / 4);
  return {lo, std::min(hi, dec.J_trusted)};
}

QuadratureRule rule_for(const CommonOpts& o, const BasisSpec& spec) {
  int q = o.q_override > 0 ? o.q_override : 2 * spec.N + 64;
  q = std::min(q, 10000);
  return gauss_hermite_rule(q);
}

struct FunctionChoice {
  ExpansionCoefficients coeffs;
  VectorXcd u_hermite;
};

FunctionChoice build_function(const std::string& fn, const ShubinOperator& op,
                              const SpectralDecomposition& dec, const CommonOpts& o) {
  auto colon = fn.find(':');
  std::string kind = fn.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : fn.substr(colon + 1);
  FunctionChoice out;

  if (kind == "gaussian") {
    double a = arg.empty() ? 1.0 : std::stod(arg);
    if (!(a > 0)) throw validation_error("gaussian:<a> needs a > 0");
    SampledFunction u;
    u.evaluator = [a](const VectorXd& x) { return cxd(std::exp(-a * x.squaredNorm()), 0.0); };
    u.symmetry_hint.assign(static_cast<size_t>(op.n), +1);
    auto rule = rule_for(o, dec.spec);
    bool relax = rule.nodes.size() < 2L * dec.spec.N;
    out.coeffs = expand(u, dec, rule, relax);
    out.u_hermite = project_hermite(u, dec.spec, rule);
    return out;
  }
  if (kind == "hermite") {
    long i = std::stol(arg);
    if (i < 0 || i >= dec.spec.total()) throw validation_error("hermite:<i> outside the basis");
    out.u_hermite = VectorXcd::Zero(dec.spec.total());
    out.u_hermite(i) = 1.0;
    out.coeffs.values =
        dec.eigenvectors.leftCols(dec.J_trusted).transpose().cast<cxd>() * out.u_hermite;
    out.coeffs.dec_signature = dec.signature;
    return out;
  }
  if (kind == "eigen") {
    long j = std::stol(arg);
    if (j < 1 || j > dec.J_trusted)
      throw validation_error("eigen:<j> outside the trusted range");
    out.coeffs.values = VectorXcd::Zero(dec.J_trusted);
    out.coeffs.values(j - 1) = 1.0;
    out.coeffs.dec_signature = dec.signature;
    out.u_hermite = dec.eigenvectors.col(j - 1).cast<cxd>();
    return out;
  }
  if (kind == "coeffs") {
    std::ifstream in(arg);
    if (!in) throw error("cannot open coefficients file: " + arg);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto parsed = parse_coefficients_csv(ss.str());
    if (parsed.count() > dec.J_trusted)
      throw validation_error("injected coefficients exceed the trusted range");
    out.coeffs.values = VectorXcd::Zero(dec.J_trusted);
    out.coeffs.values.head(parsed.count()) = parsed.values;
    out.coeffs.dec_signature = dec.signature;
    out.u_hermite = dec.eigenvectors.leftCols(dec.J_trusted).cast<cxd>() * out.coeffs.values;
    return out;
  }
  throw validation_error("unknown --fn kind: " + kind);
}

int cmd_spectrum(const CommonOpts& o) {
  auto op = resolve_operator(o);
  auto dec = spectrum_for(op, o);
  auto [lo, hi] = weyl_window(o, dec);
  auto fit = weyl_fit(dec, lo, hi, op.n, op.m, op.k);
  atomic_write(fs::path(o.out) / "spectrum.csv", spectrum_csv(dec));
  atomic_write(fs::path(o.out) / "weyl.csv", weyl_csv(fit));
  std::cout << "trusted " << dec.J_trusted << " eigenvalues at N = " << dec.spec.N
            << "; exponent_hat = " << fit.exponent_hat << " (theory "
            << fit.exponent_theory << ")\n";
  return 0;
}

int cmd_classify(const CommonOpts& o) {
  auto op = resolve_operator(o);
  auto dec = spectrum_for(op, o);
  auto f = build_function(o.fn, op, dec, o);

  ClassifyConfig cfg;
  cfg.route_tol = o.route_tol;
  cfg.M_cap = o.M_max;
  auto g = classify(dec, f.coeffs, f.u_hermite, op.n, op.m, op.k, cfg);

  atomic_write(fs::path(o.out) / "classification.txt", format_classification(g));
  atomic_write(fs::path(o.out) / "coefficients.csv", coefficients_csv(f.coeffs));
  if (g.iterates) atomic_write(fs::path(o.out) / "iterates.csv", iterates_csv(*g.iterates));
  std::cout << format_classification(g);
  return 0;
}

int cmd_check(const CommonOpts& o) {
  auto op = resolve_operator(o);
  std::ostringstream rep;
  bool hard_fail = false;
  bool elliptic_fail = false;

  auto row = [&rep](const std::string& name, bool pass, const std::string& detail) {
    rep << (pass ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) rep << ": " << detail;
    rep << "\n";
  };

  auto erep = ellipticity_check(op, o.grid);
  {
    std::ostringstream d;
    d << "min modulus " << erep.min_modulus << ", ratio bounds [" << erep.ratio_lower
      << ", " << erep.ratio_upper << "]";
    bool ok = erep.verdict == EllipticityVerdict::Elliptic;
    row("ellipticity", ok, d.str());
    if (!ok) {
      elliptic_fail = true;
      hard_fail = true;
    }
  }

  int N = o.N_override > 0 ? o.N_override : 64;
  int pad = o.pad_override >= 0 ? o.pad_override : op.max_axis_order();
  try {
    auto A = assemble(op, BasisSpec(op.n, N, pad));
    row("assembly", true,
        "hermitian defect " + format_double(A.hermitian_defect) + " at N " +
            std::to_string(N));
  } catch (const error& e) {
    row("assembly", false, e.what());
    hard_fail = true;
  }

  if (!elliptic_fail) {
    try {
      long total = BasisSpec(op.n, N, 0).total();
      auto suite =
          detail::random_unit_suite(20, static_cast<int>(std::min<long>(48, total)),
                                    total, 0x5eedULL);
      auto est = elliptic_estimate_check(op, suite, BasisSpec(op.n, N, pad));
      std::vector<VectorXcd> wide;
      for (const auto& u : suite) {
        VectorXcd w = VectorXcd::Zero(BasisSpec(op.n, 2 * N, 0).total());
        if (op.n == 1) {
          w.head(u.size()) = u;
        } else {
          IndexMap small(op.n, N), big(op.n, 2 * N);
          for (long fidx = 0; fidx < small.size(); ++fidx)
            w(big.flat(small.multi(fidx))) = u(fidx);
        }
        wide.push_back(std::move(w));
      }
      auto est2 = elliptic_estimate_check(op, wide, BasisSpec(op.n, 2 * N, pad));
      double drift =
          std::abs(est2.C_empirical - est.C_empirical) / std::max(est.C_empirical, 1e-300);
      std::ostringstream d;
      d << "C_empirical " << est.C_empirical << ", drift under doubling "
        << format_double(drift);
      bool ok = std::isfinite(est.C_empirical) && drift <= 0.05;
      row("elliptic estimate", ok, d.str());
      if (!ok) hard_fail = true;
    } catch (const error& e) {
      row("elliptic estimate", false, e.what());
      hard_fail = true;
    }
  }

  {
    auto rule = gauss_hermite_rule(96);
    bool ok = std::abs(rule.weights.sum() - std::sqrt(M_PI)) <= 1e-12 * std::sqrt(M_PI);
    row("quadrature weights sum", ok, "");
    if (!ok) hard_fail = true;

    auto rule64 = gauss_hermite_rule(64);
    MatrixXd E = hermite_eval_matrix(64, rule64.nodes);
    MatrixXd G = E.transpose() * rule64.total_weights.asDiagonal() * E;
    double gerr = (G - MatrixXd::Identity(64, 64)).cwiseAbs().maxCoeff();
    ok = gerr < 1e-10;
    row("orthonormality", ok, "Gram deviation " + format_double(gerr));
    if (!ok) hard_fail = true;

    auto X = position_matrix(34).to_dense();
    auto D = derivative_matrix(34).to_dense();
    Eigen::MatrixXcd comm = (D * X - X * D).topLeftCorner(31, 31) +
                            cxd(0.0, 1.0) * Eigen::MatrixXcd::Identity(31, 31);
    double cerr = comm.cwiseAbs().maxCoeff();
    ok = cerr < 1e-12;
    row("commutator [D,x] = -iI", ok, "deviation " + format_double(cerr));
    if (!ok) hard_fail = true;
  }

  std::string report = rep.str();
  atomic_write(fs::path(o.out) / "check_report.txt", report);
  std::cout << report;
  if (elliptic_fail) {
    std::vector<double> wx(erep.witness.x.data(),
                           erep.witness.x.data() + erep.witness.x.size());
    std::vector<double> wxi(erep.witness.xi.data(),
                            erep.witness.xi.data() + erep.witness.xi.size());
    throw ellipticity_error("check: ellipticity failed", wx, wxi);
  }
  return hard_fail ? 1 : 0;
}

int cmd_expand(const CommonOpts& o) {
  auto op = resolve_operator(o);
  auto dec = spectrum_for(op, o);
  auto f = build_function(o.fn, op, dec, o);
  atomic_write(fs::path(o.out) / "coefficients.csv", coefficients_csv(f.coeffs));
  std::cout << "wrote " << f.coeffs.count() << " coefficients (tail mass "
            << f.coeffs.tail_mass << ")\n";
  return 0;
}

int cmd_iterate(const CommonOpts& o) {
  auto op = resolve_operator(o);
  auto dec = spectrum_for(op, o);
  auto f = build_function(o.fn, op, dec, o);
  auto series = iterate_norms(dec, f.coeffs, o.M_max, op.n, op.m, op.k);
  atomic_write(fs::path(o.out) / "iterates.csv", iterates_csv(series));
  std::cout << "wrote log norms for M = 0.." << series.M_max << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral toolkit for anisotropic Shubin operators in the Hermite basis"};
  app.require_subcommand(1);

  CommonOpts so, co, ko, eo, io_;
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and Weyl-law fit");
  add_common(spectrum, so, false);
  auto* classify_cmd =
      app.add_subcommand("classify", "three-route Gelfand-Shilov classification");
  add_common(classify_cmd, co, true);
  auto* check = app.add_subcommand("check", "ellipticity, a-priori estimate and invariants");
  add_common(check, ko, false);
  auto* expand_cmd = app.add_subcommand("expand", "eigen-coefficients of a function");
  add_common(expand_cmd, eo, true);
  auto* iterate = app.add_subcommand("iterate", "log iterate norms of a function");
  add_common(iterate, io_, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (spectrum->parsed()) { apply_config(spectrum, so); return cmd_spectrum(so); }
    if (classify_cmd->parsed()) { apply_config(classify_cmd, co); return cmd_classify(co); }
    if (check->parsed()) { apply_config(check, ko); return cmd_check(ko); }
    if (expand_cmd->parsed()) { apply_config(expand_cmd, eo); return cmd_expand(eo); }
    if (iterate->parsed()) { apply_config(iterate, io_); return cmd_iterate(io_); }
  } catch (const ellipticity_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const convergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const insufficient_data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
