#include "shubin/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "eigensolve_internal.hpp"
#include "shubin/errors.hpp"
#include "shubin/fits.hpp"

namespace shubin {

namespace {

constexpr double kEps = 2.220446049250313e-16;

void fix_signs(MatrixXd& V) {
  for (Eigen::Index c = 0; c < V.cols(); ++c) {
    Eigen::Index imax = 0;
    double best = 0.0;
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
      double a = std::abs(V(i, c));
      if (a > best) {
        best = a;
        imax = i;
      }
    }
    if (V(imax, c) < 0.0) V.col(c) = -V.col(c);
  }
}

std::uint64_t decomposition_signature(const SpectralDecomposition& dec) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* ptr, size_t len) {
    const unsigned char* b = static_cast<const unsigned char*>(ptr);
    for (size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  int meta[4] = {dec.spec.n, dec.spec.N, dec.spec.pad, dec.count()};
  mix(meta, sizeof meta);
  if (dec.count() > 0) {
    double ends[2] = {dec.eigenvalues(0), dec.eigenvalues(dec.count() - 1)};
    mix(ends, sizeof ends);
  }
  return h;
}

}  // namespace

SpectralDecomposition eigendecompose(const BandedOperatorMatrix& A, int J, double tol) {
  const long size = A.size();
  if (J < 1) throw validation_error("eigendecompose: J must be >= 1");
  if (J > size) throw capability_error("eigendecompose: J exceeds basis size");
  // Relative gate: accumulation rounding in banded products grows with the
  // entry scale, so the absolute defect is meaningless for large truncations.
  if (A.hermitian_defect > 1e-10 * std::max(1.0, A.entries.max_abs()))
    throw error("eigendecompose: Hermitian defect " + std::to_string(A.hermitian_defect) +
                " exceeds 1e-10 relative to the matrix scale");
  if (!A.effectively_real(1e-10))
    throw capability_error(
        "eigendecompose: matrix has non-negligible imaginary parts; only real "
        "symmetric spectra are supported (normal operators are out of scope)");

  const double anorm = A.entries.inf_norm();
  detail::RawEig raw;
  if (A.truncation.n == 1) {
    raw = detail::banded_lowest(A.real_lower_band(), J);
  } else if (size <= 2048) {
    raw = detail::dense_lowest(A.to_dense().real(), J);
  } else {
    // the per-j certificate is tol*max(1, lambda_j) + 64 eps ||A||; aim below it
    double target = 0.5 * (tol + 64 * kEps * anorm);
    raw = detail::sparse_filtered_lowest(A.entries, J, target);
  }

  fix_signs(raw.vectors);

  SpectralDecomposition dec;
  dec.spec = A.truncation;
  dec.eigenvalues = std::move(raw.values);
  dec.eigenvectors = std::move(raw.vectors);
  dec.residuals = VectorXd(J);
  for (int j = 0; j < J; ++j) {
    VectorXcd v = dec.eigenvectors.col(j).cast<cxd>();
    VectorXcd r = A.entries.apply(v) - cxd(dec.eigenvalues(j), 0.0) * v;
    dec.residuals(j) = r.norm();
  }

  // Certificate: tol * max(1, lambda) plus the backward-stability floor.
  dec.J_trusted = 0;
  for (int j = 0; j < J; ++j) {
    double bound = tol * std::max(1.0, std::abs(dec.eigenvalues(j))) + 64 * kEps * anorm;
    if (dec.residuals(j) <= bound)
      dec.J_trusted = j + 1;
    else
      break;
  }
  dec.signature = decomposition_signature(dec);
  return dec;
}

std::pair<BasisSpec, SpectralDecomposition> convergence_study(
    const ShubinOperator& op, int J, const ConvergenceOptions& opt) {
  if (opt.tol <= 0) throw validation_error("convergence_study: tol must be > 0");
  EllipticityReport rep = ellipticity_check(op, 64);
  if (rep.verdict != EllipticityVerdict::Elliptic) {
    std::vector<double> wx(rep.witness.x.data(), rep.witness.x.data() + rep.witness.x.size());
    std::vector<double> wxi(rep.witness.xi.data(),
                            rep.witness.xi.data() + rep.witness.xi.size());
    throw ellipticity_error(
        "convergence_study: operator not certified elliptic (min modulus " +
            std::to_string(rep.min_modulus) + ")",
        wx, wxi);
  }

  const int pad = op.max_axis_order();
  const int cap = op.n == 1 ? opt.cap_N : opt.cap_N_2d;

  int N = std::max(2, opt.start_N);
  auto total = [&](int Nv) { return op.n == 1 ? static_cast<long>(Nv) : static_cast<long>(Nv) * Nv; };
  while (total(N) < J + 8 && N < cap) N *= 2;
  if (total(N) < J + 8)
    throw capability_error("convergence_study: requested J exceeds the truncation cap");

  auto solve_at = [&](int Nv) {
    BandedOperatorMatrix A = assemble(op, BasisSpec(op.n, Nv, pad));
    return eigendecompose(A, J, opt.residual_tol);
  };

  SpectralDecomposition prev = solve_at(N);
  while (true) {
    if (2L * N > cap) {
      std::vector<double> last(prev.eigenvalues.data(), prev.eigenvalues.data() + prev.count());
      throw convergence_error("convergence_study: truncation cap " + std::to_string(cap) +
                                  " reached before eigenvalues stabilized",
                              last, last);
    }
    int N2 = 2 * N;
    SpectralDecomposition next = solve_at(N2);
    if (prev.J_trusted >= J && next.J_trusted >= J) {
      double drift = 0.0;
      for (int j = 0; j < J; ++j) {
        double denom = std::max(std::abs(next.eigenvalues(j)), 1e-300);
        drift = std::max(drift, std::abs(prev.eigenvalues(j) - next.eigenvalues(j)) / denom);
      }
      if (drift <= opt.tol) {
        next.J_trusted = J;
        return {next.spec, std::move(next)};
      }
    }
    prev = std::move(next);
    N = N2;
  }
}

WeylFit weyl_fit(const SpectralDecomposition& dec, int window_lo, int window_hi,
                 int n, int m, int k) {
  if (window_lo < 1 || window_hi > dec.J_trusted)
    throw validation_error("weyl_fit: window outside the trusted range");
  if (window_hi - window_lo + 1 < 10)
    throw validation_error("weyl_fit: window shorter than 10");

  const int len = window_hi - window_lo + 1;
  MatrixXd X(len, 2);
  VectorXd y(len);
  for (int i = 0; i < len; ++i) {
    int j = window_lo + i;  // 1-based
    double lam = dec.eigenvalues(j - 1);
    if (lam <= 0.0)
      throw domain_error("weyl_fit: nonpositive eigenvalue in window (positivity violated)");
    X(i, 0) = 1.0;
    X(i, 1) = std::log(static_cast<double>(j));
    y(i) = std::log(lam);
  }
  double rms = 0.0;
  VectorXd b = detail::least_squares(X, y, &rms);

  WeylFit fit;
  fit.exponent_hat = b(1);
  fit.prefactor_hat = std::exp(b(0));
  fit.exponent_theory =
      static_cast<double>(m) * k / (static_cast<double>(n) * (m + k));
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  fit.residual = rms;
  return fit;
}

WeylFit weyl_fit(const SpectralDecomposition& dec, int n, int m, int k) {
  int lo = std::max(1, dec.J_trusted / 8);
  int hi = std::max(lo + 9, (3 * dec.J_trusted) / 4);
  hi = std::min(hi, dec.J_trusted);
  return weyl_fit(dec, lo, hi, n, m, k);
}

ExpansionCoefficients spectral_power(const SpectralDecomposition& dec, double r,
                                     const ExpansionCoefficients& u) {
  if (u.dec_signature != dec.signature)
    throw validation_error("spectral_power: coefficients from a different decomposition");
  if (u.count() > dec.J_trusted)
    throw truncation_error("spectral_power: support beyond the trusted range");
  ExpansionCoefficients out = u;
  if (r == 0.0) return out;
  for (int j = 0; j < u.count(); ++j) {
    double lam = dec.eigenvalues(j);
    if (lam <= 0.0) throw domain_error("spectral_power: nonpositive eigenvalue");
    out.values(j) = std::pow(lam, r) * u.values(j);
  }
  return out;
}

double sobolev_norm(const SpectralDecomposition& dec, const ExpansionCoefficients& u,
                    double s, int m, int k) {
  double r = s / static_cast<double>(std::max(m, k));
  // ||P^{s/max(m,k)} u||; the statement-level weight lambda^{s/max} defines the
  // same space with squared exponent halved.
  ExpansionCoefficients p = spectral_power(dec, r, u);
  return p.values.norm();
}

SchwartzReport schwartz_test(const SpectralDecomposition& dec,
                             const ExpansionCoefficients& u, int s_max) {
  if (dec.J_trusted < 30)
    throw insufficient_data_error("schwartz_test: trusted range shorter than 30",
                                  dec.J_trusted);
  if (s_max < 1) throw validation_error("schwartz_test: s_max must be >= 1");

  const int top = std::min(u.count(), dec.J_trusted) - 5;  // pollution guard
  double floor = 0.0;
  for (int j = 0; j < u.count(); ++j) floor = std::max(floor, std::abs(u.values(j)));
  floor *= 1e-15;

  std::vector<double> logj, logu;
  for (int j = 1; j <= top; ++j) {
    double a = std::abs(u.values(j - 1));
    if (a > floor) {
      logj.push_back(std::log(static_cast<double>(j)));
      logu.push_back(std::log(a));
    }
  }
  SchwartzReport rep;
  rep.usable = static_cast<int>(logj.size());
  if (rep.usable < 10)
    throw insufficient_data_error("schwartz_test: too few usable coefficients", rep.usable);

  MatrixXd X(rep.usable, 2);
  VectorXd y(rep.usable);
  for (int i = 0; i < rep.usable; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = logj[static_cast<size_t>(i)];
    y(i) = logu[static_cast<size_t>(i)];
  }
  VectorXd b = detail::least_squares(X, y, nullptr);
  rep.fitted_decay_order = -b(1);

  // sup_j j^s |u_j| bounded: the sup over the window's last quarter must not
  // exceed the sup over the rest (a global log-log slope would misjudge
  // super-polynomial decay, whose local slope keeps steepening).
  constexpr double kSupMargin = 0.15;
  const size_t split = logj.size() - logj.size() / 4;
  rep.consistent = true;
  for (int s = 1; s <= s_max; ++s) {
    double head = -std::numeric_limits<double>::infinity();
    double tail = head;
    for (size_t i = 0; i < logj.size(); ++i) {
      double a = s * logj[i] + logu[i];
      (i < split ? head : tail) = std::max(i < split ? head : tail, a);
    }
    double gap = tail - head;
    rep.growth_slopes.push_back(gap);
    if (gap > kSupMargin) rep.consistent = false;
  }
  return rep;
}

}  // namespace shubin
