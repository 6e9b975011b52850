#include "shubin/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shubin/errors.hpp"
#include "shubin/fits.hpp"

namespace shubin {

namespace {

long gcd_l(long a, long b) { return b == 0 ? a : gcd_l(b, a % b); }
long lcm_l(long a, long b) { return a / gcd_l(a, b) * b; }

}  // namespace

VectorXcd project_hermite(const SampledFunction& u, const BasisSpec& spec,
                          const QuadratureRule& rule) {
  if (!u.evaluator) throw validation_error("project_hermite: empty evaluator");
  const int q = static_cast<int>(rule.nodes.size());
  const int N = spec.N;

  auto check_finite = [](cxd v) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw domain_error("project_hermite: nonfinite evaluator value at a quadrature node");
    return v;
  };

  if (spec.n == 1) {
    // streamed over nodes: no q x N matrix at large truncations
    VectorXcd c = VectorXcd::Zero(N);
    VectorXd pt(1);
    for (int a = 0; a < q; ++a) {
      pt(0) = rule.nodes(a);
      cxd w = check_finite(u.evaluator(pt)) * rule.total_weights(a);
      if (w == cxd(0.0, 0.0)) continue;
      VectorXd h = hermite_eval(N, rule.nodes(a)).values;
      c += w * h.cast<cxd>();
    }
    if (!u.symmetry_hint.empty() && u.symmetry_hint[0] != 0) {
      for (int i = 0; i < N; ++i)
        if ((i % 2 == 0) != (u.symmetry_hint[0] > 0)) c(i) = cxd(0.0, 0.0);
    }
    return c;
  }
  MatrixXd E = hermite_eval_matrix(N, rule.nodes);  // q x N

  // n = 2, tensorized: C[i1,i2] = sum_{a,b} W_a W_b u(x_a, x_b) h_{i1}(x_a) h_{i2}(x_b)
  Eigen::MatrixXcd U(q, q);
  VectorXd pt(2);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) {
      pt(0) = rule.nodes(a);
      pt(1) = rule.nodes(b);
      U(a, b) = check_finite(u.evaluator(pt)) * rule.total_weights(a) * rule.total_weights(b);
    }
  Eigen::MatrixXcd C = E.transpose().cast<cxd>() * U * E.cast<cxd>();  // N x N

  IndexMap map(2, N);
  VectorXcd c(map.size());
  for (long f = 0; f < map.size(); ++f) {
    const auto& mi = map.multi(f);
    cxd v = C(mi[0], mi[1]);
    for (int d = 0; d < 2; ++d)
      if (d < static_cast<int>(u.symmetry_hint.size()) && u.symmetry_hint[static_cast<size_t>(d)] != 0 &&
          (mi[static_cast<size_t>(d)] % 2 == 0) != (u.symmetry_hint[static_cast<size_t>(d)] > 0))
        v = cxd(0.0, 0.0);
    c(f) = v;
  }
  return c;
}

ExpansionCoefficients expand(const SampledFunction& u, const SpectralDecomposition& dec,
                             const QuadratureRule& rule, bool relax_rule) {
  if (!relax_rule && rule.nodes.size() < 2L * dec.spec.N)
    throw validation_error(
        "expand: quadrature rule carries fewer than 2x the per-axis basis size "
        "(pass relax_rule to override)");

  VectorXcd c_hermite = project_hermite(u, dec.spec, rule);

  ExpansionCoefficients out;
  out.dec_signature = dec.signature;
  out.values = dec.eigenvectors.leftCols(dec.J_trusted).transpose().cast<cxd>() * c_hermite;

  // ||u||^2 by the same quadrature, for the tail mass.
  const int q = static_cast<int>(rule.nodes.size());
  double norm2 = 0.0;
  VectorXd pt(dec.spec.n);
  if (dec.spec.n == 1) {
    for (int a = 0; a < q; ++a) {
      pt(0) = rule.nodes(a);
      norm2 += rule.total_weights(a) * std::norm(u.evaluator(pt));
    }
  } else {
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) {
        pt(0) = rule.nodes(a);
        pt(1) = rule.nodes(b);
        norm2 += rule.total_weights(a) * rule.total_weights(b) * std::norm(u.evaluator(pt));
      }
  }
  if (norm2 > 0.0) {
    double captured = out.values.squaredNorm();
    out.tail_mass = std::clamp(1.0 - captured / norm2, 0.0, 1.0);
  }
  return out;
}

cxd reconstruct(const ExpansionCoefficients& c, const SpectralDecomposition& dec,
                const VectorXd& x) {
  if (c.dec_signature != dec.signature)
    throw validation_error("reconstruct: coefficients from a different decomposition");
  for (int d = 0; d < x.size(); ++d)
    if (!std::isfinite(x(d))) throw domain_error("reconstruct: nonfinite point");

  const int N = dec.spec.N;
  VectorXd hx;
  if (dec.spec.n == 1) {
    hx = hermite_eval(N, x(0)).values;
  } else {
    VectorXd h1 = hermite_eval(N, x(0)).values;
    VectorXd h2 = hermite_eval(N, x(1)).values;
    IndexMap map(2, N);
    hx = VectorXd(map.size());
    for (long f = 0; f < map.size(); ++f) {
      const auto& mi = map.multi(f);
      hx(f) = h1(mi[0]) * h2(mi[1]);
    }
  }
  VectorXcd phi_at_x =
      dec.eigenvectors.leftCols(std::min<int>(c.count(), dec.J_trusted)).transpose().cast<cxd>() *
      hx.cast<cxd>();
  cxd acc(0.0, 0.0);
  for (int j = 0; j < std::min<int>(c.count(), dec.J_trusted); ++j)
    acc += c.values(j) * phi_at_x(j);
  return acc;
}

IterateSeries iterate_norms(const SpectralDecomposition& dec,
                            const ExpansionCoefficients& c, int M_max,
                            int n, int m, int k) {
  if (M_max < 1) throw validation_error("iterate_norms: M_max must be >= 1");
  if (c.dec_signature != dec.signature)
    throw validation_error("iterate_norms: coefficients from a different decomposition");
  const int J = std::min<int>(c.count(), dec.J_trusted);

  std::vector<double> log_lam, log_u;
  for (int j = 0; j < J; ++j) {
    double a = std::abs(c.values(j));
    if (a == 0.0) continue;  // zero coefficients skipped
    double lam = dec.eigenvalues(j);
    if (lam <= 0.0) throw domain_error("iterate_norms: nonpositive eigenvalue");
    log_lam.push_back(std::log(lam));
    log_u.push_back(std::log(a));
  }
  if (log_lam.empty()) throw degenerate_input_error("iterate_norms: all coefficients zero");

  IterateSeries s;
  s.M_max = M_max;
  s.n = n;
  s.m = m;
  s.k = k;
  s.log_norms = VectorXd(M_max + 1);
  VectorXd terms(static_cast<Eigen::Index>(log_lam.size()));
  for (int M = 0; M <= M_max; ++M) {
    for (size_t i = 0; i < log_lam.size(); ++i)
      terms(static_cast<Eigen::Index>(i)) = 2.0 * M * log_lam[i] + 2.0 * log_u[i];
    s.log_norms(M) = 0.5 * detail::log_sum_exp(terms);
  }
  return s;
}

GevreyFit gevrey_fit(const IterateSeries& series) {
  if (series.M_max < 10) throw validation_error("gevrey_fit: M_max must be >= 10");
  const int lo = std::max(1, series.M_max / 4);
  const int hi = series.M_max;
  const int len = hi - lo + 1;

  MatrixXd X(len, 3);
  VectorXd y(len);
  for (int i = 0; i < len; ++i) {
    int M = lo + i;
    X(i, 0) = 1.0;
    X(i, 1) = static_cast<double>(M);
    X(i, 2) = std::lgamma(static_cast<double>(M) + 1.0);  // log M!
    y(i) = series.log_norms(M);
  }
  double rms = 0.0;
  VectorXd b = detail::least_squares(X, y, &rms);

  GevreyFit fit;
  fit.logR_hat = b(0);
  fit.logC_hat = b(1);
  fit.theta_hat = b(2);
  fit.residual = rms;
  fit.window_lo = lo;
  fit.window_hi = hi;
  // Gelfand-Shilov classes below t = 1 are empty; km/(k+m) is the smallest
  // admissible Gevrey exponent for this operator family.
  double floor_theta = static_cast<double>(series.k) * series.m / (series.k + series.m);
  fit.theta_admissible = std::max(fit.theta_hat, floor_theta);
  fit.clamped = fit.theta_hat < floor_theta;
  return fit;
}

namespace {

struct DecaySamples {
  std::vector<double> j;       // 1-based indices as doubles
  std::vector<double> log_u;   // log |u_j|
  int lo = 0, hi = 0;
  int above_floor = 0;  // count before the window drop; the precondition gate
};

DecaySamples usable_decay_samples(const ExpansionCoefficients& c, int J_trusted) {
  double peak = 0.0;
  for (int j = 0; j < c.count(); ++j) peak = std::max(peak, std::abs(c.values(j)));
  const double floor = 1e-15 * peak;
  // window top: trusted range less the pollution guard, and nothing past the
  // decaying-signal extent (the near-floor noise plateau is not data)
  const int top = std::min(static_cast<long>(std::min(c.count(), J_trusted) - 5),
                           detail::signal_extent(c.values));
  DecaySamples s;
  for (int j = 1; j <= top; ++j) {
    double a = std::abs(c.values(j - 1));
    if (a <= floor || a == 0.0) continue;
    ++s.above_floor;
    if (j >= 11) {  // first 10 indices are pre-asymptotic
      if (s.lo == 0) s.lo = j;
      s.hi = j;
      s.j.push_back(static_cast<double>(j));
      s.log_u.push_back(std::log(a));
    }
  }
  return s;
}

// RMS residual of the affine fit log|u_j| ~ logC - eps j^theta at fixed theta.
double decay_profile_rms(const DecaySamples& s, double theta, double* eps_out,
                         double* logC_out) {
  const int len = static_cast<int>(s.j.size());
  MatrixXd X(len, 2);
  VectorXd y(len);
  for (int i = 0; i < len; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = -std::pow(s.j[static_cast<size_t>(i)], theta);
    y(i) = s.log_u[static_cast<size_t>(i)];
  }
  double rms = 0.0;
  VectorXd b = detail::least_squares(X, y, &rms);
  if (eps_out) *eps_out = b(1);
  if (logC_out) *logC_out = b(0);
  return rms;
}

}  // namespace

DecayFit coefficient_decay_fit(const ExpansionCoefficients& c,
                               const SpectralDecomposition& dec, int n, int m, int k) {
  DecaySamples s = usable_decay_samples(c, dec.J_trusted);
  const int len = static_cast<int>(s.j.size());
  if (s.above_floor < 30)
    throw insufficient_data_error("coefficient_decay_fit: fewer than 30 usable coefficients",
                                  s.above_floor);
  if (len < 8)
    throw insufficient_data_error("coefficient_decay_fit: fit window too short", len);

  // Stage (a): theta from log(-log(|u_j|/C0)) vs log j with C0 = e * max|u_j|.
  double log_c0 = *std::max_element(s.log_u.begin(), s.log_u.end()) + 1.0;
  MatrixXd Xa(len, 2);
  VectorXd ya(len);
  for (int i = 0; i < len; ++i) {
    Xa(i, 0) = 1.0;
    Xa(i, 1) = std::log(s.j[static_cast<size_t>(i)]);
    ya(i) = std::log(log_c0 - s.log_u[static_cast<size_t>(i)]);
  }
  VectorXd ba = detail::least_squares(Xa, ya, nullptr);
  double theta = std::clamp(ba(1), 0.05, 3.0);

  // Stage (b) + golden-section polish of theta against the profile RMS.
  double glo = std::max(0.05, theta * 0.4), ghi = std::min(3.0, theta * 2.5);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = glo, b = ghi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = decay_profile_rms(s, x1, nullptr, nullptr);
  double f2 = decay_profile_rms(s, x2, nullptr, nullptr);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = decay_profile_rms(s, x1, nullptr, nullptr);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = decay_profile_rms(s, x2, nullptr, nullptr);
    }
    if (b - a < 1e-6) break;
  }
  theta = 0.5 * (a + b);

  DecayFit fit;
  fit.residual = decay_profile_rms(s, theta, &fit.epsilon_hat, &fit.logC_hat);
  fit.theta_hat = theta;
  fit.window_lo = s.lo;
  fit.window_hi = s.hi;
  fit.usable = len;
  fit.t_hat = 1.0 / (n * theta);

  // Corroborating summability statistics with the lambda-based exponent
  // lambda_j^{(k+m)/(km t_hat)}; epsilon rescaled through the Weyl prefactor
  // lambda_j ~ C j^{mk/(n(m+k))} so the two exponents share a scale.
  double expo = (k + m) / (static_cast<double>(k) * m * fit.t_hat);
  double Cw = 0.0;
  {
    int mid = std::max(1, dec.J_trusted / 2);
    Cw = dec.eigenvalues(mid - 1) /
         std::pow(static_cast<double>(mid),
                  static_cast<double>(m) * k / (static_cast<double>(n) * (m + k)));
    if (!(Cw > 0.0) || !std::isfinite(Cw)) Cw = 1.0;
  }
  double eps2 = fit.epsilon_hat / std::pow(Cw, expo);
  double sum_stat = 0.0, sup_stat = 0.0;
  for (int j = 1; j <= std::min(c.count(), dec.J_trusted); ++j) {
    double lam = dec.eigenvalues(j - 1);
    if (lam <= 0.0) continue;
    double term = std::norm(c.values(j - 1)) * std::exp(eps2 * std::pow(lam, expo));
    sum_stat += term;
    sup_stat = std::max(sup_stat, term);
  }
  fit.lambda_sum_stat = sum_stat;
  fit.lambda_sup_stat = sup_stat;
  return fit;
}

std::vector<std::pair<MultiIndex, MultiIndex>> seminorm_level_set(int n, int m, int k,
                                                                  Rational r) {
  if (r.den <= 0 || r.num < 0) throw validation_error("seminorm order must be >= 0");
  // |alpha|/m + |beta|/k = r  <=>  |alpha| k den + |beta| m den = num m k
  const long rhs = r.num * m * k;
  const long ca = static_cast<long>(k) * r.den, cb = static_cast<long>(m) * r.den;
  std::vector<std::pair<int, int>> totals;  // (|alpha|, |beta|)
  for (long A = 0; A * ca <= rhs; ++A) {
    long rem = rhs - A * ca;
    if (rem % cb == 0) totals.emplace_back(static_cast<int>(A), static_cast<int>(rem / cb));
  }
  if (totals.empty())
    throw level_set_error("seminorm: order " + std::to_string(r.num) + "/" +
                          std::to_string(r.den) + " has an empty level set");

  std::vector<std::pair<MultiIndex, MultiIndex>> out;
  auto spread = [n](int total) {
    std::vector<std::vector<int>> combos;
    if (n == 1) {
      combos.push_back({total});
    } else {
      for (int a = 0; a <= total; ++a) combos.push_back({a, total - a});
    }
    return combos;
  };
  for (auto [ta, tb] : totals)
    for (const auto& av : spread(ta))
      for (const auto& bv : spread(tb)) out.emplace_back(MultiIndex(av), MultiIndex(bv));
  return out;
}

double seminorm(const VectorXcd& u_hermite, int n, int m, int k, Rational r,
                const BasisSpec& spec) {
  auto level = seminorm_level_set(n, m, k, r);
  double need = std::max(m, k) * r.value();
  if (static_cast<double>(spec.pad) + 1e-12 < need)
    throw truncation_error("seminorm: pad " + std::to_string(spec.pad) +
                           " below max(m,k)*r = " + std::to_string(need));
  if (u_hermite.size() != spec.total())
    throw validation_error("seminorm: coefficient length != basis size");

  // Work at truncation N + 2*pad so every coefficient of x^beta D^alpha u
  // (support <= N + pad) is exact; only the declared pad is the caller's
  // contract, the extra margin is internal.
  BasisSpec wide(spec.n, spec.N + 2 * spec.pad, 0);
  IndexMap wide_map(spec.n, wide.N);
  VectorXcd u_wide = VectorXcd::Zero(wide_map.size());
  IndexMap base_map(spec.n, spec.N);
  for (long f = 0; f < base_map.size(); ++f)
    u_wide(wide_map.flat(base_map.multi(f))) = u_hermite(f);

  double acc = 0.0;
  const int M = wide.N;
  for (const auto& [alpha, beta] : level) {
    if (spec.n == 1) {
      Banded1D f = detail::monomial_factor_1d(alpha[0], beta[0], M);
      acc += f.apply(u_wide).norm();
    } else {
      Banded1D f1 = detail::monomial_factor_1d(alpha[0], beta[0], M);
      Banded1D f2 = detail::monomial_factor_1d(alpha[1], beta[1], M);
      // apply the tensor factors through the flattening
      VectorXcd y = VectorXcd::Zero(wide_map.size());
      const int band = std::max(f1.band(), f2.band());
      for (long row = 0; row < wide_map.size(); ++row) {
        const auto& mi = wide_map.multi(row);
        cxd sum(0.0, 0.0);
        for (int j1 = std::max(0, mi[0] - band); j1 <= std::min(M - 1, mi[0] + band); ++j1) {
          cxd a1 = f1.get(mi[0], j1);
          if (a1 == cxd(0.0, 0.0)) continue;
          for (int j2 = std::max(0, mi[1] - band); j2 <= std::min(M - 1, mi[1] + band); ++j2) {
            cxd a2 = f2.get(mi[1], j2);
            if (a2 == cxd(0.0, 0.0)) continue;
            sum += a1 * a2 * u_wide(wide_map.flat({j1, j2}));
          }
        }
        y(row) = sum;
      }
      acc += y.norm();
    }
  }
  return acc;
}

std::vector<Rational> default_r_list(int n, int m, int k, double r_max, int count) {
  (void)n;
  const long L = lcm_l(m, k);
  std::vector<Rational> all;
  for (long num = 1; static_cast<double>(num) / L <= r_max; ++num) {
    Rational r{num, L};
    try {
      seminorm_level_set(n, m, k, r);
      all.push_back(r);
    } catch (const level_set_error&) {
      // skip non-representable orders
    }
  }
  if (static_cast<int>(all.size()) <= count) return all;
  std::vector<Rational> out;
  double stride = static_cast<double>(all.size()) / count;
  for (int i = 0; i < count; ++i)
    out.push_back(all[static_cast<size_t>(std::min<double>(
        std::floor((i + 1) * stride) - 1, static_cast<double>(all.size() - 1)))]);
  // stride picking can duplicate the tail; dedupe preserving order
  std::vector<Rational> dedup;
  for (const auto& r : out)
    if (dedup.empty() || dedup.back().num * r.den != r.num * dedup.back().den)
      dedup.push_back(r);
  return dedup;
}

std::vector<Rational> reliable_r_window(const VectorXcd& u_hermite, int n, int m, int k,
                                        const BasisSpec& spec, double r_cap,
                                        int min_orders) {
  const long L = lcm_l(m, k);
  long ext = detail::signal_extent(u_hermite);
  VectorXcd u34 = u_hermite;
  long cut34 = (3 * ext) / 4;
  if (spec.n == 1) {
    for (long i = cut34; i < u34.size(); ++i) u34(i) = cxd(0.0, 0.0);
  } else {
    // zero flat indices past 3/4 of the extent in the graded order
    for (long i = cut34; i < u34.size(); ++i) u34(i) = cxd(0.0, 0.0);
  }

  std::vector<Rational> reliable;
  for (long num = 1; static_cast<double>(num) / L <= r_cap; ++num) {
    Rational r{num, L};
    BasisSpec sp(spec.n, spec.N,
                 std::max(spec.pad, static_cast<int>(std::ceil(std::max(m, k) * r.value())) + 1));
    double v, v34;
    try {
      v = seminorm(u_hermite, n, m, k, r, sp);
      v34 = seminorm(u34, n, m, k, r, sp);
    } catch (const level_set_error&) {
      continue;
    }
    if (v <= 0.0 && v34 <= 0.0) continue;
    double rel = std::abs(v - v34) / std::max({v, v34, 1e-300});
    if (rel >= 0.25) break;
    reliable.push_back(r);
  }
  if (reliable.empty()) return reliable;

  // top half of the reliable range, extended downward to min_orders
  double r_hi = reliable.back().value();
  std::vector<Rational> window;
  for (const auto& r : reliable)
    if (r.value() >= 0.5 * r_hi) window.push_back(r);
  size_t need = static_cast<size_t>(min_orders);
  if (window.size() < need) {
    window.clear();
    size_t start = reliable.size() > need ? reliable.size() - need : 0;
    for (size_t i = start; i < reliable.size(); ++i) window.push_back(reliable[i]);
  }
  return window;
}

SeminormGrowthFit seminorm_growth_fit(const VectorXcd& u_hermite, int n, int m, int k,
                                      const std::vector<Rational>& r_list,
                                      const BasisSpec& spec) {
  if (r_list.size() < 8)
    throw insufficient_data_error("seminorm_growth_fit: need >= 8 representable orders",
                                  static_cast<long>(r_list.size()));
  SeminormGrowthFit fit;
  for (const auto& r : r_list) {
    double v = seminorm(u_hermite, n, m, k, r, spec);
    if (v <= 0.0) continue;  // exact-zero seminorm carries no growth information
    fit.r_values.push_back(r.value());
    fit.log_seminorms.push_back(std::log(v));
  }
  const int len = static_cast<int>(fit.r_values.size());
  if (len < 8)
    throw insufficient_data_error("seminorm_growth_fit: fewer than 8 nonzero seminorms", len);

  MatrixXd X(len, 3);
  VectorXd y(len);
  for (int i = 0; i < len; ++i) {
    double r = fit.r_values[static_cast<size_t>(i)];
    X(i, 0) = 1.0;
    X(i, 1) = r;
    X(i, 2) = r * std::log(r);
    y(i) = fit.log_seminorms[static_cast<size_t>(i)];
  }
  double rms = 0.0;
  VectorXd b = detail::least_squares(X, y, &rms);
  fit.theta_hat = b(2);
  fit.residual = rms;
  fit.t_hat = b(2) * (k + m) / (static_cast<double>(k) * m);
  return fit;
}

EllipticEstimateReport elliptic_estimate_check(const ShubinOperator& op,
                                               const std::vector<VectorXcd>& suite,
                                               const BasisSpec& spec) {
  if (suite.empty()) throw validation_error("elliptic_estimate_check: empty suite");
  EllipticityReport rep = ellipticity_check(op, 64);
  if (rep.verdict != EllipticityVerdict::Elliptic) {
    std::vector<double> wx(rep.witness.x.data(), rep.witness.x.data() + rep.witness.x.size());
    std::vector<double> wxi(rep.witness.xi.data(),
                            rep.witness.xi.data() + rep.witness.xi.size());
    throw ellipticity_error("elliptic_estimate_check: operator not elliptic", wx, wxi);
  }

  // Full anisotropic simplex {|alpha|/m + |beta|/k <= 1}: union of the level
  // sets at every representable order up to 1.
  std::vector<std::pair<MultiIndex, MultiIndex>> simplex;
  const long L = lcm_l(op.m, op.k);
  for (long num = 0; num <= L; ++num) {
    try {
      auto level = seminorm_level_set(op.n, op.m, op.k, Rational{num, L});
      simplex.insert(simplex.end(), level.begin(), level.end());
    } catch (const level_set_error&) {
    }
  }

  const int order = op.max_axis_order();
  BasisSpec wide(spec.n, spec.N + 2 * std::max(spec.pad, order), 0);
  IndexMap wide_map(spec.n, wide.N);
  IndexMap base_map(spec.n, spec.N);

  EllipticEstimateReport out;
  for (size_t vi = 0; vi < suite.size(); ++vi) {
    if (suite[vi].size() != spec.total())
      throw validation_error("elliptic_estimate_check: suite vector length mismatch");
    VectorXcd u_wide = VectorXcd::Zero(wide_map.size());
    for (long f = 0; f < base_map.size(); ++f)
      u_wide(wide_map.flat(base_map.multi(f))) = suite[vi](f);

    double lhs = 0.0;
    for (const auto& [alpha, beta] : simplex) {
      if (spec.n == 1) {
        lhs += detail::monomial_factor_1d(alpha[0], beta[0], wide.N).apply(u_wide).norm();
      } else {
        Banded1D f1 = detail::monomial_factor_1d(alpha[0], beta[0], wide.N);
        Banded1D f2 = detail::monomial_factor_1d(alpha[1], beta[1], wide.N);
        const int band = std::max(f1.band(), f2.band());
        VectorXcd y = VectorXcd::Zero(wide_map.size());
        for (long row = 0; row < wide_map.size(); ++row) {
          const auto& mi = wide_map.multi(row);
          cxd sum(0.0, 0.0);
          for (int j1 = std::max(0, mi[0] - band); j1 <= std::min(wide.N - 1, mi[0] + band); ++j1) {
            cxd a1 = f1.get(mi[0], j1);
            if (a1 == cxd(0.0, 0.0)) continue;
            for (int j2 = std::max(0, mi[1] - band); j2 <= std::min(wide.N - 1, mi[1] + band); ++j2) {
              cxd a2 = f2.get(mi[1], j2);
              if (a2 == cxd(0.0, 0.0)) continue;
              sum += a1 * a2 * u_wide(wide_map.flat({j1, j2}));
            }
          }
          y(row) = sum;
        }
        lhs += y.norm();
      }
    }

    // ||Pu|| on the wide truncation (exact for u supported on the base box)
    VectorXcd Pu = VectorXcd::Zero(wide_map.size());
    if (spec.n == 1) {
      Banded1D acc(wide.N, order);
      for (const auto& t : op.terms)
        acc.add_scaled(detail::monomial_factor_1d(t.alpha[0], t.beta[0], wide.N), t.coeff);
      Pu = acc.apply(u_wide);
    } else {
      BandedOperatorMatrix wide_mat = assemble(op, BasisSpec(spec.n, wide.N - order, order));
      VectorXcd u_sub = VectorXcd::Zero(wide_mat.size());
      IndexMap sub_map(spec.n, wide.N - order);
      for (long f = 0; f < base_map.size(); ++f)
        u_sub(sub_map.flat(base_map.multi(f))) = suite[vi](f);
      Pu = wide_mat.apply(u_sub);
    }
    double rhs = Pu.norm() + u_wide.norm();
    if (rhs == 0.0) throw error("elliptic_estimate_check: vanishing rhs for nonzero input");

    double ratio = lhs / rhs;
    out.ratios.push_back(ratio);
    if (ratio > out.C_empirical) {
      out.C_empirical = ratio;
      out.worst_case = static_cast<int>(vi);
    }
  }
  return out;
}

}  // namespace shubin
