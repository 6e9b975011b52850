#ifndef SHUBIN_EXPANSION_HPP
#define SHUBIN_EXPANSION_HPP

#include <functional>
#include <optional>
#include <string>

#include "shubin/hermite.hpp"
#include "shubin/operator.hpp"
#include "shubin/spectral.hpp"

namespace shubin {

/// A function R^n -> C presented through an evaluator; parity hints let the
/// projection zero known-vanishing coefficients exactly.
struct SampledFunction {
  std::function<cxd(const VectorXd&)> evaluator;
  /// Per-axis parity: +1 even, -1 odd, 0 unknown.
  std::vector<int> symmetry_hint;
};

/// Hermite-coordinate projection by Gauss-Hermite quadrature (tensorized for
/// n = 2). Throws domain_error on nonfinite evaluator values.
VectorXcd project_hermite(const SampledFunction& u, const BasisSpec& spec,
                          const QuadratureRule& rule);

/// Eigen-coefficients u_j = (u, phi_j): quadrature projection onto Hermite
/// coordinates followed by the eigenvector adjoint. The rule must carry at
/// least 2x the per-axis basis size unless `relax_rule` is set.
ExpansionCoefficients expand(const SampledFunction& u, const SpectralDecomposition& dec,
                             const QuadratureRule& rule, bool relax_rule = false);

/// Pointwise sum u(x) = sum_{j <= trusted} u_j phi_j(x).
cxd reconstruct(const ExpansionCoefficients& c, const SpectralDecomposition& dec,
                const VectorXd& x);

/// log ||P^M u|| for M = 0..M_max, entirely in the log domain
/// (log-sum-exp over 2M log lambda_j + 2 log |u_j|; zero coefficients skipped).
struct IterateSeries {
  VectorXd log_norms;  // M = 0..M_max
  int M_max = 0;
  int n = 1, m = 2, k = 2;  // operator provenance, used by the Gevrey fit
};

IterateSeries iterate_norms(const SpectralDecomposition& dec,
                            const ExpansionCoefficients& c, int M_max,
                            int n, int m, int k);

/// Gevrey growth fit of log||P^M u|| against {1, M, log M!} over the window
/// [M_max/4, M_max]. theta_hat is the raw log M! coefficient; classes with
/// theta below km/(k+m) (t < 1) are empty, so theta_admissible clamps there.
struct GevreyFit {
  double theta_hat = 0.0;         // raw OLS coefficient
  double theta_admissible = 0.0;  // max(theta_hat, km/(k+m))
  bool clamped = false;
  double logC_hat = 0.0;
  double logR_hat = 0.0;
  double residual = 0.0;  // RMS misfit
  int window_lo = 0, window_hi = 0;
};

GevreyFit gevrey_fit(const IterateSeries& series);

/// Stretched-exponential coefficient-decay fit |u_j| ~ C e^{-eps j^theta},
/// theta targeting 1/(t n). Two-stage per contract (log(-log) slope, then
/// affine fit at fixed theta) plus a golden-section polish of theta.
struct DecayFit {
  double epsilon_hat = 0.0;
  double theta_hat = 0.0;
  double logC_hat = 0.0;
  double residual = 0.0;
  int window_lo = 0, window_hi = 0;  // 1-based j range actually used
  double t_hat = 0.0;                // 1 / (n * theta_hat)
  int usable = 0;
  // Corroborating summability statistics with the lambda-based exponent:
  double lambda_sum_stat = 0.0;  // sum |u_j|^2 e^{eps' lambda_j^{(k+m)/(km t_hat)}}
  double lambda_sup_stat = 0.0;  // sup |u_j|^2 e^{eps' lambda_j^{(k+m)/(km t_hat)}}
};

DecayFit coefficient_decay_fit(const ExpansionCoefficients& c,
                               const SpectralDecomposition& dec, int n, int m, int k);

/// Exact rational seminorm order r = num/den.
struct Rational {
  long num = 0;
  long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Anisotropic seminorm |u|_r = sum over {|alpha|/m + |beta|/k = r} of
/// ||x^beta D^alpha u||, computed with exact banded algebra at padded
/// truncation. u is given in Hermite coordinates at spec.N per axis.
double seminorm(const VectorXcd& u_hermite, int n, int m, int k, Rational r,
                const BasisSpec& spec);

/// Enumerate the level set of order r (throws level_set_error when empty).
std::vector<std::pair<MultiIndex, MultiIndex>> seminorm_level_set(int n, int m, int k,
                                                                  Rational r);

struct SeminormGrowthFit {
  double theta_hat = 0.0;  // r log r coefficient, target km t /(k+m)
  double residual = 0.0;
  double t_hat = 0.0;  // theta_hat (k+m)/(km)
  std::vector<double> r_values;
  std::vector<double> log_seminorms;
};

/// Fit log|u|_r against {1, r, r log r} over >= 8 representable orders.
SeminormGrowthFit seminorm_growth_fit(const VectorXcd& u_hermite, int n, int m, int k,
                                      const std::vector<Rational>& r_list,
                                      const BasisSpec& spec);

/// Default representable r grid: multiples of 1/lcm(m,k) from 1/2 up to r_max,
/// thinned to about `count` values, nonempty level sets only.
std::vector<Rational> default_r_list(int n, int m, int k, double r_max = 12.0,
                                     int count = 12);

/// Reliability-guarded r window for seminorm growth fits. Coefficient
/// truncation rings at the floor level out to the last kept mode's turning
/// point, and x^{k r} amplifies the ringing past the true seminorm at large r:
/// each order is kept only while |u|_r computed from the full support and from
/// 3/4 of it agree within 25%. Returns the top half of the reliable range
/// (at least min_orders entries when available).
std::vector<Rational> reliable_r_window(const VectorXcd& u_hermite, int n, int m, int k,
                                        const BasisSpec& spec, double r_cap = 12.0,
                                        int min_orders = 8);

struct EllipticEstimateReport {
  double C_empirical = 0.0;
  int worst_case = -1;  // suite index attaining the max
  std::vector<double> ratios;
};

/// Empirical constant of the a-priori estimate
/// sum_{|alpha|/m+|beta|/k <= 1} ||x^beta D^alpha u|| <= C (||Pu|| + ||u||)
/// over a suite of Hermite-coordinate vectors; exact banded algebra.
EllipticEstimateReport elliptic_estimate_check(const ShubinOperator& op,
                                               const std::vector<VectorXcd>& suite,
                                               const BasisSpec& spec);

}  // namespace shubin

#endif
