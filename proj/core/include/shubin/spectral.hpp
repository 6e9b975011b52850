#ifndef SHUBIN_SPECTRAL_HPP
#define SHUBIN_SPECTRAL_HPP

#include <optional>
#include <utility>

#include "shubin/banded.hpp"
#include "shubin/operator.hpp"
#include "shubin/types.hpp"

namespace shubin {

/// Lowest eigenpairs of a Galerkin matrix, ascending, with residual
/// certificates. Eigenvector signs are fixed (largest-magnitude coordinate
/// positive) so runs are bit-comparable.
struct SpectralDecomposition {
  VectorXd eigenvalues;   // lambda_1 <= lambda_2 <= ... (index 0 is lambda_1)
  MatrixXd eigenvectors;  // size x J, orthonormal columns in Hermite coordinates
  VectorXd residuals;     // ||A v_j - lambda_j v_j||
  int J_trusted = 0;      // leading certified count
  BasisSpec spec;
  std::uint64_t signature = 0;  // provenance token for coefficient vectors

  double lambda(int j_one_based) const { return eigenvalues(j_one_based - 1); }
  int count() const { return static_cast<int>(eigenvalues.size()); }
};

/// Lowest J eigenpairs of a Hermitian matrix (defect <= 1e-10 required; the
/// spectral path additionally requires effectively real entries).
/// Residual certificate: ||A v - lambda v|| <= tol*max(1, lambda) + 64 eps ||A||_inf,
/// the last term being the backward-stability floor; J_trusted is the longest
/// certified prefix.
SpectralDecomposition eigendecompose(const BandedOperatorMatrix& A, int J, double tol);

struct ConvergenceOptions {
  double tol = 1e-8;       // max relative eigenvalue drift across a doubling
  int start_N = 64;        // per-axis; raised automatically so the basis holds J
  int cap_N = 8192;        // per-axis cap (n=1); n=2 is capped at 128 per axis
  int cap_N_2d = 128;
  double residual_tol = 1e-8;
};

/// Double N until every tracked eigenvalue is stable, then return the finer
/// decomposition with J_trusted = J. Requires an elliptic operator.
std::pair<BasisSpec, SpectralDecomposition> convergence_study(
    const ShubinOperator& op, int J, const ConvergenceOptions& opt = {});

/// Power-law fit lambda_j ~ C j^s on a trusted index window.
struct WeylFit {
  double exponent_hat = 0.0;
  double prefactor_hat = 0.0;
  double exponent_theory = 0.0;  // mk / (n (m+k))
  int window_lo = 0, window_hi = 0;  // 1-based, inclusive
  double residual = 0.0;             // RMS log-misfit
};

WeylFit weyl_fit(const SpectralDecomposition& dec, int window_lo, int window_hi,
                 int n, int m, int k);
/// Default window [J/8, 3J/4] over the trusted range.
WeylFit weyl_fit(const SpectralDecomposition& dec, int n, int m, int k);

/// Eigen-coefficients u_j of a function over the trusted range.
struct ExpansionCoefficients {
  VectorXcd values;        // u_j, j = 1..J_trusted
  double tail_mass = 0.0;  // 1 - sum |u_j|^2 / ||u||^2 when the norm is known
  std::uint64_t dec_signature = 0;

  int count() const { return static_cast<int>(values.size()); }
};

/// Coefficients of P^r u: lambda_j^r u_j. All trusted eigenvalues must be
/// positive and u must be supported on the trusted range.
ExpansionCoefficients spectral_power(const SpectralDecomposition& dec, double r,
                                     const ExpansionCoefficients& u);

/// Spectral Sobolev norm (sum_j lambda_j^{2s/max(m,k)} |u_j|^2)^{1/2},
/// i.e. ||P^{s/max(m,k)} u||. (The equivalent statement-level weight uses
/// lambda^{s/max}; this is the norm actually implemented.)
double sobolev_norm(const SpectralDecomposition& dec, const ExpansionCoefficients& u,
                    double s, int m, int k);

struct SchwartzReport {
  std::vector<double> growth_slopes;  // slope of log(j^s |u_j|) vs log j, s = 1..s_max
  double fitted_decay_order = 0.0;    // -slope of log|u_j| vs log j
  bool consistent = false;
  int usable = 0;
};

/// Finite-window evidence for u in the Schwartz class: j^s |u_j| must stay
/// bounded for every s up to s_max.
SchwartzReport schwartz_test(const SpectralDecomposition& dec,
                             const ExpansionCoefficients& u, int s_max);

}  // namespace shubin

#endif
