#ifndef SHUBIN_HERMITE_HPP
#define SHUBIN_HERMITE_HPP

#include <Eigen/Core>

#include "shubin/banded.hpp"
#include "shubin/types.hpp"

namespace shubin {

/// Values h_0(x) ... h_{N-1}(x) of the L^2-normalized Hermite functions
/// (Gaussian weight e^{-x^2/2} built in). When the true value is below the
/// double-precision underflow threshold the entry is an exact zero and
/// underflow_guarded is set.
struct HermiteValues {
  VectorXd values;
  bool underflow_guarded = false;
};

/// Stable three-term recurrence in function (not polynomial) form, with
/// power-of-two rescaling so deep-tail evaluation (|x| up to 40 and beyond,
/// N up to 4096) neither underflows to noise nor overflows.
HermiteValues hermite_eval(int N, double x);

/// h_i(x_a) for all nodes: row a holds h_0..h_{N-1} at x_a.
MatrixXd hermite_eval_matrix(int N, const VectorXd& nodes);

/// Physicists' Gauss-Hermite rule: exact for p(x) e^{-x^2}, deg p <= 2q-1.
/// `weights` integrate f against e^{-x^2} (they sum to sqrt(pi));
/// `total_weights` = weights * e^{x^2} are the stable companions for
/// integrating raw functions that carry their own Gaussian decay.
struct QuadratureRule {
  VectorXd nodes;
  VectorXd weights;
  VectorXd total_weights;
  long degree = 0;

  /// integral of u(x) dx for u sampled at the nodes, u = f * e^{-x^2} shaped.
  double integrate_raw(const VectorXd& samples) const {
    return (total_weights.array() * samples.array()).sum();
  }
};

QuadratureRule gauss_hermite_rule(int q);

/// Matrix of multiplication by x on span{h_0..h_{N-1}}:
/// X[i, i+1] = X[i+1, i] = sqrt((i+1)/2).
BandedOperatorMatrix position_matrix(int N);

/// Matrix of D = -i d/dx (Hermitian, purely imaginary entries), from
/// h_i' = sqrt(i/2) h_{i-1} - sqrt((i+1)/2) h_{i+1}.
BandedOperatorMatrix derivative_matrix(int N);

/// Matrix of x^beta D^alpha (derivatives act first, then multiplication) on the
/// N^n basis, assembled at truncation N+pad per axis and cropped so every
/// retained entry is exact. Requires spec.pad >= alpha_d + beta_d per axis.
BandedOperatorMatrix monomial_matrix(const MultiIndex& alpha, const MultiIndex& beta,
                                     const BasisSpec& spec);

namespace detail {
/// 1-D factor x^b D^a built at truncation `size` (uncropped; the top a+b
/// rows/cols are contaminated by truncation).
Banded1D monomial_factor_1d(int a, int b, int size);
}  // namespace detail

}  // namespace shubin

#endif
