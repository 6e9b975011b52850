#include <cmath>
#include <vector>

#include <lapacke.h>

#include "shubin/errors.hpp"
#include "shubin/hermite.hpp"

namespace shubin {

QuadratureRule gauss_hermite_rule(int q) {
  if (q < 1) throw validation_error("gauss_hermite_rule: q must be >= 1");
  if (q > 10000) throw capability_error("gauss_hermite_rule: q beyond stability bound 1e4");

  QuadratureRule rule;
  rule.degree = 2L * q - 1;
  rule.nodes = VectorXd::Zero(q);
  rule.weights = VectorXd::Zero(q);
  rule.total_weights = VectorXd::Zero(q);

  if (q == 1) {
    rule.nodes(0) = 0.0;
    rule.weights(0) = std::sqrt(M_PI);
    rule.total_weights(0) = std::sqrt(M_PI);
    return rule;
  }

  // Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix with
  // off-diagonals sqrt(i/2); values-only QL (dsterf) keeps this O(q^2).
  std::vector<double> diag(static_cast<size_t>(q), 0.0);
  std::vector<double> off(static_cast<size_t>(q) - 1);
  for (int i = 1; i < q; ++i) off[static_cast<size_t>(i) - 1] = std::sqrt(i / 2.0);
  lapack_int info = LAPACKE_dsterf(q, diag.data(), off.data());
  if (info != 0) throw error("gauss_hermite_rule: dsterf failed");

  // Enforce exact symmetry of the node set about 0 (the Jacobi matrix is
  // persymmetric; rounding in the QL sweep is the only source of asymmetry).
  for (int i = 0; i < q / 2; ++i) {
    double s = 0.5 * (diag[static_cast<size_t>(i)] - diag[static_cast<size_t>(q - 1 - i)]);
    diag[static_cast<size_t>(i)] = s;
    diag[static_cast<size_t>(q - 1 - i)] = -s;
  }
  if (q % 2 == 1) diag[static_cast<size_t>(q) / 2] = 0.0;

  // Gautschi: w_i = 1 / sum_k p_k(x_i)^2 over the orthonormal polynomials for
  // the weight e^{-x^2}. Since p_k(x) e^{-x^2/2} = h_k(x), the *total* weight
  // w_i e^{x_i^2} = 1 / sum_k h_k(x_i)^2 is computable without any
  // exponential, stable at every q.
  for (int i = 0; i < q; ++i) {
    double x = diag[static_cast<size_t>(i)];
    VectorXd h = hermite_eval(q, x).values;
    double s = h.squaredNorm();
    double total_w = 1.0 / s;
    rule.nodes(i) = x;
    rule.total_weights(i) = total_w;
    rule.weights(i) = total_w * std::exp(-x * x);  // underflows harmlessly far out
  }
  return rule;
}

}  // namespace shubin
