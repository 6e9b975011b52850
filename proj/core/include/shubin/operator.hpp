#ifndef SHUBIN_OPERATOR_HPP
#define SHUBIN_OPERATOR_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "shubin/banded.hpp"
#include "shubin/types.hpp"

namespace shubin {

/// One monomial c * x^beta D^alpha.
struct OperatorTerm {
  MultiIndex alpha;
  MultiIndex beta;
  cxd coeff;
};

/// Anisotropic Shubin operator P = sum c_{alpha beta} x^beta D^alpha with
/// every term obeying |alpha|/m + |beta|/k <= 1, m and k even.
struct ShubinOperator {
  int n = 1;
  int m = 2;
  int k = 2;
  std::vector<OperatorTerm> terms;

  ShubinOperator() = default;
  ShubinOperator(int n, int m, int k, std::vector<OperatorTerm> terms);

  /// Max over terms of the per-axis band alpha_d + beta_d; the pad floor.
  int max_axis_order() const;
  /// Anisotropic order |alpha|/m + |beta|/k of a term, as an exact rational
  /// scaled by m*k: returns |alpha|*k + |beta|*m (order 1 <=> m*k).
  long scaled_order(const OperatorTerm& t) const;

  bool operator==(const ShubinOperator& o) const;
};

/// (-Delta)^{m/2} + |x|^k expanded into monomials with integer coefficients.
ShubinOperator model_operator(int n, int m, int k);

/// Operator-spec document grammar (the wire format for operators):
///   # comment
///   shubin n=<int> m=<int> k=<int>
///   term alpha=<i1,...,in> beta=<j1,...,jn> re=<float> im=<float>
ShubinOperator parse_operator(const std::string& text);
std::string format_operator(const ShubinOperator& op);
ShubinOperator load_operator_file(const std::string& path);

/// Principal symbol: sum over terms of anisotropic order exactly 1 of
/// c_{alpha beta} x^beta xi^alpha.
cxd principal_symbol(const ShubinOperator& op, const VectorXd& x, const VectorXd& xi);

/// Anisotropic weight Lambda_{m,k}(x, xi) = (1 + |x|^{2k} + |xi|^{2m})^{1/2}.
double anisotropic_weight(int m, int k, const VectorXd& x, const VectorXd& xi);

struct SymbolSample {
  VectorXd x;
  VectorXd xi;
  cxd value;
  double weight_ratio = 0.0;  // |p(x,xi)| / Lambda_{m,k}(x,xi)
};

enum class EllipticityVerdict { Elliptic, Inconclusive, NotElliptic };

struct EllipticityReport {
  EllipticityVerdict verdict = EllipticityVerdict::NotElliptic;
  double min_modulus = 0.0;
  SymbolSample witness;       // where the sampled minimum is attained
  double ratio_lower = 0.0;   // empirical C_2 of |p|/Lambda on far shells
  double ratio_upper = 0.0;   // empirical C_1
  long samples = 0;
};

/// Samples |p| on the anisotropic sphere {|x|^{2k} + |xi|^{2m} = 1}
/// (sufficient by anisotropic homogeneity) and |p|/Lambda on the shells
/// |(x,xi)| in {10, 20, 40}. Sampling gives evidence, not proof: verdict is
/// Elliptic above 1e-6, Inconclusive in [1e-9, 1e-6], NotElliptic below.
EllipticityReport ellipticity_check(const ShubinOperator& op, int grid);

/// Sum of coefficient-weighted monomial matrices, symmetrized as (A+A*)/2
/// with the Hermitian defect recorded. Requires spec.pad >= max axis order.
BandedOperatorMatrix assemble(const ShubinOperator& op, const BasisSpec& spec);

/// Content hash of the operator (canonical serialization), for cache keys.
std::uint64_t operator_hash(const ShubinOperator& op);

}  // namespace shubin

#endif
