#include "shubin/hermite.hpp"

#include <cmath>
#include <limits>

#include "shubin/errors.hpp"

namespace shubin {

namespace {

constexpr double kQuarterLogPi = 0.28618247146235004;  // log(pi)/4

}  // namespace

HermiteValues hermite_eval(int N, double x) {
  if (N < 1) throw validation_error("hermite_eval: N must be >= 1");
  if (!std::isfinite(x)) throw domain_error("hermite_eval: nonfinite evaluation point");

  HermiteValues out;
  out.values = VectorXd::Zero(N);

  // h_0 = pi^{-1/4} e^{-x^2/2} can underflow long before the mid-index
  // values do (the h_j recover out to the turning point 2j+1 ~ x^2), so the
  // recurrence runs on 2^exp-scaled values with a shared exponent carry.
  const double log2_h0 = (-0.5 * x * x - kQuarterLogPi) / M_LN2;
  long exp_carry = static_cast<long>(std::floor(log2_h0));
  double v_prev = std::exp2(log2_h0 - static_cast<double>(exp_carry));  // in [1, 2)
  double v_curr = std::sqrt(2.0) * x * v_prev;                          // h_1 scaled

  bool guarded = false;
  auto emit = [&](int j, double v) {
    // ldexp underflows gracefully to an exact zero.
    double h = std::ldexp(v, static_cast<int>(std::max<long>(
                                 exp_carry, std::numeric_limits<int>::min())));
    if (h == 0.0 && v != 0.0) guarded = true;
    out.values(j) = h;
  };

  emit(0, v_prev);
  if (N == 1) {
    out.underflow_guarded = guarded;
    return out;
  }
  emit(1, v_curr);

  for (int j = 1; j + 1 < N; ++j) {
    double next = std::sqrt(2.0 / (j + 1)) * x * v_curr -
                  std::sqrt(static_cast<double>(j) / (j + 1)) * v_prev;
    v_prev = v_curr;
    v_curr = next;
    double mag = std::max(std::abs(v_prev), std::abs(v_curr));
    if (mag > 0x1p500) {
      v_prev = std::ldexp(v_prev, -512);
      v_curr = std::ldexp(v_curr, -512);
      exp_carry += 512;
    }
    emit(j + 1, v_curr);
  }
  out.underflow_guarded = guarded;
  return out;
}

MatrixXd hermite_eval_matrix(int N, const VectorXd& nodes) {
  MatrixXd E(nodes.size(), N);
  for (Eigen::Index a = 0; a < nodes.size(); ++a)
    E.row(a) = hermite_eval(N, nodes(a)).values.transpose();
  return E;
}

BandedOperatorMatrix position_matrix(int N) {
  if (N < 2) throw validation_error("position_matrix: N must be >= 2");
  Banded1D X(N, 1);
  for (int i = 0; i + 1 < N; ++i) {
    double v = std::sqrt((i + 1) / 2.0);
    X.set(i, i + 1, v);
    X.set(i + 1, i, v);
  }
  return csr_from_banded(X, BasisSpec(1, N, 0));
}

BandedOperatorMatrix derivative_matrix(int N) {
  if (N < 2) throw validation_error("derivative_matrix: N must be >= 2");
  Banded1D D(N, 1);
  for (int i = 0; i + 1 < N; ++i) {
    double v = std::sqrt((i + 1) / 2.0);
    // <h_i, D h_{i+1}> = -i * sqrt((i+1)/2),  <h_{i+1}, D h_i> = +i * sqrt((i+1)/2)
    D.set(i, i + 1, cxd(0.0, -v));
    D.set(i + 1, i, cxd(0.0, v));
  }
  return csr_from_banded(D, BasisSpec(1, N, 0));
}

namespace detail {

Banded1D monomial_factor_1d(int a, int b, int size) {
  Banded1D acc = Banded1D::identity(size);
  // Derivatives act first: x^b D^a = X^b * D^a as matrices on coefficients.
  Banded1D D(size, 1);
  Banded1D X(size, 1);
  for (int i = 0; i + 1 < size; ++i) {
    double v = std::sqrt((i + 1) / 2.0);
    D.set(i, i + 1, cxd(0.0, -v));
    D.set(i + 1, i, cxd(0.0, v));
    X.set(i, i + 1, v);
    X.set(i + 1, i, v);
  }
  for (int p = 0; p < a; ++p) acc = D.mul(acc);
  for (int p = 0; p < b; ++p) acc = X.mul(acc);
  return acc;
}

}  // namespace detail

BandedOperatorMatrix monomial_matrix(const MultiIndex& alpha, const MultiIndex& beta,
                                     const BasisSpec& spec) {
  if (alpha.dim() != spec.n || beta.dim() != spec.n)
    throw validation_error("monomial_matrix: multi-index dimension mismatch");
  for (int d = 0; d < spec.n; ++d) {
    if (spec.pad < alpha[d] + beta[d])
      throw truncation_error(
          "monomial_matrix: pad " + std::to_string(spec.pad) +
          " < per-axis order " + std::to_string(alpha[d] + beta[d]) +
          "; cropped entries would be contaminated");
  }

  const int M = spec.N + spec.pad;
  if (spec.n == 1) {
    Banded1D f = detail::monomial_factor_1d(alpha[0], beta[0], M);
    return csr_from_banded(f.cropped(spec.N), spec);
  }

  // n = 2: per-axis factors combined through the graded-lex flattening; only
  // entries inside the retained box are materialized.
  Banded1D f1 = detail::monomial_factor_1d(alpha[0], beta[0], M);
  Banded1D f2 = detail::monomial_factor_1d(alpha[1], beta[1], M);
  const int band = std::max(f1.band(), f2.band());
  IndexMap map(2, spec.N);

  BandedOperatorMatrix out;
  out.truncation = spec;
  out.per_axis_band = band;
  SparseCsr& A = out.entries;
  A.rows = map.size();
  A.row_ptr.assign(static_cast<size_t>(A.rows) + 1, 0);

  std::vector<std::pair<long, cxd>> row_entries;
  std::vector<long> all_cols;
  std::vector<cxd> all_vals;
  all_cols.reserve(static_cast<size_t>(A.rows) * (2 * band + 1) * (2 * band + 1));
  all_vals.reserve(all_cols.capacity());

  for (long r = 0; r < map.size(); ++r) {
    const auto& mi = map.multi(r);
    row_entries.clear();
    for (int j1 = std::max(0, mi[0] - band); j1 <= std::min(spec.N - 1, mi[0] + band); ++j1) {
      cxd a1 = f1.get(mi[0], j1);
      if (a1 == cxd(0.0, 0.0)) continue;
      for (int j2 = std::max(0, mi[1] - band); j2 <= std::min(spec.N - 1, mi[1] + band); ++j2) {
        cxd a2 = f2.get(mi[1], j2);
        if (a2 == cxd(0.0, 0.0)) continue;
        row_entries.emplace_back(map.flat({j1, j2}), a1 * a2);
      }
    }
    std::sort(row_entries.begin(), row_entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [c, v] : row_entries) {
      all_cols.push_back(c);
      all_vals.push_back(v);
    }
    A.row_ptr[static_cast<size_t>(r) + 1] = static_cast<long>(all_cols.size());
  }
  A.cols = std::move(all_cols);
  A.vals = std::move(all_vals);
  return out;
}

}  // namespace shubin
