#include "eigensolve_internal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include <Eigen/QR>
#include <lapacke.h>

#include "shubin/errors.hpp"

extern "C" void dgemm_(const char* transa, const char* transb, const lapack_int* m,
                       const lapack_int* n, const lapack_int* k, const double* alpha,
                       const double* a, const lapack_int* lda, const double* b,
                       const lapack_int* ldb, const double* beta, double* c,
                       const lapack_int* ldc);

namespace shubin::detail {

namespace {

constexpr double kEps = 2.220446049250313e-16;

VectorXd band_apply(const Eigen::MatrixXd& ab, const VectorXd& x) {
  const int n = static_cast<int>(ab.cols());
  const int kd = static_cast<int>(ab.rows()) - 1;
  VectorXd y = VectorXd::Zero(n);
  for (int c = 0; c < n; ++c) {
    y(c) += ab(0, c) * x(c);
    int rmax = std::min(kd, n - 1 - c);
    for (int r = 1; r <= rmax; ++r) {
      y(c + r) += ab(r, c) * x(c);
      y(c) += ab(r, c) * x(c + r);
    }
  }
  return y;
}

double band_inf_norm(const Eigen::MatrixXd& ab) {
  const int n = static_cast<int>(ab.cols());
  const int kd = static_cast<int>(ab.rows()) - 1;
  VectorXd row_sum = VectorXd::Zero(n);
  for (int c = 0; c < n; ++c) {
    row_sum(c) += std::abs(ab(0, c));
    int rmax = std::min(kd, n - 1 - c);
    for (int r = 1; r <= rmax; ++r) {
      row_sum(c + r) += std::abs(ab(r, c));
      row_sum(c) += std::abs(ab(r, c));
    }
  }
  return row_sum.maxCoeff();
}

// Deterministic start vector for inverse iteration.
VectorXd seeded_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull ^ seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  v.normalize();
  return v;
}

}  // namespace

RawEig dense_lowest(MatrixXd A, int J) {
  const int n = static_cast<int>(A.rows());
  if (J < 1 || J > n) throw capability_error("dense_lowest: J out of range");
  RawEig out;
  VectorXd w = VectorXd::Zero(n);  // dsyevr uses the full-length W as workspace
  out.vectors = MatrixXd::Zero(n, J);
  std::vector<lapack_int> isuppz(static_cast<size_t>(2 * std::max(1, J)));
  lapack_int found = 0;
  lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, 'V', 'I', 'L', n, A.data(), n, 0.0, 0.0, 1, J,
      0.0, &found, w.data(), out.vectors.data(), n, isuppz.data());
  if (info != 0) throw error("dsyevr failed: info " + std::to_string(info));
  if (found < J) throw error("dsyevr returned fewer eigenpairs than requested");
  out.values = w.head(J);
  return out;
}

RawEig banded_lowest(const Eigen::MatrixXd& ab_in, int J) {
  const int n = static_cast<int>(ab_in.cols());
  const int kd = static_cast<int>(ab_in.rows()) - 1;
  if (J < 1 || J > n) throw capability_error("banded_lowest: J out of range");

  const double anorm = band_inf_norm(ab_in);

  // Values: reduce band -> tridiagonal (no Q), then MRRR for indices 1..J.
  VectorXd d(n), e(std::max(1, n));
  {
    Eigen::MatrixXd ab = ab_in;  // dsbtrd overwrites
    VectorXd e_work(std::max(1, n - 1));
    lapack_int info = LAPACKE_dsbtrd(LAPACK_COL_MAJOR, 'N', 'L', n, kd, ab.data(),
                                     kd + 1, d.data(), e_work.data(), nullptr, 1);
    if (info != 0) throw error("dsbtrd failed: info " + std::to_string(info));
    e.head(std::max(0, n - 1)) = e_work.head(std::max(0, n - 1));
  }
  VectorXd w = VectorXd::Zero(n);
  lapack_int m_found = 0;
  {
    VectorXd dd = d, ee = e;  // dstemr consumes its inputs
    lapack_int tryrac = 1;
    std::vector<lapack_int> isuppz(static_cast<size_t>(2 * std::max(1, J)));
    lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'N', 'I', n, dd.data(),
                                     ee.data(), 0.0, 0.0, 1, J, &m_found, w.data(),
                                     nullptr, 1, J, isuppz.data(), &tryrac);
    if (info != 0) throw error("dstemr failed: info " + std::to_string(info));
    if (m_found < J) throw error("dstemr returned fewer eigenvalues than requested");
  }

  // Vectors: inverse iteration on the original banded matrix, general-band LU
  // per shift. Clustered eigenvalues get separated shifts and in-cluster
  // orthogonalization, the classic tridiagonal-inverse-iteration recipe.
  const int kl = kd, ku = kd;
  const int ldab = 2 * kl + ku + 1;
  MatrixXd fac(ldab, n);
  std::vector<lapack_int> ipiv(static_cast<size_t>(n));
  const double cluster_gap = std::max(1e3 * kEps * anorm, 1e-13);

  MatrixXd V(n, J);
  auto factor_shift = [&](double sigma) {
    fac.setZero();
    for (int c = 0; c < n; ++c) {
      fac(kl + ku, c) = ab_in(0, c) - sigma;  // diagonal at row kl+ku
      int rmax = std::min(kd, n - 1 - c);
      for (int r = 1; r <= rmax; ++r) {
        fac(kl + ku + r, c) = ab_in(r, c);      // subdiagonal r
        fac(kl + ku - r, c + r) = ab_in(r, c);  // superdiagonal (symmetry)
      }
    }
    return LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, fac.data(), ldab, ipiv.data());
  };
  auto solve_inplace = [&](VectorXd& x) {
    lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1, fac.data(),
                                     ldab, ipiv.data(), x.data(), n);
    if (info != 0) throw error("dgbtrs failed");
  };

  int cluster_start = 0;
  for (int j = 0; j < J; ++j) {
    if (j > 0 && w(j) - w(j - 1) > cluster_gap) cluster_start = j;
    int pos_in_cluster = j - cluster_start;
    double sigma = w(j) + pos_in_cluster * 3.0 * cluster_gap;

    lapack_int finfo = factor_shift(sigma);
    int nudges = 0;
    while (finfo > 0 && nudges < 4) {  // exactly singular: nudge off the eigenvalue
      sigma += std::max(16 * kEps * anorm, 1e-300);
      finfo = factor_shift(sigma);
      ++nudges;
    }
    if (finfo != 0) throw error("dgbtrf failed: info " + std::to_string(finfo));

    VectorXd x = seeded_vector(n, static_cast<std::uint64_t>(j) + 1);
    for (int it = 0; it < 3; ++it) {
      solve_inplace(x);
      for (int i = cluster_start; i < j; ++i) x -= V.col(i).dot(x) * V.col(i);
      double nrm = x.norm();
      if (nrm == 0.0 || !std::isfinite(nrm)) {
        x = seeded_vector(n, static_cast<std::uint64_t>(j) + 7777);
        continue;
      }
      x /= nrm;
      if (it >= 1) {
        double resid = (band_apply(ab_in, x) - w(j) * x).norm();
        if (resid <= 8 * kEps * anorm) break;
      }
    }
    V.col(j) = x;
  }

  // Global modified Gram-Schmidt pass, then Rayleigh refinement of the values.
  for (int j = 0; j < J; ++j) {
    for (int i = 0; i < j; ++i) V.col(j) -= V.col(i).dot(V.col(j)) * V.col(i);
    double nrm = V.col(j).norm();
    if (nrm < 0.5) {
      // inverse iteration collapsed onto the earlier cluster members; rebuild
      // from a fresh seed inside the orthogonal complement
      VectorXd x = seeded_vector(n, static_cast<std::uint64_t>(j) + 31337);
      for (int rep = 0; rep < 2; ++rep) {
        double sigma = w(j) + 5.0 * cluster_gap;
        if (factor_shift(sigma) == 0) solve_inplace(x);
        for (int i = 0; i < j; ++i) x -= V.col(i).dot(x) * V.col(i);
        double nn = x.norm();
        if (nn > 0) x /= nn;
      }
      V.col(j) = x;
      nrm = 1.0;
    }
    V.col(j) /= nrm;
  }

  RawEig out;
  out.vectors = std::move(V);
  out.values = VectorXd(J);
  for (int j = 0; j < J; ++j)
    out.values(j) = out.vectors.col(j).dot(band_apply(ab_in, out.vectors.col(j)));

  // Rayleigh quotients of near-degenerate pairs can land out of order.
  std::vector<int> perm(static_cast<size_t>(J));
  for (int j = 0; j < J; ++j) perm[static_cast<size_t>(j)] = j;
  std::stable_sort(perm.begin(), perm.end(),
                   [&](int a, int b) { return out.values(a) < out.values(b); });
  RawEig sorted;
  sorted.values = VectorXd(J);
  sorted.vectors = MatrixXd(n, J);
  for (int j = 0; j < J; ++j) {
    sorted.values(j) = out.values(perm[static_cast<size_t>(j)]);
    sorted.vectors.col(j) = out.vectors.col(perm[static_cast<size_t>(j)]);
  }
  return sorted;
}

namespace {

// C = op(A) * op(B) through the Fortran BLAS (OpenBLAS-backed, blocked).
MatrixXd gemm(const MatrixXd& A, const MatrixXd& B, bool transA, bool transB) {
  const lapack_int m = static_cast<lapack_int>(transA ? A.cols() : A.rows());
  const lapack_int k = static_cast<lapack_int>(transA ? A.rows() : A.cols());
  const lapack_int nn = static_cast<lapack_int>(transB ? B.rows() : B.cols());
  MatrixXd C(m, nn);
  const double one = 1.0, zero = 0.0;
  const char ta = transA ? 'T' : 'N', tb = transB ? 'T' : 'N';
  const lapack_int lda = static_cast<lapack_int>(A.rows());
  const lapack_int ldb = static_cast<lapack_int>(B.rows());
  dgemm_(&ta, &tb, &m, &nn, &k, &one, A.data(), &lda, B.data(), &ldb, &zero, C.data(), &m);
  return C;
}

}  // namespace

RawEig sparse_filtered_lowest(const SparseCsr& A, int J, double resid_target,
                              int max_sweeps) {
  const long n = A.rows;
  if (J < 1 || J > n) throw capability_error("sparse_filtered_lowest: J out of range");

  // The buffer must exceed the largest eigenvalue multiplicity at the window
  // edge, otherwise the filter cannot separate the wanted block.
  const int p = static_cast<int>(std::min<long>(n, J + std::max(48L, static_cast<long>(J) / 10)));
  const double ub = A.inf_norm() + 1.0;  // Gershgorin upper bound

  // Fixed-seed start block.
  std::mt19937_64 rng(0x5eed5eed5eedull);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd X(n, p);
  for (long i = 0; i < n; ++i)
    for (int c = 0; c < p; ++c) X(i, c) = g(rng);

  auto orthonormalize = [&](MatrixXd& B) {
    // blocked Householder QR, thin Q
    const lapack_int rows = static_cast<lapack_int>(B.rows());
    const lapack_int cols = static_cast<lapack_int>(B.cols());
    VectorXd tau(cols);
    lapack_int info =
        LAPACKE_dgeqrf(LAPACK_COL_MAJOR, rows, cols, B.data(), rows, tau.data());
    if (info != 0) throw error("dgeqrf failed in filtered subspace iteration");
    info = LAPACKE_dorgqr(LAPACK_COL_MAJOR, rows, cols, cols, B.data(), rows, tau.data());
    if (info != 0) throw error("dorgqr failed in filtered subspace iteration");
  };
  auto spmv_block = [&](const MatrixXd& B) {
    MatrixXd Y(n, B.cols());
    for (Eigen::Index c = 0; c < B.cols(); ++c) Y.col(c) = A.apply_real(B.col(c));
    return Y;
  };

  orthonormalize(X);
  VectorXd theta;

  auto rayleigh_ritz = [&]() {
    MatrixXd AX = spmv_block(X);
    MatrixXd H = gemm(X, AX, true, false);
    H = 0.5 * (H + H.transpose()).eval();
    theta = VectorXd(p);
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', p, H.data(), p,
                                     theta.data());
    if (info != 0) throw error("dsyevd failed in filtered subspace iteration");
    X = gemm(X, H, false, false);   // Ritz vectors, ascending
    AX = gemm(AX, H, false, false);
    // worst residual relative to the lambda-scaled certificate
    double worst = 0.0;
    for (int j = 0; j < J; ++j) {
      double r = (AX.col(j) - theta(j) * X.col(j)).norm();
      worst = std::max(worst, r / std::max(1.0, std::abs(theta(j))));
    }
    return worst;
  };

  const bool trace = std::getenv("SHUBIN_TRACE") != nullptr;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double worst = rayleigh_ritz();
    if (trace)
      std::fprintf(stderr, "[filter] sweep %d worst %.3e target %.3e theta[0]=%.6f theta[J-1]=%.6f theta[p-1]=%.6f\n",
                   sweep, worst, resid_target, theta(0), theta(J - 1), theta(p - 1));
    if (worst <= resid_target) break;

    // Damp [lb, ub]; everything below lb is amplified. The bound sits halfway
    // between the top wanted Ritz value and the subspace top so a degenerate
    // multiplet at the window edge still sees gain.
    double lb = 0.5 * (theta(J - 1) + theta(p - 1));
    if (lb - theta(J - 1) < 1e-8 * std::max(1.0, std::abs(theta(J - 1))))
      lb = theta(J - 1) + 0.02 * std::max(ub - theta(J - 1), 1.0);
    if (!(lb < ub)) lb = 0.5 * (theta(J - 1) + ub);
    double ctr = 0.5 * (ub + lb), rad = 0.5 * (ub - lb);

    // Degree chosen for ~1e4 damping of the top wanted mode per sweep; the
    // recurrence is the cheap part next to the QR and Rayleigh-Ritz blocks.
    int deg = 24;
    {
      double mJ = std::abs((2.0 * theta(J - 1) - lb - ub) / (ub - lb));
      if (mJ > 1.0) {
        double g = std::acosh(mJ);
        deg = static_cast<int>(std::clamp(std::ceil(9.2 / g), 24.0, 80.0));
      }
    }

    // Three-term Chebyshev recurrence on the block, renormalized whenever the
    // amplification approaches the overflow range (QR restores scale anyway).
    MatrixXd T0 = X;
    MatrixXd T1 = (spmv_block(X) - ctr * X) / rad;
    for (int dgi = 2; dgi <= deg; ++dgi) {
      MatrixXd T2 = 2.0 * ((spmv_block(T1) - ctr * T1) / rad) - T0;
      T0 = std::move(T1);
      T1 = std::move(T2);
      double peak = T1.cwiseAbs().maxCoeff();
      if (peak > 1e100) {
        T1 /= peak;
        T0 /= peak;
      }
    }
    if (!T1.allFinite()) throw error("filtered subspace iteration overflowed");
    X = std::move(T1);
    orthonormalize(X);
    if (sweep == max_sweeps - 1) rayleigh_ritz();  // leave Ritz state behind
  }

  RawEig out;
  out.values = theta.head(J);
  out.vectors = X.leftCols(J);
  return out;
}

}  // namespace shubin::detail
