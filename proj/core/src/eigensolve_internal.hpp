#ifndef SHUBIN_EIGENSOLVE_INTERNAL_HPP
#define SHUBIN_EIGENSOLVE_INTERNAL_HPP

#include "shubin/banded.hpp"
#include "shubin/types.hpp"

namespace shubin::detail {

struct RawEig {
  VectorXd values;   // ascending
  MatrixXd vectors;  // size x J
};

/// Lowest J eigenpairs of a dense real symmetric matrix (LAPACK dsyevr).
RawEig dense_lowest(MatrixXd A, int J);

/// Lowest J eigenpairs of a real symmetric banded matrix: values by
/// band-to-tridiagonal reduction + MRRR, vectors by banded inverse iteration
/// with cluster orthogonalization, then a modified Gram-Schmidt pass.
/// ab is LAPACK lower-band storage, ab(r, c) = A[c+r, c].
RawEig banded_lowest(const Eigen::MatrixXd& ab, int J);

/// Lowest J eigenpairs of a sparse real symmetric matrix by
/// Chebyshev-filtered subspace iteration with full re-orthonormalization.
/// Stops once max_j ||r_j|| / max(1, theta_j) over the leading J pairs falls
/// below resid_target, or after max_sweeps.
RawEig sparse_filtered_lowest(const SparseCsr& A, int J, double resid_target,
                              int max_sweeps = 30);

}  // namespace shubin::detail

#endif
