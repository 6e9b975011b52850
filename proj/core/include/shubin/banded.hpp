#ifndef SHUBIN_BANDED_HPP
#define SHUBIN_BANDED_HPP

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "shubin/types.hpp"

namespace shubin {

/// Square banded matrix, complex entries, diagonal-major storage:
/// diag(d)[i] = A[i, i+d] for d in [-band, band] and both indices in range.
/// The workhorse for 1-D products of position/derivative factors.
class Banded1D {
 public:
  Banded1D() = default;
  Banded1D(int size, int band);

  static Banded1D identity(int size);

  int size() const { return size_; }
  int band() const { return band_; }

  cxd get(int i, int j) const {
    int d = j - i;
    if (d < -band_ || d > band_ || i < 0 || j < 0 || i >= size_ || j >= size_) return {0.0, 0.0};
    return diags_[static_cast<size_t>(d + band_)][static_cast<size_t>(i)];
  }
  void set(int i, int j, cxd v) {
    diags_[static_cast<size_t>(j - i + band_)][static_cast<size_t>(i)] = v;
  }

  /// Exact banded product; result band is the sum of bands.
  Banded1D mul(const Banded1D& rhs) const;
  /// Keep the leading newSize x newSize block.
  Banded1D cropped(int new_size) const;
  void add_scaled(const Banded1D& other, cxd coeff);

  VectorXcd apply(const VectorXcd& x) const;

  double max_imag_abs() const;
  double max_abs() const;

  Eigen::MatrixXcd to_dense() const;

 private:
  int size_ = 0;
  int band_ = 0;
  std::vector<std::vector<cxd>> diags_;  // (2*band+1) diagonals, each of length size
};

/// Compressed sparse row storage over the flattened (graded-lex) basis.
/// Complex entries; the spectral path extracts a real view when the
/// imaginary parts are negligible.
struct SparseCsr {
  long rows = 0;
  std::vector<long> row_ptr;  // rows+1
  std::vector<long> cols;
  std::vector<cxd> vals;

  VectorXcd apply(const VectorXcd& x) const;
  VectorXd apply_real(const VectorXd& x) const;  // uses real parts only

  double max_imag_abs() const;
  double max_abs() const;
  /// max_i sum_j |A_ij| — Gershgorin-type bound on the spectral radius.
  double inf_norm() const;

  SparseCsr adjoint() const;
  /// (A + A^*)/2, returning the max entry of |A - A^*| seen.
  SparseCsr symmetrized(double* defect_out) const;
};

/// Galerkin matrix of an operator (or monomial) on the truncated Hermite
/// basis, with truncation metadata. Entries are exact for the retained block
/// when assembled with sufficient padding.
struct BandedOperatorMatrix {
  BasisSpec truncation;
  int per_axis_band = 0;     // |i_d - j_d| <= band for every axis
  SparseCsr entries;         // size total() x total(), graded-lex flattening
  double hermitian_defect = 0.0;

  long size() const { return truncation.total(); }

  VectorXcd apply(const VectorXcd& x) const { return entries.apply(x); }

  bool effectively_real(double rel_tol = 1e-12) const {
    double scale = entries.max_abs();
    return entries.max_imag_abs() <= rel_tol * std::max(scale, 1.0);
  }

  Eigen::MatrixXcd to_dense() const;

  /// Lower-banded real view for LAPACK dsb* routines (n = 1 only).
  /// ab(r, c) = A[c + r, c] for r in [0, band]. Throws if not real or n != 1.
  Eigen::MatrixXd real_lower_band() const;
};

/// Build a BandedOperatorMatrix from a 1-D banded intermediate.
BandedOperatorMatrix csr_from_banded(const Banded1D& b, const BasisSpec& spec);

}  // namespace shubin

#endif
