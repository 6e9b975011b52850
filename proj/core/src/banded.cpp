#include "shubin/banded.hpp"

#include <algorithm>
#include <cmath>

#include "shubin/errors.hpp"

namespace shubin {

Banded1D::Banded1D(int size, int band) : size_(size), band_(band) {
  diags_.assign(static_cast<size_t>(2 * band + 1),
                std::vector<cxd>(static_cast<size_t>(size), cxd(0.0, 0.0)));
}

Banded1D Banded1D::identity(int size) {
  Banded1D I(size, 0);
  for (int i = 0; i < size; ++i) I.set(i, i, 1.0);
  return I;
}

Banded1D Banded1D::mul(const Banded1D& rhs) const {
  if (size_ != rhs.size_) throw validation_error("Banded1D::mul: size mismatch");
  Banded1D out(size_, band_ + rhs.band_);
  for (int i = 0; i < size_; ++i) {
    int lmin = std::max(0, i - band_);
    int lmax = std::min(size_ - 1, i + band_);
    for (int l = lmin; l <= lmax; ++l) {
      cxd a = get(i, l);
      if (a == cxd(0.0, 0.0)) continue;
      int jmin = std::max(0, l - rhs.band_);
      int jmax = std::min(size_ - 1, l + rhs.band_);
      for (int j = jmin; j <= jmax; ++j) {
        cxd b = rhs.get(l, j);
        if (b == cxd(0.0, 0.0)) continue;
        out.set(i, j, out.get(i, j) + a * b);
      }
    }
  }
  return out;
}

Banded1D Banded1D::cropped(int new_size) const {
  if (new_size > size_) throw validation_error("Banded1D::cropped: enlarging crop");
  Banded1D out(new_size, std::min(band_, new_size - 1));
  for (int i = 0; i < new_size; ++i) {
    int jmin = std::max(0, i - out.band_);
    int jmax = std::min(new_size - 1, i + out.band_);
    for (int j = jmin; j <= jmax; ++j) out.set(i, j, get(i, j));
  }
  return out;
}

void Banded1D::add_scaled(const Banded1D& other, cxd coeff) {
  if (other.size_ != size_) throw validation_error("Banded1D::add_scaled: size mismatch");
  if (other.band_ > band_) throw validation_error("Banded1D::add_scaled: band too small");
  for (int i = 0; i < size_; ++i) {
    int jmin = std::max(0, i - other.band_);
    int jmax = std::min(size_ - 1, i + other.band_);
    for (int j = jmin; j <= jmax; ++j) set(i, j, get(i, j) + coeff * other.get(i, j));
  }
}

VectorXcd Banded1D::apply(const VectorXcd& x) const {
  if (x.size() != size_) throw validation_error("Banded1D::apply: size mismatch");
  VectorXcd y = VectorXcd::Zero(size_);
  for (int i = 0; i < size_; ++i) {
    cxd acc(0.0, 0.0);
    int jmin = std::max(0, i - band_);
    int jmax = std::min(size_ - 1, i + band_);
    for (int j = jmin; j <= jmax; ++j) acc += get(i, j) * x(j);
    y(i) = acc;
  }
  return y;
}

double Banded1D::max_imag_abs() const {
  double m = 0.0;
  for (const auto& d : diags_)
    for (cxd v : d) m = std::max(m, std::abs(v.imag()));
  return m;
}

double Banded1D::max_abs() const {
  double m = 0.0;
  for (const auto& d : diags_)
    for (cxd v : d) m = std::max(m, std::abs(v));
  return m;
}

Eigen::MatrixXcd Banded1D::to_dense() const {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(size_, size_);
  for (int i = 0; i < size_; ++i) {
    int jmin = std::max(0, i - band_);
    int jmax = std::min(size_ - 1, i + band_);
    for (int j = jmin; j <= jmax; ++j) A(i, j) = get(i, j);
  }
  return A;
}

VectorXcd SparseCsr::apply(const VectorXcd& x) const {
  if (x.size() != rows) throw validation_error("SparseCsr::apply: size mismatch");
  VectorXcd y = VectorXcd::Zero(rows);
  for (long r = 0; r < rows; ++r) {
    cxd acc(0.0, 0.0);
    for (long p = row_ptr[static_cast<size_t>(r)]; p < row_ptr[static_cast<size_t>(r) + 1]; ++p)
      acc += vals[static_cast<size_t>(p)] * x(cols[static_cast<size_t>(p)]);
    y(r) = acc;
  }
  return y;
}

VectorXd SparseCsr::apply_real(const VectorXd& x) const {
  if (x.size() != rows) throw validation_error("SparseCsr::apply_real: size mismatch");
  VectorXd y = VectorXd::Zero(rows);
  for (long r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (long p = row_ptr[static_cast<size_t>(r)]; p < row_ptr[static_cast<size_t>(r) + 1]; ++p)
      acc += vals[static_cast<size_t>(p)].real() * x(cols[static_cast<size_t>(p)]);
    y(r) = acc;
  }
  return y;
}

double SparseCsr::max_imag_abs() const {
  double m = 0.0;
  for (cxd v : vals) m = std::max(m, std::abs(v.imag()));
  return m;
}

double SparseCsr::max_abs() const {
  double m = 0.0;
  for (cxd v : vals) m = std::max(m, std::abs(v));
  return m;
}

double SparseCsr::inf_norm() const {
  double m = 0.0;
  for (long r = 0; r < rows; ++r) {
    double s = 0.0;
    for (long p = row_ptr[static_cast<size_t>(r)]; p < row_ptr[static_cast<size_t>(r) + 1]; ++p)
      s += std::abs(vals[static_cast<size_t>(p)]);
    m = std::max(m, s);
  }
  return m;
}

SparseCsr SparseCsr::adjoint() const {
  SparseCsr t;
  t.rows = rows;
  t.row_ptr.assign(static_cast<size_t>(rows) + 1, 0);
  for (long c : cols) t.row_ptr[static_cast<size_t>(c) + 1]++;
  for (long r = 0; r < rows; ++r)
    t.row_ptr[static_cast<size_t>(r) + 1] += t.row_ptr[static_cast<size_t>(r)];
  t.cols.resize(cols.size());
  t.vals.resize(vals.size());
  std::vector<long> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (long r = 0; r < rows; ++r) {
    for (long p = row_ptr[static_cast<size_t>(r)]; p < row_ptr[static_cast<size_t>(r) + 1]; ++p) {
      long c = cols[static_cast<size_t>(p)];
      long q = cursor[static_cast<size_t>(c)]++;
      t.cols[static_cast<size_t>(q)] = r;
      t.vals[static_cast<size_t>(q)] = std::conj(vals[static_cast<size_t>(p)]);
    }
  }
  return t;
}

SparseCsr SparseCsr::symmetrized(double* defect_out) const {
  SparseCsr adj = adjoint();
  SparseCsr out;
  out.rows = rows;
  out.row_ptr.assign(static_cast<size_t>(rows) + 1, 0);
  double defect = 0.0;
  std::vector<long> merged_cols;
  std::vector<cxd> merged_vals;
  merged_cols.reserve(cols.size());
  merged_vals.reserve(vals.size());
  for (long r = 0; r < rows; ++r) {
    long pa = row_ptr[static_cast<size_t>(r)], ea = row_ptr[static_cast<size_t>(r) + 1];
    long pb = adj.row_ptr[static_cast<size_t>(r)], eb = adj.row_ptr[static_cast<size_t>(r) + 1];
    while (pa < ea || pb < eb) {
      long ca = pa < ea ? cols[static_cast<size_t>(pa)] : rows;
      long cb = pb < eb ? adj.cols[static_cast<size_t>(pb)] : rows;
      long c = std::min(ca, cb);
      cxd va = (ca == c) ? vals[static_cast<size_t>(pa++)] : cxd(0.0, 0.0);
      cxd vb = (cb == c) ? adj.vals[static_cast<size_t>(pb++)] : cxd(0.0, 0.0);
      defect = std::max(defect, std::abs(va - vb));
      merged_cols.push_back(c);
      merged_vals.push_back(0.5 * (va + vb));
    }
    out.row_ptr[static_cast<size_t>(r) + 1] = static_cast<long>(merged_cols.size());
  }
  out.cols = std::move(merged_cols);
  out.vals = std::move(merged_vals);
  if (defect_out) *defect_out = defect;
  return out;
}

Eigen::MatrixXcd BandedOperatorMatrix::to_dense() const {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(size(), size());
  for (long r = 0; r < entries.rows; ++r)
    for (long p = entries.row_ptr[static_cast<size_t>(r)];
         p < entries.row_ptr[static_cast<size_t>(r) + 1]; ++p)
      A(r, entries.cols[static_cast<size_t>(p)]) = entries.vals[static_cast<size_t>(p)];
  return A;
}

Eigen::MatrixXd BandedOperatorMatrix::real_lower_band() const {
  if (truncation.n != 1)
    throw capability_error("real_lower_band: 1-D matrices only");
  if (!effectively_real(1e-10))
    throw capability_error("real_lower_band: matrix has non-negligible imaginary parts");
  const int N = truncation.N;
  const int kd = per_axis_band;
  Eigen::MatrixXd ab = Eigen::MatrixXd::Zero(kd + 1, N);
  for (long r = 0; r < entries.rows; ++r)
    for (long p = entries.row_ptr[static_cast<size_t>(r)];
         p < entries.row_ptr[static_cast<size_t>(r) + 1]; ++p) {
      long c = entries.cols[static_cast<size_t>(p)];
      if (r >= c) ab(r - c, c) = entries.vals[static_cast<size_t>(p)].real();
    }
  return ab;
}

BandedOperatorMatrix csr_from_banded(const Banded1D& b, const BasisSpec& spec) {
  BandedOperatorMatrix out;
  out.truncation = spec;
  out.per_axis_band = b.band();
  SparseCsr& A = out.entries;
  A.rows = b.size();
  A.row_ptr.assign(static_cast<size_t>(A.rows) + 1, 0);
  for (int i = 0; i < b.size(); ++i) {
    int jmin = std::max(0, i - b.band());
    int jmax = std::min(b.size() - 1, i + b.band());
    for (int j = jmin; j <= jmax; ++j) {
      A.cols.push_back(j);
      A.vals.push_back(b.get(i, j));
    }
    A.row_ptr[static_cast<size_t>(i) + 1] = static_cast<long>(A.cols.size());
  }
  return out;
}

}  // namespace shubin
