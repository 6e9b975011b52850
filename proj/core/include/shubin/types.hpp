#ifndef SHUBIN_TYPES_HPP
#define SHUBIN_TYPES_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "shubin/errors.hpp"

namespace shubin {

using cxd = std::complex<double>;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Multi-index alpha (or beta): one nonnegative integer per axis.
struct MultiIndex {
  std::vector<int> entries;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> e) : entries(std::move(e)) { validate(); }
  MultiIndex(std::initializer_list<int> e) : entries(e) { validate(); }

  int dim() const { return static_cast<int>(entries.size()); }
  /// |alpha| = sum of entries.
  int order() const {
    int s = 0;
    for (int e : entries) s += e;
    return s;
  }
  int operator[](int d) const { return entries[static_cast<size_t>(d)]; }

  bool operator==(const MultiIndex& o) const { return entries == o.entries; }
  bool operator<(const MultiIndex& o) const { return entries < o.entries; }

 private:
  void validate() const {
    for (int e : entries)
      if (e < 0) throw validation_error("multi-index entries must be nonnegative");
  }
};

/// Truncation parameters of the Hermite basis: dimension n, per-axis cutoff N,
/// assembly padding. Total basis size is N^n.
struct BasisSpec {
  int n = 1;
  int N = 0;
  int pad = 0;

  BasisSpec() = default;
  BasisSpec(int n_, int N_, int pad_ = 0) : n(n_), N(N_), pad(pad_) {
    if (n < 1 || n > 2) throw capability_error("dimension must be 1 or 2 at desk scale");
    if (N < 1) throw validation_error("per-axis truncation N must be >= 1");
    if (pad < 0) throw validation_error("pad must be nonnegative");
  }

  long total() const {
    long t = 1;
    for (int d = 0; d < n; ++d) t *= N;
    return t;
  }
};

/// Graded-lexicographic enumeration of the index box {0..N-1}^n: sorted by
/// total degree, then lexicographically (first axis ascending). Fixed once so
/// matrices and coefficient vectors share the same flattening.
class IndexMap {
 public:
  IndexMap(int n, int N);

  long flat(const std::vector<int>& multi) const;
  const std::vector<int>& multi(long flat_index) const { return flat_to_multi_[static_cast<size_t>(flat_index)]; }
  long size() const { return static_cast<long>(flat_to_multi_.size()); }
  int dim() const { return n_; }
  int per_axis() const { return N_; }

 private:
  int n_, N_;
  std::vector<std::vector<int>> flat_to_multi_;
  std::vector<long> multi_to_flat_;  // row-major lookup over the box
};

inline IndexMap::IndexMap(int n, int N) : n_(n), N_(N) {
  if (n < 1 || n > 2) throw capability_error("IndexMap supports n = 1 or 2");
  if (n == 1) {
    flat_to_multi_.reserve(static_cast<size_t>(N));
    multi_to_flat_.resize(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) {
      flat_to_multi_.push_back({i});
      multi_to_flat_[static_cast<size_t>(i)] = i;
    }
    return;
  }
  flat_to_multi_.reserve(static_cast<size_t>(N) * N);
  multi_to_flat_.assign(static_cast<size_t>(N) * N, -1);
  long idx = 0;
  for (int grade = 0; grade <= 2 * (N - 1); ++grade) {
    int lo = std::max(0, grade - (N - 1));
    int hi = std::min(grade, N - 1);
    for (int i1 = lo; i1 <= hi; ++i1) {
      int i2 = grade - i1;
      flat_to_multi_.push_back({i1, i2});
      multi_to_flat_[static_cast<size_t>(i1) * N + i2] = idx++;
    }
  }
}

inline long IndexMap::flat(const std::vector<int>& multi) const {
  if (static_cast<int>(multi.size()) != n_)
    throw validation_error("multi-index dimension mismatch");
  long key = 0;
  for (int d = 0; d < n_; ++d) {
    if (multi[static_cast<size_t>(d)] < 0 || multi[static_cast<size_t>(d)] >= N_)
      throw validation_error("multi-index outside basis box");
    key = key * N_ + multi[static_cast<size_t>(d)];
  }
  return multi_to_flat_[static_cast<size_t>(key)];
}

}  // namespace shubin

#endif
