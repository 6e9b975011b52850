#include "shubin/fits.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "shubin/errors.hpp"

namespace shubin::detail {

VectorXd least_squares(const MatrixXd& X, const VectorXd& y, double* rms_residual) {
  if (X.rows() != y.size() || X.rows() < X.cols())
    throw fit_error("least_squares: under-determined design");
  Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
  qr.setThreshold(1e-12);
  if (qr.rank() < X.cols())
    throw fit_error("least_squares: design numerically rank-deficient (near-collinear)");
  VectorXd b = qr.solve(y);
  if (rms_residual) {
    VectorXd r = y - X * b;
    *rms_residual = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
  }
  return b;
}

double log_sum_exp(const VectorXd& a) {
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (std::isfinite(a(i))) mx = std::max(mx, a(i));
  if (!std::isfinite(mx)) return -std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (std::isfinite(a(i))) s += std::exp(a(i) - mx);
  return mx + std::log(s);
}

long signal_extent(const VectorXcd& v) {
  double peak = 0.0;
  Eigen::Index peak_at = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double a = std::abs(v(i));
    if (a > peak) {
      peak = a;
      peak_at = i;
    }
  }
  if (peak == 0.0) return 0;
  const double floor = 1e-15 * peak;

  std::vector<Eigen::Index> idx;
  std::vector<double> logs;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double a = std::abs(v(i));
    if (a > floor) {
      idx.push_back(i);
      logs.push_back(std::log(a));
    }
  }
  long extent = idx.back() + 1;

  // Scan past the peak with a trailing window: a genuine decay keeps making
  // downward steps, a noise plateau does not.
  size_t start = 0;
  while (start < idx.size() && idx[start] < peak_at) ++start;
  const size_t win = 10;
  if (idx.size() - start >= 2 * win) {
    int down = 0;
    for (size_t i = start + 1; i < idx.size(); ++i) {
      if (logs[i] < logs[i - 1]) ++down;
      if (i > start + win && logs[i - win] < logs[i - win - 1]) --down;
      if (i >= start + win && down < 6) {
        extent = idx[i - win] + 1;
        break;
      }
    }
  }
  return extent;
}

std::vector<VectorXcd> random_unit_suite(int count, int support, long size,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<VectorXcd> suite;
  suite.reserve(static_cast<size_t>(count));
  for (int v = 0; v < count; ++v) {
    VectorXcd u = VectorXcd::Zero(size);
    for (int i = 0; i < support && i < size; ++i) u(i) = cxd(g(rng), 0.0);
    u /= u.norm();
    suite.push_back(std::move(u));
  }
  return suite;
}

}  // namespace shubin::detail
