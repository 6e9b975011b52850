#ifndef SHUBIN_FITS_HPP
#define SHUBIN_FITS_HPP

#include <Eigen/Dense>

#include "shubin/types.hpp"

namespace shubin::detail {

/// Least squares y ~ X b via column-pivoted QR; throws fit_error when the
/// design is numerically rank-deficient.
VectorXd least_squares(const MatrixXd& X, const VectorXd& y, double* rms_residual);

/// log(sum exp(a_i)) without overflow; -inf input entries are skipped.
double log_sum_exp(const VectorXd& a);

/// Deterministic RNG for fixed-seed suites.
std::vector<VectorXcd> random_unit_suite(int count, int support, long size,
                                         std::uint64_t seed);

/// Length (0-based, exclusive) of the decaying-signal prefix of a coefficient
/// vector: entries below 1e-15 * peak are noise by fiat, and the tail where
/// the nonzero magnitudes stop decreasing (trailing-window monotonicity test)
/// is a numerical plateau, not signal.
long signal_extent(const VectorXcd& v);

}  // namespace shubin::detail

#endif
