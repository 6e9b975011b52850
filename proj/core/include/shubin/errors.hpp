#ifndef SHUBIN_ERRORS_HPP
#define SHUBIN_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace shubin {

/// Base class for all library errors. The CLI maps subclasses to its
/// exit-code contract (2 ellipticity, 3 convergence, 4 insufficient data,
/// 1 everything else).
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed operator-spec document (carries line/field context in the message).
struct parse_error : error {
  parse_error(const std::string& msg, int line)
      : error("parse error (line " + std::to_string(line) + "): " + msg), line(line) {}
  int line;
};

/// Structural constraint violated (order bound, odd m/k, dimension mismatch, ...).
struct validation_error : error {
  using error::error;
};

/// Bad numeric input (nonfinite point, nonpositive eigenvalue, ...).
struct domain_error : error {
  using error::error;
};

/// Request exceeds what the implementation supports at desk scale.
struct capability_error : error {
  using error::error;
};

/// Cropped entries would be contaminated by truncation (pad too small).
struct truncation_error : error {
  using error::error;
};

/// Seminorm order r has an empty anisotropic level set.
struct level_set_error : error {
  using error::error;
};

/// Principal symbol vanishes (or cannot be certified nonvanishing).
struct ellipticity_error : error {
  ellipticity_error(const std::string& msg, std::vector<double> witness_x,
                    std::vector<double> witness_xi)
      : error(msg), witness_x(std::move(witness_x)), witness_xi(std::move(witness_xi)) {}
  std::vector<double> witness_x, witness_xi;
};

/// Truncation doubling hit the cap without eigenvalue stabilization.
/// Carries the last two spectra so callers can report them.
struct convergence_error : error {
  convergence_error(const std::string& msg, std::vector<double> prev,
                    std::vector<double> last)
      : error(msg), spectrum_prev(std::move(prev)), spectrum_last(std::move(last)) {}
  std::vector<double> spectrum_prev, spectrum_last;
};

/// A fit has fewer usable points than its contract requires.
struct insufficient_data_error : error {
  insufficient_data_error(const std::string& msg, long usable)
      : error(msg + " (usable: " + std::to_string(usable) + ")"), usable(usable) {}
  long usable;
};

/// All-zero coefficient input where a norm series is requested.
struct degenerate_input_error : error {
  using error::error;
};

/// Regression design too ill-conditioned to solve.
struct fit_error : error {
  using error::error;
};

}  // namespace shubin

#endif
