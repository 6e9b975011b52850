#ifndef SHUBIN_CLASSIFY_HPP
#define SHUBIN_CLASSIFY_HPP

#include <optional>
#include <string>

#include "shubin/expansion.hpp"

namespace shubin {

struct ClassifyConfig {
  double route_tol = 0.25;   // max pairwise disagreement of the t estimates
  int M_cap = 100;           // iterate-series cap; the effective M_max adapts
  double r_max = 12.0;       // seminorm order ceiling
  int r_count = 12;
  double noise_floor_rel = 1e-15;
  double boundary_margin = 0.1;  // |t_hat - 1| below this: boundary case
};

struct RouteEstimate {
  std::string name;
  bool available = false;
  double t = 0.0;      // clamped to >= 1 when the raw estimate falls below
  double t_raw = 0.0;  // as fitted (0 for degenerate-geometric iterates)
  bool clamped = false;
  std::string note;
};

enum class RouteVerdict { Consistent, Inconsistent, Partial };

/// Joint Gelfand-Shilov classification from three independent routes
/// (iterate growth, eigen-coefficient decay, seminorm growth). t_hat is the
/// median of the available route estimates; mu/nu follow from (m, k).
/// The inductive (S) vs projective (Sigma) distinction quantifies over all
/// constants and is not decidable by finite computation; space_kind_note
/// reports interval evidence only.
struct GSClassification {
  double t_hat = 1.0;
  double mu_hat = 0.0;  // k t /(k+m)
  double nu_hat = 0.0;  // m t /(k+m)
  bool sub_unit_raw = false;
  RouteEstimate route_iterates, route_decay, route_seminorms;
  RouteVerdict verdict = RouteVerdict::Partial;
  std::string space_kind_note;
  // Underlying fits, for reports:
  std::optional<GevreyFit> gevrey;
  std::optional<DecayFit> decay;
  std::optional<SeminormGrowthFit> seminorm_fit;
  std::optional<IterateSeries> iterates;
};

/// u is provided both as eigen-coefficients (for the iterate and decay routes)
/// and in Hermite coordinates (for the seminorm route).
GSClassification classify(const SpectralDecomposition& dec,
                          const ExpansionCoefficients& coeffs,
                          const VectorXcd& u_hermite, int n, int m, int k,
                          const ClassifyConfig& config = {});

std::string format_classification(const GSClassification& g);

}  // namespace shubin

#endif
