#pragma once

// Deterministic instruments for the structural facts the estimator relies on:
// how far the central block of an inverted covariance window sits from the
// true precision block, how fast that gap shrinks with the block size, and
// the norm chain bounding the part of Omega the taper discards.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "bandprec/matrix.hpp"
#include "bandprec/model.hpp"

namespace bandprec {

/// W = (target block of Omega) - (target block of inv(clipped Sigma window)),
/// using the exact Sigma = Omega^{-1}.
SymMatrix correction_term(const SymMatrix& omega, const SymMatrix& sigma, std::ptrdiff_t l,
                          std::size_t m);
SymMatrix correction_term(const PrecisionModel& model, std::ptrdiff_t l, std::size_t m);

struct CorrectionReport {
  std::vector<std::size_t> m_values;
  /// Per m: max over interior l in [2m, p-3m] of ||W_l^(m)||.
  std::vector<double> max_norms;
  /// Least-squares slope of log(max_norm) against log(m); NaN when any
  /// max_norm is zero or fewer than two m values are given.
  double fitted_slope = 0.0;
};

/// Throws InsufficientRange if p < 5 * max(m_values).
CorrectionReport correction_decay_report(const PrecisionModel& model,
                                         const std::vector<std::size_t>& m_values);

/// CSV with header `m,max_norm`.
void write_correction_csv(std::ostream& out, const CorrectionReport& report);

/// max over l in {1-m, ..., p-1} of ||estimated block - true block||.
double block_deviation(const SymMatrix& sigma_hat, const SymMatrix& omega, std::size_t m);

struct OutsideBandNorms {
  double spec_norm = 0.0;
  double l1_norm = 0.0;
  /// max_j sum_{|i-j| > k/2} |omega_ij|
  double half_band_tail = 0.0;
};

/// Norms of the discarded part omega - taper_apply(omega, k).inside. Throws
/// std::logic_error if spec_norm <= l1_norm <= half_band_tail + 1e-12 fails.
OutsideBandNorms outside_band_norm(const SymMatrix& omega, std::size_t k);

/// Least-squares slope and intercept of y on x, plus R^2.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace bandprec
