#include "bandprec/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bandprec/errors.hpp"
#include "bandprec/estimator.hpp"

namespace bandprec {

SymMatrix correction_term(const SymMatrix& omega, const SymMatrix& sigma, std::ptrdiff_t l,
                          std::size_t m) {
  if (omega.dim() != sigma.dim()) throw DimensionError("omega and sigma dimensions differ");
  const BlockInverse approx = block_inverse(sigma, m, l);
  const WindowSpec& w = approx.window;
  return omega.principal(w.tgt_start, w.tgt_end) - approx.block;
}

SymMatrix correction_term(const PrecisionModel& model, std::ptrdiff_t l, std::size_t m) {
  return correction_term(model.omega(), model.sigma(), l, m);
}

CorrectionReport correction_decay_report(const PrecisionModel& model,
                                         const std::vector<std::size_t>& m_values) {
  if (m_values.empty()) throw ParameterError("m_values must be nonempty");
  const std::size_t p = model.dim();
  const std::size_t m_max = *std::max_element(m_values.begin(), m_values.end());
  if (p < 5 * m_max) {
    std::ostringstream os;
    os << "p=" << p << " is too small for interior offsets at m=" << m_max
       << " (need p >= " << 5 * m_max << ")";
    throw InsufficientRange(os.str());
  }

  CorrectionReport report;
  report.m_values = m_values;
  const SymMatrix sigma = model.sigma();
  for (std::size_t m : m_values) {
    if (m < 2) throw ParameterError("block sizes must be >= 2");
    double worst = 0.0;
    for (std::size_t l = 2 * m; l + 3 * m <= p; ++l) {
      const SymMatrix w = correction_term(model.omega(), sigma, static_cast<std::ptrdiff_t>(l), m);
      worst = std::max(worst, spectral_norm(w));
    }
    report.max_norms.push_back(worst);
  }

  const bool loggable = m_values.size() >= 2 &&
                        std::all_of(report.max_norms.begin(), report.max_norms.end(),
                                    [](double v) { return v > 0.0; });
  if (!loggable) {
    report.fitted_slope = std::numeric_limits<double>::quiet_NaN();
    return report;
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < m_values.size(); ++i) {
    lx.push_back(std::log(static_cast<double>(m_values[i])));
    ly.push_back(std::log(report.max_norms[i]));
  }
  report.fitted_slope = fit_line(lx, ly).slope;
  return report;
}

void write_correction_csv(std::ostream& out, const CorrectionReport& report) {
  out << "m,max_norm\n";
  for (std::size_t i = 0; i < report.m_values.size(); ++i) {
    out << report.m_values[i] << ',' << format_double(report.max_norms[i]) << '\n';
  }
}

double block_deviation(const SymMatrix& sigma_hat, const SymMatrix& omega, std::size_t m) {
  if (sigma_hat.dim() != omega.dim()) throw DimensionError("sigma_hat and omega dimensions differ");
  const auto [first, last] = offset_range(omega.dim(), m);
  double worst = 0.0;
  for (std::ptrdiff_t l = first; l <= last; ++l) {
    const BlockInverse est = block_inverse(sigma_hat, m, l);
    const WindowSpec& w = est.window;
    if (w.target_size() == 0) continue;
    worst = std::max(worst, spectral_norm(est.block - omega.principal(w.tgt_start, w.tgt_end)));
  }
  return worst;
}

OutsideBandNorms outside_band_norm(const SymMatrix& omega, std::size_t k) {
  const SymMatrix outside = taper_apply(omega, k).outside;
  OutsideBandNorms r;
  r.spec_norm = spectral_norm(outside);
  r.l1_norm = l1_operator_norm(outside);

  const std::size_t p = omega.dim();
  for (std::size_t j = 0; j < p; ++j) {
    double tail = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      const std::size_t d = i > j ? i - j : j - i;
      if (2 * d > k) tail += std::abs(omega(i, j));
    }
    r.half_band_tail = std::max(r.half_band_tail, tail);
  }

  // Spectral norm carries ~1e-9 relative iteration error.
  const bool chain_ok = r.spec_norm <= r.l1_norm * (1.0 + 1e-9) + 1e-12 &&
                        r.l1_norm <= r.half_band_tail + 1e-12;
  if (!chain_ok) {
    std::ostringstream os;
    os << "outside-band norm chain violated: spec=" << r.spec_norm << " l1=" << r.l1_norm
       << " tail=" << r.half_band_tail;
    throw std::logic_error(os.str());
  }
  return r;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ParameterError("fit_line needs two or more paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  if (sxx == 0.0) {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.intercept = my;
    fit.r_squared = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace bandprec
