#pragma once

// Rate experiments: one trial builds the power-law precision model, samples
// n observations, estimates with the rate-optimal bandwidth and records the
// squared spectral error. A sweep runs the Cartesian product of (alpha, n, p)
// cells times a number of trials, persists to CSV and renders SVG plots.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bandprec/diagnostics.hpp"
#include "bandprec/estimator.hpp"

namespace bandprec {

struct ExperimentPlan {
  std::vector<double> alphas;
  std::vector<std::size_t> ns;
  std::vector<std::size_t> ps;
  std::size_t trials = 5;
  std::uint64_t base_seed = 1;
  double rho_amp = 0.6;
  Mode mode = Mode::fast;
  std::optional<std::size_t> k_override;
  /// When false, elapsed_ms is recorded as 0 so that output is byte-stable.
  bool record_timing = true;
  unsigned threads = 1;
};

struct TrialRecord {
  double alpha = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t k = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  /// ||Omega_hat - Omega||^2 in the spectral norm.
  double sq_spectral_error = 0.0;
  /// Wall time of the estimate call.
  double elapsed_ms = 0.0;

  bool operator==(const TrialRecord&) const = default;
};

struct TrialFailure {
  double alpha = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string message;
};

struct SweepResult {
  std::vector<TrialRecord> records;
  std::vector<TrialFailure> failures;
};

/// splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Per-trial seed: h = base; then for v in (alpha_idx, n_idx, p_idx, trial)
/// h = splitmix64(h ^ splitmix64(v + 1)).
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t alpha_idx, std::size_t n_idx,
                         std::size_t p_idx, std::size_t trial);

/// k = k_override or default_bandwidth(n, alpha), clamped to p.
std::size_t trial_bandwidth(std::size_t n, double alpha, std::size_t p,
                            std::optional<std::size_t> k_override);

/// NotPositiveDefinite is rethrown with the trial parameters in the message.
TrialRecord run_trial(double alpha, std::size_t n, std::size_t p, std::uint64_t seed,
                      Mode mode = Mode::fast, std::optional<std::size_t> k_override = {},
                      double rho_amp = 0.6, std::size_t trial = 0, bool record_timing = true);

/// Failures are collected per trial; remaining cells still run. Records are
/// ordered by (alpha, n, p, trial) in plan order.
SweepResult run_sweep(const ExperimentPlan& plan);

inline constexpr std::string_view kRecordCsvHeader =
    "alpha,n,p,k,trial,seed,sq_spectral_error,elapsed_ms";

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records);
void write_csv(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> read_csv(std::istream& in);
std::vector<TrialRecord> read_csv(const std::string& path);

enum class PlotAxis { log_p, n_rate };
PlotAxis parse_axis(std::string_view name);

struct CellPoint {
  double x = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

struct Series {
  std::string label;
  double alpha = 0.0;
  /// n for log_p plots, p for n_rate plots.
  std::size_t fixed = 0;
  std::vector<CellPoint> points;  // ascending x
  /// Least-squares line of mean error on x; absent with fewer than two x.
  std::optional<LinearFit> fit;
};

/// Groups records into series: one per (alpha, n) with x = log p, or one per
/// (alpha, p) with x = n^(-2 alpha / (2 alpha + 1)).
std::vector<Series> summarize(const std::vector<TrialRecord>& records, PlotAxis axis);

/// Standalone SVG 1.1 scatter of per-cell mean error with min-max bars and a
/// regression line per series. Throws EmptyInput on no records.
std::string render_plot_svg(const std::vector<TrialRecord>& records, PlotAxis axis);
void render_plot(const std::vector<TrialRecord>& records, PlotAxis axis, const std::string& path);

}  // namespace bandprec
