// bandprec: command-line front end.
//
//   bandprec generate-model --alpha 0.5 --p 100 [--rho 0.6] [--out omega.csv]
//   bandprec sample --alpha 0.5 --p 100 --n 500 [--seed 1] [--out x.csv]
//   bandprec estimate --input x.csv (--k 8 | --alpha 0.5) [--mode fast] [--ridge 0]
//   bandprec diagnose --alpha 0.5 --p 256 [--ms 4,8,16,32] [--ks 4,8,16]
//   bandprec sweep --alphas 0.3,0.5 --ns 250,500,1000 --ps 100 --out r.csv
//                  [--trials 5] [--seed 1] [--plot r.svg] [--plot-axis n_rate]
//
// Exit status: 0 success, 1 usage or input error, 2 numerical failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bandprec/diagnostics.hpp"
#include "bandprec/errors.hpp"
#include "bandprec/estimator.hpp"
#include "bandprec/harness.hpp"
#include "bandprec/model.hpp"

namespace {

using namespace bandprec;

constexpr int kUsageError = 1;
constexpr int kNumericalError = 2;

// Writes through `fn` to `path`, or to stdout when path is empty.
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  fn(out);
  if (!out) throw IoError("write failed for '" + path + "'");
}

int run(int argc, char** argv) {
  CLI::App app{"Banded precision matrix estimation by blockwise inversion"};
  app.require_subcommand(1);

  struct {
    double alpha = 0.5;
    double rho = 0.6;
    std::size_t p = 0;
    std::string out;
  } gen;
  auto* generate = app.add_subcommand("generate-model", "Emit the power-law precision matrix as CSV");
  generate->add_option("--alpha", gen.alpha, "Decay rate")->required()->check(CLI::PositiveNumber);
  generate->add_option("--rho", gen.rho, "Off-diagonal amplitude")->capture_default_str();
  generate->add_option("--p", gen.p, "Dimension")->required()->check(CLI::PositiveNumber);
  generate->add_option("--out", gen.out, "Output path (default stdout)");

  struct {
    double alpha = 0.5;
    double rho = 0.6;
    std::size_t p = 0;
    std::size_t n = 0;
    std::uint64_t seed = 1;
    std::string out;
  } smp;
  auto* sample_cmd = app.add_subcommand("sample", "Draw Gaussian observations as CSV");
  sample_cmd->add_option("--alpha", smp.alpha, "Decay rate")->required()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--rho", smp.rho, "Off-diagonal amplitude")->capture_default_str();
  sample_cmd->add_option("--p", smp.p, "Dimension")->required()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--n", smp.n, "Number of observations")->required();
  sample_cmd->add_option("--seed", smp.seed, "Random seed")->capture_default_str();
  sample_cmd->add_option("--out", smp.out, "Output path (default stdout)");

  struct {
    std::string input;
    std::optional<double> alpha;
    std::optional<std::size_t> k;
    std::string mode = "fast";
    double ridge = 0.0;
    std::string out;
  } est;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate the precision matrix from a data CSV");
  estimate_cmd->add_option("--input", est.input, "Data CSV (rows = observations)")
      ->required()
      ->check(CLI::ExistingFile);
  estimate_cmd->add_option("--k", est.k, "Bandwidth");
  estimate_cmd->add_option("--alpha", est.alpha, "Decay rate; sets k = floor(n^(1/(2 alpha + 1)))");
  estimate_cmd->add_option("--mode", est.mode, "naive|fast")
      ->check(CLI::IsMember({"naive", "fast"}))
      ->capture_default_str();
  estimate_cmd->add_option("--ridge", est.ridge, "Diagonal jitter for each window")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  estimate_cmd->add_option("--out", est.out, "Output path (default stdout)");

  struct {
    double alpha = 0.5;
    double rho = 0.6;
    std::size_t p = 0;
    std::vector<std::size_t> ms{4, 8, 16, 32};
    std::vector<std::size_t> ks;
    std::string out;
    std::string outside_out;
  } diag;
  auto* diagnose = app.add_subcommand("diagnose", "Correction-decay and outside-band reports");
  diagnose->add_option("--alpha", diag.alpha, "Decay rate")->required()->check(CLI::PositiveNumber);
  diagnose->add_option("--rho", diag.rho, "Off-diagonal amplitude")->capture_default_str();
  diagnose->add_option("--p", diag.p, "Dimension")->required()->check(CLI::PositiveNumber);
  diagnose->add_option("--ms", diag.ms, "Block sizes")->delimiter(',')->capture_default_str();
  diagnose->add_option("--ks", diag.ks, "Bandwidths for the outside-band report")->delimiter(',');
  diagnose->add_option("--out", diag.out, "Correction report CSV path (default stdout)");
  diagnose->add_option("--outside-out", diag.outside_out,
                       "Outside-band report CSV path (default stdout)");

  struct {
    std::vector<double> alphas;
    std::vector<std::size_t> ns;
    std::vector<std::size_t> ps;
    std::size_t trials = 5;
    std::uint64_t seed = 1;
    std::string mode = "fast";
    double rho = 0.6;
    std::optional<std::size_t> k;
    std::string out;
    std::string plot;
    std::string plot_axis = "n_rate";
    unsigned threads = 1;
    bool timing = false;
  } sw;
  auto* sweep = app.add_subcommand("sweep", "Run a rate experiment grid");
  sweep->add_option("--alphas", sw.alphas, "Decay rates")->required()->delimiter(',');
  sweep->add_option("--ns", sw.ns, "Sample counts")->required()->delimiter(',');
  sweep->add_option("--ps", sw.ps, "Dimensions")->required()->delimiter(',');
  sweep->add_option("--trials", sw.trials, "Trials per cell")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_option("--seed", sw.seed, "Base seed")->capture_default_str();
  sweep->add_option("--mode", sw.mode, "naive|fast")
      ->check(CLI::IsMember({"naive", "fast"}))
      ->capture_default_str();
  sweep->add_option("--rho", sw.rho, "Off-diagonal amplitude")->capture_default_str();
  sweep->add_option("--k", sw.k, "Bandwidth override");
  sweep->add_option("--out", sw.out, "Trial CSV path")->required();
  sweep->add_option("--plot", sw.plot, "SVG plot path");
  sweep->add_option("--plot-axis", sw.plot_axis, "n_rate|log_p")
      ->check(CLI::IsMember({"n_rate", "log_p"}))
      ->capture_default_str();
  sweep->add_option("--threads", sw.threads, "Worker threads")->capture_default_str();
  sweep->add_flag("--timing", sw.timing, "Record estimator wall time (makes the CSV run-dependent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kUsageError;
  }

  if (generate->parsed()) {
    const PrecisionModel model = build_omega({gen.alpha, gen.rho, gen.p});
    with_output(gen.out, [&](std::ostream& o) { write_matrix_csv(o, model.omega().to_matrix()); });
  } else if (sample_cmd->parsed()) {
    const PrecisionModel model = build_omega({smp.alpha, smp.rho, smp.p});
    const Matrix x = sample(model, smp.n, smp.seed);
    with_output(smp.out, [&](std::ostream& o) { write_matrix_csv(o, x); });
  } else if (estimate_cmd->parsed()) {
    if (!est.k && !est.alpha) {
      std::cerr << "estimate: one of --k or --alpha is required\n" << estimate_cmd->help();
      return kUsageError;
    }
    const Matrix x = read_matrix_csv(est.input);
    const SymMatrix sigma_hat = empirical_covariance(x);
    const std::size_t k =
        est.k ? *est.k : std::min(default_bandwidth(x.rows(), *est.alpha), sigma_hat.dim());
    const SymMatrix omega_hat = estimate(sigma_hat, {k, parse_mode(est.mode), est.ridge});
    with_output(est.out, [&](std::ostream& o) { write_matrix_csv(o, omega_hat.to_matrix()); });
  } else if (diagnose->parsed()) {
    const PrecisionModel model = build_omega({diag.alpha, diag.rho, diag.p});
    const CorrectionReport report = correction_decay_report(model, diag.ms);
    with_output(diag.out, [&](std::ostream& o) { write_correction_csv(o, report); });
    std::cerr << "fitted_slope=" << format_double(report.fitted_slope) << '\n';
    if (!diag.ks.empty()) {
      with_output(diag.outside_out, [&](std::ostream& o) {
        o << "k,spec_norm,l1_norm,half_band_tail\n";
        for (std::size_t k : diag.ks) {
          const OutsideBandNorms r = outside_band_norm(model.omega(), k);
          o << k << ',' << format_double(r.spec_norm) << ',' << format_double(r.l1_norm) << ','
            << format_double(r.half_band_tail) << '\n';
        }
      });
    }
  } else if (sweep->parsed()) {
    ExperimentPlan plan;
    plan.alphas = sw.alphas;
    plan.ns = sw.ns;
    plan.ps = sw.ps;
    plan.trials = sw.trials;
    plan.base_seed = sw.seed;
    plan.rho_amp = sw.rho;
    plan.mode = parse_mode(sw.mode);
    plan.k_override = sw.k;
    plan.record_timing = sw.timing;
    plan.threads = sw.threads;
    const SweepResult result = run_sweep(plan);
    write_csv(result.records, sw.out);
    if (!sw.plot.empty() && !result.records.empty()) {
      render_plot(result.records, parse_axis(sw.plot_axis), sw.plot);
    }
    for (const auto& f : result.failures) {
      std::cerr << "failed: alpha=" << format_double(f.alpha) << " n=" << f.n << " p=" << f.p
                << " trial=" << f.trial << " seed=" << f.seed << ": " << f.message << '\n';
    }
    if (!result.failures.empty()) return kNumericalError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const bandprec::NotPositiveDefinite& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const bandprec::DegenerateUpdate& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
}
