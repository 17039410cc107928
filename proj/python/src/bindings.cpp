#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "bandprec/diagnostics.hpp"
#include "bandprec/errors.hpp"
#include "bandprec/estimator.hpp"
#include "bandprec/harness.hpp"
#include "bandprec/model.hpp"

namespace py = pybind11;
using namespace bandprec;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-D array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

SymMatrix to_sym(const Array& a) {
  const Matrix m = to_matrix(a);
  if (m.rows() != m.cols()) throw DimensionError("expected a square array");
  return SymMatrix::from_full(m);
}

Array to_array(std::span<const double> data, std::size_t rows, std::size_t cols) {
  Array out({rows, cols});
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

Array to_array(const SymMatrix& s) { return to_array(s.data(), s.dim(), s.dim()); }
Array to_array(const Matrix& m) { return to_array(m.data(), m.rows(), m.cols()); }

py::dict record_dict(const TrialRecord& r) {
  py::dict d;
  d["alpha"] = r.alpha;
  d["n"] = r.n;
  d["p"] = r.p;
  d["k"] = r.k;
  d["trial"] = r.trial;
  d["seed"] = r.seed;
  d["sq_spectral_error"] = r.sq_spectral_error;
  d["elapsed_ms"] = r.elapsed_ms;
  return d;
}

}  // namespace

PYBIND11_MODULE(_bandprec, m) {
  m.doc() = "Banded precision matrix estimation by blockwise inversion";

  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefiniteError", PyExc_ArithmeticError);
  py::register_exception<DegenerateUpdate>(m, "DegenerateUpdateError", PyExc_ArithmeticError);

  m.def(
      "build_omega",
      [](double alpha, std::size_t p, double rho) {
        return to_array(build_omega({alpha, rho, p}).omega());
      },
      py::arg("alpha"), py::arg("p"), py::arg("rho") = 0.6,
      "Power-law precision matrix with unit diagonal.");

  m.def(
      "sample",
      [](double alpha, std::size_t p, std::size_t n, std::uint64_t seed, double rho) {
        const PrecisionModel model = build_omega({alpha, rho, p});
        Matrix x = [&] {
          py::gil_scoped_release release;
          return sample(model, n, seed);
        }();
        return to_array(x);
      },
      py::arg("alpha"), py::arg("p"), py::arg("n"), py::arg("seed") = 1, py::arg("rho") = 0.6,
      "n Gaussian observations from the power-law model.");

  m.def(
      "empirical_covariance", [](const Array& x) { return to_array(empirical_covariance(to_matrix(x))); },
      py::arg("x"));

  m.def(
      "estimate",
      [](const Array& sigma_hat, std::size_t k, const std::string& mode, double ridge) {
        const SymMatrix s = to_sym(sigma_hat);
        const EstimatorConfig config{k, parse_mode(mode), ridge};
        SymMatrix out = [&] {
          py::gil_scoped_release release;
          return estimate(s, config);
        }();
        return to_array(out);
      },
      py::arg("sigma_hat"), py::arg("k"), py::arg("mode") = "fast", py::arg("ridge") = 0.0,
      "Tapered banded precision estimate from a sample covariance.");

  m.def("default_bandwidth", &default_bandwidth, py::arg("n"), py::arg("alpha"));

  m.def(
      "taper_apply",
      [](const Array& omega, std::size_t k) {
        const TaperSplit split = taper_apply(to_sym(omega), k);
        return py::make_tuple(to_array(split.inside), to_array(split.outside));
      },
      py::arg("omega"), py::arg("k"));

  m.def(
      "spectral_norm", [](const Array& a) { return spectral_norm(to_sym(a)); }, py::arg("a"));

  m.def(
      "correction_decay_report",
      [](double alpha, std::size_t p, const std::vector<std::size_t>& ms, double rho) {
        const CorrectionReport r = correction_decay_report(build_omega({alpha, rho, p}), ms);
        py::dict d;
        d["m_values"] = r.m_values;
        d["max_norms"] = r.max_norms;
        d["fitted_slope"] = r.fitted_slope;
        return d;
      },
      py::arg("alpha"), py::arg("p"), py::arg("ms") = std::vector<std::size_t>{4, 8, 16, 32},
      py::arg("rho") = 0.6);

  m.def(
      "run_trial",
      [](double alpha, std::size_t n, std::size_t p, std::uint64_t seed, const std::string& mode,
         std::optional<std::size_t> k) {
        return record_dict(run_trial(alpha, n, p, seed, parse_mode(mode), k));
      },
      py::arg("alpha"), py::arg("n"), py::arg("p"), py::arg("seed"), py::arg("mode") = "fast",
      py::arg("k") = py::none());

  m.def(
      "run_sweep",
      [](std::vector<double> alphas, std::vector<std::size_t> ns, std::vector<std::size_t> ps,
         std::size_t trials, std::uint64_t seed, const std::string& mode,
         std::optional<std::size_t> k, unsigned threads) {
        ExperimentPlan plan;
        plan.alphas = std::move(alphas);
        plan.ns = std::move(ns);
        plan.ps = std::move(ps);
        plan.trials = trials;
        plan.base_seed = seed;
        plan.mode = parse_mode(mode);
        plan.k_override = k;
        plan.record_timing = false;
        plan.threads = threads;
        SweepResult res = [&] {
          py::gil_scoped_release release;
          return run_sweep(plan);
        }();
        py::list records;
        for (const auto& r : res.records) records.append(record_dict(r));
        py::list failures;
        for (const auto& f : res.failures) {
          py::dict d;
          d["alpha"] = f.alpha;
          d["n"] = f.n;
          d["p"] = f.p;
          d["trial"] = f.trial;
          d["seed"] = f.seed;
          d["message"] = f.message;
          failures.append(d);
        }
        return py::make_tuple(records, failures);
      },
      py::arg("alphas"), py::arg("ns"), py::arg("ps"), py::arg("trials") = 5, py::arg("seed") = 1,
      py::arg("mode") = "fast", py::arg("k") = py::none(), py::arg("threads") = 1,
      "Returns (records, failures) as lists of dicts. Timing is not recorded.");
}
