#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "bandprec/diagnostics.hpp"
#include "bandprec/errors.hpp"
#include "bandprec/estimator.hpp"
#include "bandprec/model.hpp"
#include "oracles.hpp"

using namespace bandprec;

namespace {

// Omega_TO Omega_OO^{-1} Omega_OT, with O the indices outside the window.
// Inverting the window of Sigma = Omega^{-1} gives the Schur complement of
// Omega_OO, so this is the correction term in closed form.
SymMatrix schur_correction(const SymMatrix& omega, const WindowSpec& w) {
  const std::size_t p = omega.dim();
  std::vector<std::size_t> outside;
  for (std::size_t i = 0; i < p; ++i)
    if (i < w.win_start || i >= w.win_end) outside.push_back(i);
  const std::size_t t = w.target_size();
  SymMatrix out(t);
  if (outside.empty()) return out;

  SymMatrix oo(outside.size());
  for (std::size_t a = 0; a < outside.size(); ++a)
    for (std::size_t b = a; b < outside.size(); ++b) oo.set(a, b, omega(outside[a], outside[b]));
  const SymMatrix oo_inv = oracle::gauss_jordan_inverse(oo);

  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = i; j < t; ++j) {
      double acc = 0.0;
      for (std::size_t a = 0; a < outside.size(); ++a) {
        double row = 0.0;
        for (std::size_t b = 0; b < outside.size(); ++b) row += oo_inv(a, b) * omega(outside[b], w.tgt_start + j);
        acc += omega(w.tgt_start + i, outside[a]) * row;
      }
      out.set(i, j, acc);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("correction_term") {
  SUBCASE("identity precision gives zero") {
    const auto id = make_model(SymMatrix::identity(12));
    for (std::size_t m = 1; m <= 4; ++m)
      for (std::ptrdiff_t l = 1 - static_cast<std::ptrdiff_t>(m); l < 12; ++l)
        CHECK(max_abs(correction_term(id, l, m)) <= 1e-15);
  }
  SUBCASE("reconstructs the target block") {
    const auto model = build_omega({0.5, 0.6, 40});
    const auto sigma = model.sigma();
    for (std::size_t m : {2u, 5u, 8u}) {
      for (std::ptrdiff_t l = 1 - static_cast<std::ptrdiff_t>(m); l < 40; l += 3) {
        const auto w = correction_term(model.omega(), sigma, l, m);
        const auto approx = block_inverse(sigma, m, l);
        const auto& s = approx.window;
        CHECK(max_abs_diff(approx.block + w, model.omega().principal(s.tgt_start, s.tgt_end)) <= 1e-10);
      }
    }
  }
  SUBCASE("matches the explicit Schur form") {
    const auto model = build_omega({0.5, 0.6, 200});
    const auto sigma = model.sigma();
    for (std::size_t m : {4u, 8u, 16u, 32u}) {
      for (std::size_t l : {2 * m, 100 - m / 2, 200 - 3 * m}) {
        const auto spec = window_spec(200, m, static_cast<std::ptrdiff_t>(l));
        const auto w = correction_term(model.omega(), sigma, static_cast<std::ptrdiff_t>(l), m);
        const auto ref = schur_correction(model.omega(), spec);
        CHECK(max_abs_diff(w, ref) <= 1e-8);
        CHECK(std::abs(spectral_norm(w) - oracle::jacobi_spectral_norm(ref)) <= 1e-8);
      }
    }
  }
  SUBCASE("boundary offsets also match") {
    const auto model = build_omega({0.3, 0.6, 30});
    const auto sigma = model.sigma();
    for (std::ptrdiff_t l : {-3, 0, 2, 27, 29}) {
      const auto w = correction_term(model.omega(), sigma, l, 4);
      CHECK(max_abs_diff(w, schur_correction(model.omega(), window_spec(30, 4, l))) <= 1e-8);
    }
  }
  CHECK_THROWS_AS(correction_term(SymMatrix::identity(4), SymMatrix::identity(5), 0, 2), DimensionError);
}

TEST_CASE("correction_decay_report") {
  SUBCASE("identity") {
    const auto r = correction_decay_report(make_model(SymMatrix::identity(40)), {2, 4, 8});
    for (double v : r.max_norms) CHECK(v == 0.0);
    CHECK(std::isnan(r.fitted_slope));
  }
  SUBCASE("power-law model decays") {
    const auto model = build_omega({0.5, 0.6, 256});
    const std::vector<std::size_t> ms{4, 8, 16, 32};
    const auto r = correction_decay_report(model, ms);
    REQUIRE(r.max_norms.size() == 4);
    for (std::size_t i = 1; i < 4; ++i) CHECK(r.max_norms[i] <= r.max_norms[i - 1]);
    CHECK(r.fitted_slope <= -0.5);

    // Spot-check one m by brute force over the interior offsets.
    const auto sigma = model.sigma();
    double worst = 0.0;
    for (std::size_t l = 16; l + 24 <= 256; ++l)
      worst = std::max(worst, oracle::jacobi_spectral_norm(correction_term(model.omega(), sigma, std::ptrdiff_t(l), 8)));
    CHECK(r.max_norms[1] == doctest::Approx(worst).epsilon(1e-9));

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < 4; ++i) {
      lx.push_back(std::log(double(ms[i])));
      ly.push_back(std::log(r.max_norms[i]));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < 4; ++i) mx += lx[i] / 4, my += ly[i] / 4;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < 4; ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    CHECK(r.fitted_slope == doctest::Approx(sxy / sxx).epsilon(1e-12));

    std::ostringstream csv;
    write_correction_csv(csv, r);
    const std::string text = csv.str();
    CHECK(text.rfind("m,max_norm\n4,", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  }
  SUBCASE("errors") {
    const auto model = build_omega({0.5, 0.6, 50});
    CHECK_THROWS_AS(correction_decay_report(model, {4, 11}), InsufficientRange);
    CHECK_THROWS_AS(correction_decay_report(model, {1, 4}), ParameterError);
  }
}

TEST_CASE("block_deviation") {
  const auto id = make_model(SymMatrix::identity(10));
  CHECK(block_deviation(id.sigma(), id.omega(), 3) <= 1e-15);

  const auto model = build_omega({0.5, 0.6, 40});
  const auto sigma = model.sigma();
  for (std::size_t m : {2u, 4u, 7u}) {
    double worst = 0.0;
    for (std::ptrdiff_t l = 1 - std::ptrdiff_t(m); l < 40; ++l)
      worst = std::max(worst, oracle::jacobi_spectral_norm(correction_term(model.omega(), sigma, l, m)));
    CHECK(block_deviation(sigma, model.omega(), m) == doctest::Approx(worst).epsilon(1e-9));
  }

  SUBCASE("max dominates single blocks") {
    const auto s = empirical_covariance(sample(model, 500, 3));
    const double n = block_deviation(s, model.omega(), 5);
    for (std::ptrdiff_t l : {-2, 17, 38}) {
      const auto b = block_inverse(s, 5, l);
      const auto& w = b.window;
      CHECK(n >= oracle::jacobi_spectral_norm(b.block - model.omega().principal(w.tgt_start, w.tgt_end)) - 1e-12);
    }
  }
  CHECK_THROWS_AS(block_deviation(SymMatrix::identity(3), SymMatrix::identity(4), 2), DimensionError);
}

TEST_CASE("outside_band_norm") {
  const auto z = outside_band_norm(SymMatrix::identity(9), 4);
  CHECK(z.spec_norm == 0.0);
  CHECK(z.l1_norm == 0.0);
  CHECK(z.half_band_tail == 0.0);

  SymMatrix tri(10);
  for (std::size_t i = 0; i < 10; ++i) {
    tri.set(i, i, 2.0);
    if (i + 1 < 10) tri.set(i, i + 1, -1.0);
  }
  const auto t = outside_band_norm(tri, 4);
  CHECK(t.spec_norm == 0.0);
  CHECK(t.l1_norm == 0.0);
  CHECK(t.half_band_tail == 0.0);

  const auto model = build_omega({0.5, 0.6, 100});
  const auto r = outside_band_norm(model.omega(), 8);
  CHECK(r.spec_norm <= r.l1_norm * (1 + 1e-12));
  CHECK(r.l1_norm <= r.half_band_tail + 1e-12);
  const auto outside = taper_apply(model.omega(), 8).outside;
  CHECK(r.spec_norm == doctest::Approx(oracle::jacobi_spectral_norm(outside)).epsilon(1e-9));
  double tail = 0.0;
  for (std::size_t i = 0; i < 100; ++i)
    if (i > 4) tail += std::abs(model.omega()(i, 0));
  // Column 0 misses the mirrored half, so the max column is an interior one.
  CHECK(r.half_band_tail >= tail);
}

TEST_CASE("fit_line") {
  const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  const auto g = fit_line({0, 1, 2}, {0, 1, 0});
  CHECK(g.slope == doctest::Approx(0.0));
  CHECK(g.r_squared == doctest::Approx(0.0));
  CHECK_THROWS_AS(fit_line({1}, {1}), ParameterError);
  CHECK_THROWS_AS(fit_line({1, 2}, {1}), ParameterError);
}
