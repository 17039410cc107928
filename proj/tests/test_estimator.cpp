#include <doctest.h>

#include <cmath>
#include <string>

#include "bandprec/diagnostics.hpp"
#include "bandprec/errors.hpp"
#include "bandprec/estimator.hpp"
#include "bandprec/model.hpp"
#include "oracles.hpp"

using namespace bandprec;

namespace {

// Window inverse computed without the library's Cholesky.
SymMatrix direct_window_inverse(const SymMatrix& s, std::size_t begin, std::size_t end) {
  return oracle::gauss_jordan_inverse(s.principal(begin, end));
}

bool banded(const SymMatrix& a, std::size_t k) {
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if ((i > j ? i - j : j - i) >= k && a(i, j) != 0.0) return false;
  return true;
}

}  // namespace

TEST_CASE("taper_weight") {
  CHECK(taper_weight(0, 4) == 1.0);
  CHECK(taper_weight(1, 4) == 1.0);
  CHECK(taper_weight(2, 4) == 1.0);
  CHECK(taper_weight(3, 4) == 0.5);
  CHECK(taper_weight(4, 4) == 0.0);
  CHECK(taper_weight(5, 4) == 0.0);

  SUBCASE("shape for every k") {
    for (std::size_t k = 2; k <= 21; ++k) {
      const std::size_t h = k / 2;
      for (std::size_t d = 0; d < h; ++d) CHECK(taper_weight(d, k) == 1.0);
      for (std::size_t d = h; d < k; ++d) {
        CHECK(taper_weight(d, k) <= 1.0);
        CHECK(taper_weight(d + 1, k) < taper_weight(d, k));
        // Linear: constant decrement on [h, k].
        CHECK(taper_weight(d, k) - taper_weight(d + 1, k) ==
              doctest::Approx(1.0 / static_cast<double>(k - h)));
      }
      CHECK(taper_weight(k, k) == 0.0);
      CHECK(taper_weight(k + 3, k) == 0.0);
    }
  }
}

TEST_CASE("window_spec clipping") {
  const auto w = window_spec(4, 2, -1);
  CHECK(w.win_start == 0);
  CHECK(w.win_end == 3);
  CHECK(w.tgt_start == 0);
  CHECK(w.tgt_end == 1);
  CHECK(w.target_offset() == 0);

  const auto e = window_spec(4, 2, 3);
  CHECK(e.win_start == 1);
  CHECK(e.win_end == 4);
  CHECK(e.tgt_start == 3);
  CHECK(e.tgt_end == 4);

  SUBCASE("invariants over all offsets") {
    for (std::size_t p : {1u, 2u, 7u, 20u}) {
      for (std::size_t m = 1; m <= 8; ++m) {
        for (std::ptrdiff_t l = -3 * static_cast<std::ptrdiff_t>(m); l < static_cast<std::ptrdiff_t>(p) + 5; ++l) {
          const auto s = window_spec(p, m, l);
          CHECK(s.win_start <= s.tgt_start);
          CHECK(s.tgt_start <= s.tgt_end);
          CHECK(s.tgt_end <= s.win_end);
          CHECK(s.win_end <= p);
          if (s.target_size() > 0) {
            const auto mm = static_cast<std::ptrdiff_t>(m);
            CHECK(static_cast<std::ptrdiff_t>(s.target_offset()) ==
                  std::max<std::ptrdiff_t>(l, 0) - std::max<std::ptrdiff_t>(l - mm, 0));
          }
        }
      }
    }
  }
}

TEST_CASE("block_inverse") {
  SUBCASE("identity") {
    const auto b = block_inverse(SymMatrix::identity(6), 2, 2);
    CHECK(b.window.tgt_start == 2);
    CHECK(b.window.tgt_end == 4);
    CHECK(b.block == SymMatrix::identity(2));
  }
  const auto s = oracle::random_spd(4, 21, 50.0);
  SUBCASE("leading clip") {
    const auto b = block_inverse(s, 2, -1);
    REQUIRE(b.block.dim() == 1);
    CHECK(b.block(0, 0) == doctest::Approx(direct_window_inverse(s, 0, 3)(0, 0)).epsilon(1e-12));
  }
  SUBCASE("trailing clip") {
    const auto b = block_inverse(s, 2, 3);
    REQUIRE(b.block.dim() == 1);
    CHECK(b.block(0, 0) == doctest::Approx(direct_window_inverse(s, 1, 4)(2, 2)).epsilon(1e-12));
  }
  SUBCASE("empty target") {
    const auto b = block_inverse(s, 2, 10);
    CHECK(b.block.dim() == 0);
  }
  SUBCASE("singular window names m and l") {
    SymMatrix sing = SymMatrix::identity(6);
    sing.set(3, 3, 0.0);
    try {
      block_inverse(sing, 2, 2);
      FAIL("expected NotPositiveDefinite");
    } catch (const NotPositiveDefinite& e) {
      const std::string msg = e.what();
      CHECK(msg.find("m=2") != std::string::npos);
      CHECK(msg.find("l=2") != std::string::npos);
    }
  }
  SUBCASE("ridge lifts the window") {
    const auto b = block_inverse(SymMatrix::identity(5), 2, 1, 1.0);
    CHECK(b.block(0, 0) == doctest::Approx(0.5));
  }
}

TEST_CASE("blockwise_sum") {
  SUBCASE("identity: every index covered by m blocks") {
    for (Mode mode : {Mode::naive, Mode::fast}) {
      for (std::size_t p : {1u, 3u, 9u}) {
        for (std::size_t m = 1; m <= 5; ++m) {
          const auto sum = blockwise_sum(SymMatrix::identity(p), m, mode);
          for (std::size_t i = 0; i < p; ++i) {
            // Brute-force count of offsets whose target covers i.
            std::size_t covered = 0;
            for (std::ptrdiff_t l = 1 - static_cast<std::ptrdiff_t>(m); l < static_cast<std::ptrdiff_t>(p); ++l) {
              const auto ii = static_cast<std::ptrdiff_t>(i);
              if (l <= ii && ii < l + static_cast<std::ptrdiff_t>(m)) ++covered;
            }
            CHECK(covered == m);
            CHECK(sum(i, i) == doctest::Approx(static_cast<double>(m)).epsilon(1e-14));
            for (std::size_t j = 0; j < p; ++j)
              if (j != i) CHECK(std::abs(sum(i, j)) <= 1e-14);
          }
        }
      }
    }
  }
  SUBCASE("naive and fast agree on random SPD") {
    const auto s = oracle::random_spd(40, 13, 1e3);
    CHECK(max_abs_diff(blockwise_sum(s, 4, Mode::naive), blockwise_sum(s, 4, Mode::fast)) <= 1e-8);
  }
  SUBCASE("p = 1 clipped windows") {
    const auto s = SymMatrix::diagonal({4.0});
    CHECK(blockwise_sum(s, 1, Mode::naive)(0, 0) == 0.25);
    CHECK(blockwise_sum(s, 2, Mode::naive)(0, 0) == 0.5);
    CHECK(blockwise_sum(s, 2, Mode::fast)(0, 0) == 0.5);
  }
  SUBCASE("fast path recovers from degenerate updates") {
    // Absolute Schur threshold trips at this scale; the relative Cholesky
    // threshold does not, so every step re-initializes.
    const auto s = 1e-16 * oracle::random_spd(15, 4, 10.0);
    const auto naive = blockwise_sum(s, 3, Mode::naive);
    const auto fast = blockwise_sum(s, 3, Mode::fast);
    CHECK(max_abs_diff(naive, fast) <= 1e-12 * max_abs(naive));
  }
  SUBCASE("zero block size rejected") {
    CHECK_THROWS_AS(blockwise_sum(SymMatrix::identity(3), 0, Mode::naive), DimensionError);
    CHECK_THROWS_AS(blockwise_sum(SymMatrix::identity(3), 2, Mode::naive, -1.0), ParameterError);
  }
}

TEST_CASE("estimate") {
  SUBCASE("identity input is a fixed point") {
    for (std::size_t p : {4u, 9u, 20u}) {
      for (std::size_t k = 2; k <= p; ++k) {
        for (Mode mode : {Mode::naive, Mode::fast}) {
          const auto est = estimate(SymMatrix::identity(p), {k, mode, 0.0});
          CHECK(max_abs_diff(est, SymMatrix::identity(p)) <= 1e-12);
        }
      }
    }
  }
  SUBCASE("bandwidth errors") {
    CHECK_THROWS_AS(estimate(SymMatrix::identity(5), {1, Mode::fast, 0.0}), ParameterError);
    CHECK_THROWS_AS(estimate(SymMatrix::identity(5), {6, Mode::fast, 0.0}), ParameterError);
  }
  SUBCASE("exact covariance: tapered Omega minus the tapered correction") {
    const auto model = build_omega({0.5, 0.6, 30});
    const std::size_t k = 6;
    const auto est = estimate(model.sigma(), {k, Mode::naive, 0.0});
    const auto inside = taper_apply(model.omega(), k).inside;
    // Sum the correction blocks with the same placement as the estimator.
    auto correction_sum = [&](std::size_t m) {
      return accumulate_blocks(30, m, [&](const WindowSpec& w) {
        return correction_term(model, w.l, m);
      });
    };
    const auto expected = inside - taper_combine(correction_sum(k), correction_sum(k / 2), k);
    CHECK(max_abs_diff(est, expected) <= 1e-10);
    CHECK(banded(est, k));
    // The correction is small relative to Omega.
    CHECK(max_abs_diff(est, inside) < 0.1);
  }
  SUBCASE("naive and fast agree on a sampled covariance") {
    const auto model = build_omega({0.5, 0.6, 50});
    const auto s = empirical_covariance(sample(model, 200, 1));
    for (std::size_t k : {4u, 8u, 14u}) {
      const auto a = estimate(s, {k, Mode::naive, 0.0});
      const auto b = estimate(s, {k, Mode::fast, 0.0});
      CHECK(max_abs_diff(a, b) <= 1e-8);
      CHECK(oracle::exactly_symmetric(a));
      CHECK(oracle::exactly_symmetric(b));
      CHECK(banded(a, k));
      CHECK(banded(b, k));
    }
  }
  SUBCASE("mode equivalence with ridge") {
    const auto s = oracle::random_spd(25, 77, 100.0);
    const auto a = estimate(s, {5, Mode::naive, 0.3});
    const auto b = estimate(s, {5, Mode::fast, 0.3});
    CHECK(max_abs_diff(a, b) <= 1e-8);
  }
}

TEST_CASE("mode equivalence property") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const std::size_t p = 8 + (seed * 13) % 57;
    const auto s = oracle::random_spd(p, seed, 1e4);
    for (std::size_t k : {2u, 4u, 8u}) {
      CHECK(max_abs_diff(estimate(s, {k, Mode::naive, 0.0}), estimate(s, {k, Mode::fast, 0.0})) <= 1e-8);
    }
  }
}

TEST_CASE("block extraction reproduces the taper") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    for (std::size_t p : {13u, 30u}) {
      const auto omega = oracle::random_symmetric(p, seed * 31 + p);
      for (std::size_t k : {2u, 3u, 4u, 5u, 6u, 7u}) {
        const auto avg = taper_combine(extraction_sum(omega, k), extraction_sum(omega, k / 2), k);
        CHECK(max_abs_diff(avg, taper_apply(omega, k).inside) <= 1e-12);
      }
    }
  }
}

TEST_CASE("default_bandwidth") {
  CHECK(default_bandwidth(1000, 0.5) == 31);
  CHECK(default_bandwidth(250, 0.2) == 51);
  CHECK(default_bandwidth(2, 1.0) == 2);
  CHECK(default_bandwidth(1024, 0.5) == 32);
  CHECK(default_bandwidth(500, 0.5) == 22);
  CHECK_THROWS_AS(default_bandwidth(0, 0.5), ParameterError);
  CHECK_THROWS_AS(default_bandwidth(10, 0.0), ParameterError);
}

TEST_CASE("taper_apply") {
  const auto id = taper_apply(SymMatrix::identity(7), 3);
  CHECK(id.inside == SymMatrix::identity(7));
  CHECK(max_abs(id.outside) == 0.0);

  SymMatrix tri(8);
  for (std::size_t i = 0; i < 8; ++i) {
    tri.set(i, i, 2.0);
    if (i + 1 < 8) tri.set(i, i + 1, -1.0);
  }
  const auto t = taper_apply(tri, 4);
  CHECK(max_abs(t.outside) == 0.0);
  CHECK(t.inside == tri);

  const auto model = build_omega({0.5, 0.6, 10});
  const auto split = taper_apply(model.omega(), 4);
  CHECK(split.inside + split.outside == model.omega());
  CHECK(split.outside(0, 3) == doctest::Approx(0.5 * model.omega()(0, 3)));
  CHECK(split.inside(0, 5) == 0.0);
}

TEST_CASE("parse_mode") {
  CHECK(parse_mode("naive") == Mode::naive);
  CHECK(parse_mode("fast") == Mode::fast);
  CHECK(to_string(Mode::fast) == "fast");
  CHECK_THROWS_AS(parse_mode("slow"), ParameterError);
}
