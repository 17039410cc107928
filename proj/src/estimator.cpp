#include "bandprec/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "bandprec/errors.hpp"

namespace bandprec {

namespace {

std::string window_context(std::size_t m, std::ptrdiff_t l) {
  std::ostringstream os;
  os << "window (m=" << m << ", l=" << l << ")";
  return os.str();
}

SymMatrix invert_window(const SymMatrix& sigma_hat, const WindowSpec& w, double ridge) {
  SymMatrix win = sigma_hat.principal(w.win_start, w.win_end);
  if (ridge > 0.0) {
    for (std::size_t i = 0; i < win.dim(); ++i) win.add(i, i, ridge);
  }
  try {
    return invert_spd(win);
  } catch (const NotPositiveDefinite& e) {
    throw NotPositiveDefinite(window_context(w.m, w.l) + ": " + e.what());
  }
}

void check_block_size(std::size_t m) {
  if (m == 0) throw DimensionError("block size m must be >= 1");
}

void check_ridge(double ridge) {
  if (!(ridge >= 0.0)) throw ParameterError("ridge must be nonnegative");
}

SymMatrix blockwise_sum_naive(const SymMatrix& sigma_hat, std::size_t m, double ridge) {
  return accumulate_blocks(sigma_hat.dim(), m, [&](const WindowSpec& w) {
    return invert_window(sigma_hat, w, ridge).principal(w.target_offset(),
                                                        w.target_offset() + w.target_size());
  });
}

// Slides one running window inverse across the offsets. Each step deletes
// the leading index before appending the trailing one, so intermediates are
// principal submatrices of SPD windows; a one-element window appends first.
SymMatrix blockwise_sum_fast(const SymMatrix& sigma_hat, std::size_t m, double ridge) {
  const std::size_t p = sigma_hat.dim();
  SymMatrix sum(p);
  const auto [first, last] = offset_range(p, m);

  WindowSpec cur = window_spec(p, m, first);
  SymMatrix inv = invert_window(sigma_hat, cur, ridge);
  for (std::ptrdiff_t l = first;; ++l) {
    if (cur.target_size() > 0) {
      sum.add_block(cur.tgt_start, inv.principal(cur.target_offset(),
                                                 cur.target_offset() + cur.target_size()));
    }
    if (l == last) break;

    const WindowSpec next = window_spec(p, m, l + 1);
    std::size_t start = cur.win_start;
    std::size_t end = cur.win_end;
    auto append = [&] {
      const auto row = sigma_hat.row(end);
      inv = inverse_append_trailing(inv, row.subspan(start, end - start), row[end] + ridge);
      ++end;
    };
    auto drop = [&] {
      inv = inverse_delete_leading(inv);
      ++start;
    };
    try {
      if (end - start == 1 && end < next.win_end) append();
      while (start < next.win_start) drop();
      while (end < next.win_end) append();
    } catch (const DegenerateUpdate&) {
      inv = invert_window(sigma_hat, next, ridge);
    }
    cur = next;
  }
  return sum;
}

}  // namespace

Mode parse_mode(std::string_view name) {
  if (name == "naive") return Mode::naive;
  if (name == "fast") return Mode::fast;
  throw ParameterError("unknown mode '" + std::string(name) + "' (expected naive|fast)");
}

std::string_view to_string(Mode mode) { return mode == Mode::naive ? "naive" : "fast"; }

WindowSpec window_spec(std::size_t p, std::size_t m, std::ptrdiff_t l) {
  const auto pp = static_cast<std::ptrdiff_t>(p);
  const auto mm = static_cast<std::ptrdiff_t>(m);
  auto clip = [pp](std::ptrdiff_t v) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, pp));
  };
  WindowSpec w;
  w.l = l;
  w.m = m;
  w.win_start = clip(l - mm);
  w.win_end = std::max(w.win_start, clip(l + 2 * mm));
  w.tgt_start = std::clamp(clip(l), w.win_start, w.win_end);
  w.tgt_end = std::clamp(clip(l + mm), w.tgt_start, w.win_end);
  return w;
}

std::size_t taper_multiplicity(std::size_t k) { return k - k / 2; }

double taper_weight(std::size_t d, std::size_t k) {
  const auto pos = [](std::ptrdiff_t v) { return v > 0 ? v : 0; };
  const auto dd = static_cast<std::ptrdiff_t>(d);
  const auto wide = pos(static_cast<std::ptrdiff_t>(k) - dd);
  const auto narrow = pos(static_cast<std::ptrdiff_t>(k / 2) - dd);
  return static_cast<double>(wide - narrow) / static_cast<double>(taper_multiplicity(k));
}

BlockInverse block_inverse(const SymMatrix& sigma_hat, std::size_t m, std::ptrdiff_t l,
                           double ridge) {
  check_block_size(m);
  check_ridge(ridge);
  const WindowSpec w = window_spec(sigma_hat.dim(), m, l);
  if (w.target_size() == 0) return {w, SymMatrix(0)};
  const SymMatrix inv = invert_window(sigma_hat, w, ridge);
  return {w, inv.principal(w.target_offset(), w.target_offset() + w.target_size())};
}

SymMatrix blockwise_sum(const SymMatrix& sigma_hat, std::size_t m, Mode mode, double ridge) {
  check_block_size(m);
  check_ridge(ridge);
  return mode == Mode::naive ? blockwise_sum_naive(sigma_hat, m, ridge)
                             : blockwise_sum_fast(sigma_hat, m, ridge);
}

SymMatrix extraction_sum(const SymMatrix& omega, std::size_t m) {
  check_block_size(m);
  return accumulate_blocks(omega.dim(), m, [&](const WindowSpec& w) {
    return omega.principal(w.tgt_start, w.tgt_end);
  });
}

SymMatrix taper_combine(const SymMatrix& wide, const SymMatrix& narrow, std::size_t k) {
  SymMatrix out = wide - narrow;
  out /= static_cast<double>(taper_multiplicity(k));
  return out;
}

SymMatrix estimate(const SymMatrix& sigma_hat, const EstimatorConfig& config) {
  const std::size_t p = sigma_hat.dim();
  if (config.k < 2 || config.k > p) {
    std::ostringstream os;
    os << "bandwidth k=" << config.k << " must satisfy 2 <= k <= p=" << p;
    throw ParameterError(os.str());
  }
  const SymMatrix wide = blockwise_sum(sigma_hat, config.k, config.mode, config.ridge);
  const SymMatrix narrow = blockwise_sum(sigma_hat, config.k / 2, config.mode, config.ridge);
  return taper_combine(wide, narrow, config.k);
}

std::size_t default_bandwidth(std::size_t n, double alpha) {
  if (n == 0) throw ParameterError("sample count must be >= 1");
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  const double root = std::pow(static_cast<double>(n), 1.0 / (2.0 * alpha + 1.0));
  // Nudge exact integer roots that pow() lands just below.
  const auto k = static_cast<std::size_t>(std::floor(root * (1.0 + 1e-12)));
  return std::max<std::size_t>(2, k);
}

TaperSplit taper_apply(const SymMatrix& omega, std::size_t k) {
  if (k < 2) throw ParameterError("bandwidth k must be >= 2");
  const std::size_t p = omega.dim();
  SymMatrix inside(p);
  SymMatrix outside(p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      const double v = omega(i, j);
      const double in = v * taper_weight(j - i, k);
      inside.set(i, j, in);
      outside.set(i, j, v - in);
    }
  }
  return {std::move(inside), std::move(outside)};
}

}  // namespace bandprec
