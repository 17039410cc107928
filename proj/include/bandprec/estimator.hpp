#pragma once

// Blockwise inversion tapering estimator of a banded precision matrix.
//
// For a block size m and every offset l in {1-m, ..., p-1}, the window
// [l-m, l+2m) of the sample covariance (clipped to [0, p)) is inverted and
// only the central target block [l, l+m) (also clipped) is kept. Summing the
// target blocks for m = k and m = floor(k/2) and taking the scaled difference
// gives a linearly tapered band estimate with bandwidth k.

#include <cstddef>
#include <string_view>
#include <utility>

#include "bandprec/matrix.hpp"

namespace bandprec {

enum class Mode { naive, fast };

Mode parse_mode(std::string_view name);
std::string_view to_string(Mode mode);

struct EstimatorConfig {
  std::size_t k = 2;
  Mode mode = Mode::fast;
  /// Added to every window diagonal before inversion. Zero disables it.
  double ridge = 0.0;
};

/// Clipped window and target ranges for one (m, l) pair. All ranges are
/// half-open, zero-based.
struct WindowSpec {
  std::ptrdiff_t l = 0;
  std::size_t m = 0;
  std::size_t win_start = 0;
  std::size_t win_end = 0;
  std::size_t tgt_start = 0;
  std::size_t tgt_end = 0;

  std::size_t window_size() const { return win_end - win_start; }
  std::size_t target_size() const { return tgt_end - tgt_start; }
  /// Position of the target block inside the window.
  std::size_t target_offset() const { return tgt_start - win_start; }
};

WindowSpec window_spec(std::size_t p, std::size_t m, std::ptrdiff_t l);

/// Offsets visited for block size m: [1-m, p-1].
inline std::pair<std::ptrdiff_t, std::ptrdiff_t> offset_range(std::size_t p, std::size_t m) {
  return {1 - static_cast<std::ptrdiff_t>(m), static_cast<std::ptrdiff_t>(p) - 1};
}

/// Sums per-offset target blocks produced by `block_fn(WindowSpec)` into a
/// p x p matrix, in increasing l.
template <class BlockFn>
SymMatrix accumulate_blocks(std::size_t p, std::size_t m, BlockFn&& block_fn) {
  SymMatrix sum(p);
  const auto [first, last] = offset_range(p, m);
  for (std::ptrdiff_t l = first; l <= last; ++l) {
    const WindowSpec w = window_spec(p, m, l);
    if (w.target_size() == 0) continue;
    sum.add_block(w.tgt_start, block_fn(w));
  }
  return sum;
}

/// Weight applied to an entry at distance d from the diagonal: 1 below
/// floor(k/2), linear down to 0 at k, 0 beyond.
double taper_weight(std::size_t d, std::size_t k);

/// Normalizer of the two-bandwidth difference: ceil(k/2), i.e. k/2 for even k.
std::size_t taper_multiplicity(std::size_t k);

struct BlockInverse {
  WindowSpec window;
  SymMatrix block;  // target_size() x target_size()
};

/// Inverts the clipped window (plus ridge) and returns its target block.
/// NotPositiveDefinite carries (m, l) in the message.
BlockInverse block_inverse(const SymMatrix& sigma_hat, std::size_t m, std::ptrdiff_t l,
                           double ridge = 0.0);

/// Sum of all target blocks for block size m.
SymMatrix blockwise_sum(const SymMatrix& sigma_hat, std::size_t m, Mode mode,
                        double ridge = 0.0);

/// Same index machinery as blockwise_sum, but the target block is copied
/// from `omega` instead of obtained by inversion.
SymMatrix extraction_sum(const SymMatrix& omega, std::size_t m);

/// (wide - narrow) / ceil(k/2).
SymMatrix taper_combine(const SymMatrix& wide, const SymMatrix& narrow, std::size_t k);

SymMatrix estimate(const SymMatrix& sigma_hat, const EstimatorConfig& config);

/// max(2, floor(n^(1/(2 alpha + 1)))).
std::size_t default_bandwidth(std::size_t n, double alpha);

struct TaperSplit {
  SymMatrix inside;
  SymMatrix outside;
};

TaperSplit taper_apply(const SymMatrix& omega, std::size_t k);

}  // namespace bandprec
