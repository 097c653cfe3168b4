#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qgt/matrix.hpp"

namespace qgt {

/// Exact minimum number of combinatorial rectangles R x C contained in the
/// support and covering it (the Boolean rank of the support pattern), a lower
/// bound on nonnegative rank. Exact search is limited to 8x8 supports.
///
/// Candidates are the maximal rectangles {rows(S), S = common support of
/// rows(S)} over row subsets; iterative deepening with a most-constrained-cell
/// branching keeps the search small at this size.
inline std::size_t biclique_cover_number(const DMat& p, double support_tol = 1e-12) {
  const std::size_t m = p.rows, n = p.cols;
  if (m > 8 || n > 8)
    throw std::invalid_argument("biclique_cover_number: exact search limited to 8x8");

  std::vector<std::uint64_t> row_mask(m, 0);  // columns in the support of row i
  std::uint64_t all_cells = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (p(i, j) > support_tol) {
        row_mask[i] |= std::uint64_t(1) << j;
        all_cells |= std::uint64_t(1) << (i * n + j);
      }
  if (all_cells == 0) return 0;

  // Enumerate candidate rectangles as cell masks; keep the maximal ones.
  std::vector<std::uint64_t> rects;
  for (std::uint64_t rs = 1; rs < (std::uint64_t(1) << m); ++rs) {
    std::uint64_t cols = ~std::uint64_t(0);
    for (std::size_t i = 0; i < m; ++i)
      if (rs & (std::uint64_t(1) << i)) cols &= row_mask[i];
    cols &= (n == 64) ? ~std::uint64_t(0) : ((std::uint64_t(1) << n) - 1);
    if (cols == 0) continue;
    // maximal row set for these columns
    std::uint64_t rows_max = 0;
    for (std::size_t i = 0; i < m; ++i)
      if ((row_mask[i] & cols) == cols) rows_max |= std::uint64_t(1) << i;
    std::uint64_t cells = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (rows_max & (std::uint64_t(1) << i)) cells |= cols << (i * n);
    rects.push_back(cells);
  }
  std::sort(rects.begin(), rects.end());
  rects.erase(std::unique(rects.begin(), rects.end()), rects.end());
  // drop non-maximal rectangles
  std::vector<std::uint64_t> maximal;
  for (std::uint64_t a : rects) {
    bool dominated = false;
    for (std::uint64_t b : rects)
      if (a != b && (a & b) == a) {
        dominated = true;
        break;
      }
    if (!dominated) maximal.push_back(a);
  }

  // covers_for[cell] = indices of maximal rectangles containing the cell
  std::vector<std::vector<std::size_t>> covers_for(m * n);
  for (std::size_t r = 0; r < maximal.size(); ++r)
    for (std::size_t cell = 0; cell < m * n; ++cell)
      if (maximal[r] & (std::uint64_t(1) << cell)) covers_for[cell].push_back(r);

  std::function<bool(std::uint64_t, std::size_t)> dfs =
      [&](std::uint64_t uncovered, std::size_t budget) -> bool {
    if (uncovered == 0) return true;
    if (budget == 0) return false;
    // branch on the uncovered cell with the fewest covering rectangles
    std::size_t pick = m * n;
    std::size_t pick_count = ~std::size_t(0);
    for (std::size_t cell = 0; cell < m * n; ++cell) {
      if (!(uncovered & (std::uint64_t(1) << cell))) continue;
      if (covers_for[cell].size() < pick_count) {
        pick_count = covers_for[cell].size();
        pick = cell;
      }
    }
    if (pick == m * n || pick_count == 0) return false;
    for (std::size_t r : covers_for[pick])
      if (dfs(uncovered & ~maximal[r], budget - 1)) return true;
    return false;
  };

  for (std::size_t k = 1; k <= std::min(m, n); ++k)
    if (dfs(all_cells, k)) return k;
  return std::min(m, n);  // row or column cover always works
}

}  // namespace qgt
