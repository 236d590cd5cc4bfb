#include "ylg/grid.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ylg {

namespace {

void check_dims(std::size_t height, std::size_t width) {
  if (height == 0 || width == 0)
    throw std::invalid_argument("enumeration: grid dimensions must be at least 1");
}

GridEnumeration from_cell_order(std::size_t height, std::size_t width,
                                std::vector<std::size_t> cell_of) {
  GridEnumeration e;
  e.height = height;
  e.width = width;
  e.cell_of = std::move(cell_of);
  e.rank_of.assign(height * width, 0);
  for (std::size_t r = 0; r < e.cell_of.size(); ++r) e.rank_of[e.cell_of[r]] = r;
  return e;
}

}  // namespace

GridEnumeration row_major(std::size_t height, std::size_t width) {
  check_dims(height, width);
  std::vector<std::size_t> cells(height * width);
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  return from_cell_order(height, width, std::move(cells));
}

GridEnumeration esa_enumeration(std::size_t height, std::size_t width) {
  check_dims(height, width);
  std::vector<std::size_t> cells(height * width);
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  std::sort(cells.begin(), cells.end(), [width](std::size_t lhs, std::size_t rhs) {
    std::size_t lr = lhs / width, lc = lhs % width;
    std::size_t rr = rhs / width, rc = rhs % width;
    std::size_t ld = lr + lc, rd = rr + rc;
    if (ld != rd) return ld < rd;
    if (lr != rr) return lr < rr;
    return lc < rc;
  });
  return from_cell_order(height, width, std::move(cells));
}

AttentionMask apply_enumeration(const AttentionMask& mask, const GridEnumeration& e) {
  if (!mask.square() || mask.n_query != e.size())
    throw std::invalid_argument("apply_enumeration: mask must be square with side height*width");
  AttentionMask out(mask.n_query, mask.n_key);
  for (std::size_t i = 0; i < out.n_query; ++i) {
    std::size_t ri = e.rank_of[i];
    for (std::size_t j = 0; j < out.n_key; ++j)
      if (mask.at(ri, e.rank_of[j])) out.set(i, j);
  }
  return out;
}

PatternFactorization apply_esa_to_factorization(const PatternFactorization& f,
                                                const GridEnumeration& e) {
  PatternFactorization out = f;
  for (auto& step : out.steps) step = apply_enumeration(step, e);
  return out;
}

}  // namespace ylg
