#pragma once

#include <cstddef>
#include <vector>

#include "ylg/mask.hpp"

namespace ylg {

// Bijection between grid cells and 1-D ranks. Cells are addressed by their
// row-major index r * width + c.
struct GridEnumeration {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::size_t> rank_of;  // row-major cell index -> rank
  std::vector<std::size_t> cell_of;  // rank -> row-major cell index

  std::size_t size() const { return height * width; }
  std::size_t rank(std::size_t row, std::size_t col) const { return rank_of[row * width + col]; }
};

// rank = row * width + col.
GridEnumeration row_major(std::size_t height, std::size_t width);

// Cells ordered by (manhattan distance to (0,0), row, col) ascending.
GridEnumeration esa_enumeration(std::size_t height, std::size_t width);

// Re-indexes a square mask over h*w tokens so that the 1-D pattern is read
// through the enumeration: out(i, j) = mask(rank_of(cell_i), rank_of(cell_j))
// with cell_i the row-major cell of token i. Applying row_major is the
// identity.
AttentionMask apply_enumeration(const AttentionMask& mask, const GridEnumeration& e);

// apply_enumeration on every step; conjugation by a common permutation, so
// reachability and per-step true counts are preserved.
PatternFactorization apply_esa_to_factorization(const PatternFactorization& f,
                                                const GridEnumeration& e);

}  // namespace ylg
