#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ylg/mask.hpp"

namespace ylg {

// ceil(sqrt(n)); the stride used when a caller passes stride = 0.
std::size_t default_stride(std::size_t n);

// Two-step sparsifications over n tokens with block size `stride`.
// All constructors force the diagonal of every square step mask, so no
// softmax row is empty and mask reachability matches the structural
// dependence of the attention composition (the query path contributes
// exactly the diagonal).
//
// fixed:   step 1 attends the causal prefix of the own block,
//          step 2 attends every earlier block-final token. Not
//          full-information.
// ltr:     bidirectional extension of fixed (whole own block, then every
//          block-final token). Full information.
// rtl:     transposed counterpart of ltr: each step transposed and the
//          step order swapped, which transposes reachability.
// strided: causal window of width stride, then every stride-th earlier
//          token. Not full-information.
// strided_full: bidirectional window |a-b| < stride, then all tokens with
//          |a-b| % stride == 0. Full information.
//
// An omitted stride selects default_stride(n); an explicit stride outside
// [1, n] (or n = 0) throws std::invalid_argument.
using Stride = std::optional<std::size_t>;

PatternFactorization make_fixed(std::size_t n, Stride stride = std::nullopt);
PatternFactorization make_ltr(std::size_t n, Stride stride = std::nullopt);
PatternFactorization make_rtl(std::size_t n, Stride stride = std::nullopt);
PatternFactorization make_strided(std::size_t n, Stride stride = std::nullopt);
PatternFactorization make_strided_full(std::size_t n, Stride stride = std::nullopt);

PatternFactorization make_pattern(PatternName name, std::size_t n, Stride stride = std::nullopt);

// Replicates the final step mask to query_count rows (row q = row q mod n),
// so each block of n query rows deploys the square pattern against the n
// keys. query_count must be a multiple of f.n.
PatternFactorization expand_nonsquare(const PatternFactorization& f, std::size_t query_count);

// The 8-head deployment: [ltr.1, ltr.2, rtl.1, rtl.2] twice, one step per
// parallel head.
std::vector<std::pair<std::size_t, AttentionMask>> head_assignment(std::size_t n,
                                                                   Stride stride = std::nullopt);

}  // namespace ylg
