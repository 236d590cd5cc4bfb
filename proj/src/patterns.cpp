#include "ylg/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ylg {

std::string_view to_string(PatternName name) {
  switch (name) {
    case PatternName::Fixed: return "fixed";
    case PatternName::Ltr: return "ltr";
    case PatternName::Rtl: return "rtl";
    case PatternName::Strided: return "strided";
    case PatternName::StridedFull: return "strided-full";
  }
  return "?";
}

std::optional<PatternName> pattern_from_string(std::string_view text) {
  if (text == "fixed") return PatternName::Fixed;
  if (text == "ltr") return PatternName::Ltr;
  if (text == "rtl") return PatternName::Rtl;
  if (text == "strided") return PatternName::Strided;
  if (text == "strided-full") return PatternName::StridedFull;
  return std::nullopt;
}

std::size_t AttentionMask::count_true() const {
  std::size_t c = 0;
  for (std::uint8_t b : bits) c += b;
  return c;
}

bool AttentionMask::every_row_attends() const {
  for (std::size_t q = 0; q < n_query; ++q) {
    bool any = false;
    for (std::size_t k = 0; k < n_key && !any; ++k) any = at(q, k);
    if (!any) return false;
  }
  return true;
}

bool AttentionMask::diagonal_true() const {
  if (!square()) return false;
  for (std::size_t i = 0; i < n_query; ++i)
    if (!at(i, i)) return false;
  return true;
}

AttentionMask AttentionMask::transposed() const {
  AttentionMask t(n_key, n_query);
  for (std::size_t q = 0; q < n_query; ++q)
    for (std::size_t k = 0; k < n_key; ++k)
      if (at(q, k)) t.set(k, q);
  return t;
}

AttentionMask AttentionMask::all_true(std::size_t q, std::size_t k) {
  AttentionMask m(q, k);
  std::fill(m.bits.begin(), m.bits.end(), std::uint8_t{1});
  return m;
}

AttentionMask AttentionMask::identity(std::size_t n) {
  AttentionMask m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i);
  return m;
}

std::size_t PatternFactorization::total_true() const {
  std::size_t c = 0;
  for (const auto& s : steps) c += s.count_true();
  return c;
}

std::size_t default_stride(std::size_t n) {
  std::size_t s = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  while (s * s < n) ++s;  // guard against sqrt rounding down
  while (s > 1 && (s - 1) * (s - 1) >= n) --s;
  return std::max<std::size_t>(s, 1);
}

namespace {

std::size_t resolve_stride(std::size_t n, Stride stride) {
  if (n == 0) throw std::invalid_argument("pattern: n must be at least 1");
  if (!stride) return default_stride(n);
  if (*stride == 0 || *stride > n)
    throw std::invalid_argument("pattern: stride must be in [1, n]");
  return *stride;
}

void force_diagonal(AttentionMask& m) {
  for (std::size_t i = 0; i < m.n_query; ++i) m.set(i, i);
}

// step 1 of ltr: full intra-block attention.
AttentionMask block_full(std::size_t n, std::size_t s) {
  AttentionMask m(n, n);
  for (std::size_t start = 0; start < n; start += s) {
    std::size_t end = std::min(start + s, n);
    for (std::size_t a = start; a < end; ++a)
      for (std::size_t b = start; b < end; ++b) m.set(a, b);
  }
  return m;
}

}  // namespace

PatternFactorization make_fixed(std::size_t n, Stride stride) {
  std::size_t s = resolve_stride(n, stride);
  AttentionMask step1(n, n);
  for (std::size_t start = 0; start < n; start += s) {
    std::size_t end = std::min(start + s, n);
    for (std::size_t a = start; a < end; ++a)
      for (std::size_t b = start; b <= a; ++b) step1.set(a, b);
  }
  AttentionMask step2(n, n);
  for (std::size_t b = s - 1; b < n; b += s)
    for (std::size_t a = b; a < n; ++a) step2.set(a, b);
  force_diagonal(step2);
  return {PatternName::Fixed, n, s, {std::move(step1), std::move(step2)}};
}

PatternFactorization make_ltr(std::size_t n, Stride stride) {
  std::size_t s = resolve_stride(n, stride);
  AttentionMask step1 = block_full(n, s);
  AttentionMask step2(n, n);
  for (std::size_t b = s - 1; b < n; b += s)
    for (std::size_t a = 0; a < n; ++a) step2.set(a, b);
  force_diagonal(step2);
  return {PatternName::Ltr, n, s, {std::move(step1), std::move(step2)}};
}

PatternFactorization make_rtl(std::size_t n, Stride stride) {
  PatternFactorization ltr = make_ltr(n, stride);
  return {PatternName::Rtl, ltr.n, ltr.stride,
          {ltr.steps[1].transposed(), ltr.steps[0].transposed()}};
}

PatternFactorization make_strided(std::size_t n, Stride stride) {
  std::size_t s = resolve_stride(n, stride);
  AttentionMask step1(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = (a + 1 >= s ? a + 1 - s : 0); b <= a; ++b) step1.set(a, b);
  AttentionMask step2(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a % s; b <= a; b += s) step2.set(a, b);
  return {PatternName::Strided, n, s, {std::move(step1), std::move(step2)}};
}

PatternFactorization make_strided_full(std::size_t n, Stride stride) {
  std::size_t s = resolve_stride(n, stride);
  AttentionMask step1(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t lo = a + 1 >= s ? a + 1 - s : 0;
    std::size_t hi = std::min(n - 1, a + s - 1);
    for (std::size_t b = lo; b <= hi; ++b) step1.set(a, b);
  }
  AttentionMask step2(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a % s; b < n; b += s) step2.set(a, b);
  return {PatternName::StridedFull, n, s, {std::move(step1), std::move(step2)}};
}

PatternFactorization make_pattern(PatternName name, std::size_t n, Stride stride) {
  switch (name) {
    case PatternName::Fixed: return make_fixed(n, stride);
    case PatternName::Ltr: return make_ltr(n, stride);
    case PatternName::Rtl: return make_rtl(n, stride);
    case PatternName::Strided: return make_strided(n, stride);
    case PatternName::StridedFull: return make_strided_full(n, stride);
  }
  throw std::invalid_argument("pattern: unknown name");
}

PatternFactorization expand_nonsquare(const PatternFactorization& f, std::size_t query_count) {
  if (f.steps.empty()) throw std::invalid_argument("expand_nonsquare: empty factorization");
  if (f.n == 0 || query_count == 0 || query_count % f.n != 0)
    throw std::invalid_argument("expand_nonsquare: query_count must be a positive multiple of n");
  PatternFactorization out = f;
  const AttentionMask& last = f.steps.back();
  AttentionMask expanded(query_count, last.n_key);
  for (std::size_t q = 0; q < query_count; ++q) {
    std::size_t src = q % last.n_query;
    std::copy(last.bits.begin() + src * last.n_key, last.bits.begin() + (src + 1) * last.n_key,
              expanded.bits.begin() + q * last.n_key);
  }
  out.steps.back() = std::move(expanded);
  return out;
}

std::vector<std::pair<std::size_t, AttentionMask>> head_assignment(std::size_t n,
                                                                   Stride stride) {
  PatternFactorization ltr = make_ltr(n, stride);
  PatternFactorization rtl = make_rtl(n, stride);
  std::vector<AttentionMask> base = {ltr.steps[0], ltr.steps[1], rtl.steps[0], rtl.steps[1]};
  std::vector<std::pair<std::size_t, AttentionMask>> heads;
  heads.reserve(8);
  for (std::size_t i = 0; i < 8; ++i) heads.emplace_back(i, base[i % 4]);
  return heads;
}

}  // namespace ylg
