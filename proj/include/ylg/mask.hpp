#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace ylg {

enum class PatternName { Fixed, Ltr, Rtl, Strided, StridedFull };

std::string_view to_string(PatternName name);
std::optional<PatternName> pattern_from_string(std::string_view text);

// Boolean attention mask: bit (q, k) says whether query token q may attend
// key token k at one step of a sparsification.
struct AttentionMask {
  std::size_t n_query = 0;
  std::size_t n_key = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0/1

  AttentionMask() = default;
  AttentionMask(std::size_t q, std::size_t k) : n_query(q), n_key(k), bits(q * k, 0) {}

  bool at(std::size_t q, std::size_t k) const { return bits[q * n_key + k] != 0; }
  void set(std::size_t q, std::size_t k, bool v = true) { bits[q * n_key + k] = v ? 1 : 0; }

  bool square() const { return n_query == n_key; }
  std::size_t count_true() const;
  // Every query row attends at least one key.
  bool every_row_attends() const;
  // Square masks only: token i attends itself for all i.
  bool diagonal_true() const;

  AttentionMask transposed() const;

  static AttentionMask all_true(std::size_t q, std::size_t k);
  static AttentionMask identity(std::size_t n);

  bool operator==(const AttentionMask&) const = default;
};

// Ordered step masks of a multi-step sparsification, plus construction
// metadata. Steps are square n x n, except that after a non-square
// expansion the final step is n_query x n.
struct PatternFactorization {
  PatternName name = PatternName::Fixed;
  std::size_t n = 0;       // key-side token count
  std::size_t stride = 0;  // block size s
  std::vector<AttentionMask> steps;

  std::size_t step_count() const { return steps.size(); }
  std::size_t n_query() const { return steps.empty() ? 0 : steps.back().n_query; }
  bool square() const { return n_query() == n; }
  std::size_t total_true() const;

  bool operator==(const PatternFactorization&) const = default;
};

}  // namespace ylg
