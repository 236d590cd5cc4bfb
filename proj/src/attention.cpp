#include "ylg/attention.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace ylg {

FullyMaskedRowError::FullyMaskedRowError(std::size_t row_index)
    : std::invalid_argument("attention: query row " + std::to_string(row_index) +
                            " has no attendable key"),
      row(row_index) {}

namespace {

void check_inputs(const Matrix& x, const Matrix& y, const AttentionWeights& w) {
  if (x.rows == 0 || x.cols == 0 || y.rows == 0 || y.cols == 0)
    throw std::invalid_argument("attention: empty input");
  if (w.w_q.rows != x.cols) throw std::invalid_argument("attention: w_q rows must match x cols");
  if (w.w_k.rows != y.cols) throw std::invalid_argument("attention: w_k rows must match y cols");
  if (w.w_v.rows != y.cols) throw std::invalid_argument("attention: w_v rows must match y cols");
  if (w.w_q.cols != w.w_k.cols)
    throw std::invalid_argument("attention: w_q and w_k must project to the same width");
  if (!all_finite(x) || !all_finite(y) || !all_finite(w.w_q) || !all_finite(w.w_k) ||
      !all_finite(w.w_v))
    throw std::invalid_argument("attention: non-finite input");
}

void check_mask(const Matrix& x, const Matrix& y, const AttentionMask& mask) {
  if (mask.n_query != x.rows || mask.n_key != y.rows)
    throw std::invalid_argument("attention: mask dimensions must be (N_x, N_y)");
  for (std::size_t q = 0; q < mask.n_query; ++q) {
    bool any = false;
    for (std::size_t k = 0; k < mask.n_key && !any; ++k) any = mask.at(q, k);
    if (!any) throw FullyMaskedRowError(q);
  }
}

}  // namespace

AttentionOutput masked_attention(const Matrix& x, const Matrix& y, const AttentionWeights& w,
                                 const AttentionMask& mask, Exec exec, bool scale_logits) {
  check_inputs(x, y, w);
  check_mask(x, y, mask);

  const Matrix q = matmul(x, w.w_q, exec);
  const Matrix k = matmul(y, w.w_k, exec);
  const Matrix v = matmul(y, w.w_v, exec);
  const double scale = scale_logits ? 1.0 / std::sqrt(static_cast<double>(w.w_q.cols)) : 1.0;

  AttentionOutput out;
  out.attention_map = Matrix(x.rows, y.rows);
  out.output = Matrix(x.rows, v.cols);

  const std::int64_t n_query = static_cast<std::int64_t>(x.rows);
#pragma omp parallel if (exec == Exec::Parallel)
  {
    std::vector<double> logits;
#pragma omp for schedule(static)
    for (std::int64_t qi = 0; qi < n_query; ++qi) {
      const std::size_t i = static_cast<std::size_t>(qi);
      logits.assign(y.rows, 0.0);
      double max_logit = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < y.rows; ++j) {
        if (!mask.at(i, j)) continue;
        long double acc = 0.0L;
        for (std::size_t e = 0; e < q.cols; ++e)
          acc += static_cast<long double>(q.at(i, e)) * k.at(j, e);
        logits[j] = static_cast<double>(acc) * scale;
        max_logit = std::max(max_logit, logits[j]);
      }
      long double denom = 0.0L;
      for (std::size_t j = 0; j < y.rows; ++j)
        if (mask.at(i, j)) denom += std::exp(static_cast<long double>(logits[j] - max_logit));
      double* map_row = out.attention_map.row(i);
      for (std::size_t j = 0; j < y.rows; ++j)
        if (mask.at(i, j))
          map_row[j] = static_cast<double>(
              std::exp(static_cast<long double>(logits[j] - max_logit)) / denom);
      double* out_row = out.output.row(i);
      for (std::size_t e = 0; e < v.cols; ++e) {
        long double acc = 0.0L;
        for (std::size_t j = 0; j < y.rows; ++j)
          if (mask.at(i, j)) acc += static_cast<long double>(map_row[j]) * v.at(j, e);
        out_row[e] = static_cast<double>(acc);
      }
    }
  }
  return out;
}

AttentionOutput dense_attention(const Matrix& x, const Matrix& y, const AttentionWeights& w,
                                Exec exec, bool scale_logits) {
  check_inputs(x, y, w);
  return masked_attention(x, y, w, AttentionMask::all_true(x.rows, y.rows), exec, scale_logits);
}

MultiheadOutput multihead_attention(
    const Matrix& x, const Matrix& y,
    const std::vector<std::pair<AttentionWeights, AttentionMask>>& heads, Exec exec) {
  if (heads.empty()) throw std::invalid_argument("multihead_attention: no heads");
  const std::size_t head_width = heads.front().first.w_v.cols;
  for (const auto& [w, mask] : heads)
    if (w.w_v.cols != head_width)
      throw std::invalid_argument("multihead_attention: inconsistent head output widths");

  MultiheadOutput out;
  out.heads.reserve(heads.size());
  for (const auto& [w, mask] : heads) out.heads.push_back(masked_attention(x, y, w, mask, exec));

  out.concatenated = Matrix(x.rows, heads.size() * head_width);
  for (std::size_t h = 0; h < heads.size(); ++h)
    for (std::size_t i = 0; i < x.rows; ++i)
      for (std::size_t e = 0; e < head_width; ++e)
        out.concatenated.at(i, h * head_width + e) = out.heads[h].output.at(i, e);
  return out;
}

Matrix two_step_attention(const Matrix& x, const PatternFactorization& f,
                          const AttentionWeights& w1, const AttentionWeights& w2, Exec exec) {
  if (f.steps.size() != 2)
    throw std::invalid_argument("two_step_attention: factorization must have two steps");
  Matrix h = masked_attention(x, x, w1, f.steps[0], exec).output;
  return masked_attention(h, h, w2, f.steps[1], exec).output;
}

AttentionGradients attention_backward(const Matrix& x, const Matrix& y, const AttentionWeights& w,
                                      const AttentionMask& mask, const Matrix& upstream,
                                      Exec exec, bool scale_logits) {
  check_inputs(x, y, w);
  check_mask(x, y, mask);
  if (upstream.rows != x.rows || upstream.cols != w.w_v.cols)
    throw std::invalid_argument("attention_backward: upstream shape must match the output");

  const Matrix q = matmul(x, w.w_q, exec);
  const Matrix k = matmul(y, w.w_k, exec);
  const Matrix v = matmul(y, w.w_v, exec);
  const Matrix a = masked_attention(x, y, w, mask, exec, scale_logits).attention_map;
  const double scale = scale_logits ? 1.0 / std::sqrt(static_cast<double>(w.w_q.cols)) : 1.0;

  // d_scores via the softmax Jacobian, rows independent; masked entries stay
  // exactly zero.
  Matrix d_scores(x.rows, y.rows);
  const std::int64_t n_query = static_cast<std::int64_t>(x.rows);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (std::int64_t qi = 0; qi < n_query; ++qi) {
    const std::size_t i = static_cast<std::size_t>(qi);
    long double row_dot = 0.0L;
    std::vector<double> d_map(y.rows, 0.0);
    for (std::size_t j = 0; j < y.rows; ++j) {
      if (!mask.at(i, j)) continue;
      long double acc = 0.0L;
      for (std::size_t e = 0; e < v.cols; ++e)
        acc += static_cast<long double>(upstream.at(i, e)) * v.at(j, e);
      d_map[j] = static_cast<double>(acc);
      row_dot += static_cast<long double>(a.at(i, j)) * d_map[j];
    }
    for (std::size_t j = 0; j < y.rows; ++j)
      if (mask.at(i, j))
        d_scores.at(i, j) = a.at(i, j) * (d_map[j] - static_cast<double>(row_dot)) * scale;
  }

  const Matrix a_t = transpose(a);
  const Matrix d_scores_t = transpose(d_scores);
  const Matrix d_q = matmul(d_scores, k, exec);
  const Matrix d_k = matmul(d_scores_t, q, exec);
  const Matrix d_v = matmul(a_t, upstream, exec);

  AttentionGradients g;
  g.d_x = matmul(d_q, transpose(w.w_q), exec);
  g.d_w_q = matmul(transpose(x), d_q, exec);
  g.d_w_k = matmul(transpose(y), d_k, exec);
  g.d_w_v = matmul(transpose(y), d_v, exec);
  g.d_y = matmul(d_k, transpose(w.w_k), exec);
  const Matrix d_y_value = matmul(d_v, transpose(w.w_v), exec);
  for (std::size_t i = 0; i < g.d_y.rows; ++i)
    for (std::size_t j = 0; j < g.d_y.cols; ++j) g.d_y.at(i, j) += d_y_value.at(i, j);
  return g;
}

}  // namespace ylg
