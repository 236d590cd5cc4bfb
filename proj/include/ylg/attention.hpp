#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "ylg/mask.hpp"
#include "ylg/matrix.hpp"

namespace ylg {

struct AttentionWeights {
  Matrix w_q;  // E_X x E
  Matrix w_k;  // E_Y x E
  Matrix w_v;  // E_Y x E_V
};

struct AttentionOutput {
  Matrix output;         // N_X x E_V
  Matrix attention_map;  // N_X x N_Y, row-stochastic, exact zeros at masked positions
};

struct MultiheadOutput {
  std::vector<AttentionOutput> heads;
  Matrix concatenated;  // N_X x (heads * E_V)
};

struct AttentionGradients {
  Matrix d_x;
  Matrix d_y;
  Matrix d_w_q;
  Matrix d_w_k;
  Matrix d_w_v;
};

// Raised when a mask leaves some query row with no attendable key; such a
// row has no defined softmax and always indicates a pattern bug.
struct FullyMaskedRowError : std::invalid_argument {
  explicit FullyMaskedRowError(std::size_t row);
  std::size_t row;
};

// output = softmax(x w_q (y w_k)^T) y w_v, softmax along the last axis with
// per-row max subtraction. Logits are not scaled by default; scale_logits
// opts into 1/sqrt(E).
AttentionOutput dense_attention(const Matrix& x, const Matrix& y, const AttentionWeights& w,
                                Exec exec = Exec::Parallel, bool scale_logits = false);

// Masked positions are excluded from the softmax normalization entirely,
// so they are exact zeros in the attention map and contribute no gradient.
AttentionOutput masked_attention(const Matrix& x, const Matrix& y, const AttentionWeights& w,
                                 const AttentionMask& mask, Exec exec = Exec::Parallel,
                                 bool scale_logits = false);

// Heads run independently; outputs concatenate along the feature axis in
// head order. All heads must share E_V.
MultiheadOutput multihead_attention(const Matrix& x, const Matrix& y,
                                    const std::vector<std::pair<AttentionWeights, AttentionMask>>& heads,
                                    Exec exec = Exec::Parallel);

// Two masked self-attention steps: step 1 over x with f.steps[0], step 2
// over the step-1 output with f.steps[1]. The structural dependence of the
// result on x matches the factorization's information flow graph.
Matrix two_step_attention(const Matrix& x, const PatternFactorization& f,
                          const AttentionWeights& w1, const AttentionWeights& w2,
                          Exec exec = Exec::Parallel);

// Reverse-mode gradients of masked_attention under `upstream` (dL/doutput).
AttentionGradients attention_backward(const Matrix& x, const Matrix& y, const AttentionWeights& w,
                                      const AttentionMask& mask, const Matrix& upstream,
                                      Exec exec = Exec::Parallel, bool scale_logits = false);

}  // namespace ylg
