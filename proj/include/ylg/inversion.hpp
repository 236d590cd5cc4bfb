#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ylg/matrix.hpp"

namespace ylg {

// Nonnegative weights over a key grid, summing to 1.
struct SaliencyMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> weights;  // row-major

  double sum() const;
  static SaliencyMap uniform(std::size_t height, std::size_t width);
};

// Spatial grid of channel vectors; data layout (row, col, channel).
struct Tensor {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t h, std::size_t w, std::size_t c)
      : height(h), width(w), channels(c), data(h * w * c, 0.0) {}

  std::size_t size() const { return data.size(); }
  double& at(std::size_t r, std::size_t c, std::size_t ch) {
    return data[(r * width + c) * channels + ch];
  }
  double at(std::size_t r, std::size_t c, std::size_t ch) const {
    return data[(r * width + c) * channels + ch];
  }
};

// Differentiable map from a flat input vector to a tensor. vjp takes the
// function input and an upstream gradient of the declared output shape and
// returns the gradient with respect to the input; leave it empty to have
// invert() fall back to central finite differences on the scalar loss.
struct EmbeddingFunction {
  std::size_t input_dim = 0;
  std::size_t out_height = 0;
  std::size_t out_width = 0;
  std::size_t out_channels = 1;
  std::function<Tensor(const std::vector<double>&)> forward;
  std::function<std::vector<double>(const std::vector<double>&, const Tensor&)> vjp;

  static EmbeddingFunction identity(std::size_t height, std::size_t width, std::size_t channels);
};

struct InversionConfig {
  double learning_rate = 0.05;
  std::size_t max_steps = 1500;
  double truncation_threshold = 2.0;   // in sigma units
  std::size_t lookahead_sync_period = 5;  // k
  double lookahead_alpha = 0.5;
  std::uint64_t seed = 0;
  double tolerance = 0.0;  // stop once best loss <= tolerance
  // Comparison mode: weight the loss in generator output space instead of
  // the discriminator embedding space (known to invert poorly; kept for
  // side-by-side demos).
  bool generator_space_loss = false;
};

struct DivergedError : std::runtime_error {
  explicit DivergedError(std::size_t at_step);
  std::size_t step;
};

// S[k] = mean over queries of attention_map[q, k], reshaped to the key grid.
// attention_map must be row-stochastic with N_k = key_height * key_width.
SaliencyMap saliency_from_map(const Matrix& attention_map, std::size_t key_height,
                              std::size_t key_width);

// Nearest-neighbor resample to the target grid, renormalized to sum 1.
// Bit-identical input when the dimensions already match.
SaliencyMap project_saliency(const SaliencyMap& s, std::size_t target_height,
                             std::size_t target_width);

struct LossValue {
  double loss = 0.0;
  Tensor grad;  // d loss / d e_gen
};

// loss = sum over positions and channels of ((e_gen - e_real) * S')^2 with
// the saliency broadcast across channels; gradient 2 * delta * S'^2.
LossValue weighted_embedding_loss(const Tensor& e_gen, const Tensor& e_real,
                                  const SaliencyMap& s_proj);

// Per-head losses summed; each saliency is projected to the embedding grid.
LossValue multihead_weighted_loss(const Tensor& e_gen, const Tensor& e_real,
                                  const std::vector<SaliencyMap>& saliencies);

struct TruncationStats {
  std::size_t attempts = 0;
  std::size_t accepted = 0;
};

// i.i.d. standard normal coordinates, each redrawn until |v| <= threshold.
std::vector<double> truncated_normal(std::size_t dim, double threshold, std::uint64_t seed,
                                     TruncationStats* stats = nullptr);

struct LookaheadState {
  std::size_t inner_steps = 0;
};

// Inner step: fast -= lr * gradient. Every k-th call the slow weights
// interpolate toward fast with factor alpha and fast resets to slow.
void lookahead_step(std::vector<double>& slow, std::vector<double>& fast, LookaheadState& state,
                    const std::vector<double>& gradient, const InversionConfig& cfg);

struct InversionResult {
  std::vector<double> z;                 // best-seen latent
  double best_loss = 0.0;
  std::vector<double> best_loss_trace;   // best loss after each evaluation; non-increasing
  std::size_t steps_run = 0;
};

// Minimizes the saliency-weighted embedding distance between
// discriminator_embed(generator(z)) and discriminator_embed(target) by
// Lookahead gradient descent from a truncated-normal start. Throws
// DivergedError on a non-finite loss.
InversionResult invert(const EmbeddingFunction& generator,
                       const EmbeddingFunction& discriminator_embed, const Tensor& target,
                       const std::vector<SaliencyMap>& saliencies, const InversionConfig& cfg);

// Desk-scale inversion target: generator z -> A z with A = 10 * Q for a
// seeded random orthonormal Q, identity discriminator embedding, uniform
// single-head saliency. z_truth generated from the truncated normal.
struct LinearToy {
  EmbeddingFunction generator;
  EmbeddingFunction discriminator;
  Tensor target;
  std::vector<SaliencyMap> saliencies;
  std::vector<double> z_truth;
  Matrix a;
};

LinearToy make_linear_toy(std::size_t dim, std::uint64_t seed);

// Gaussian elimination with partial pivoting; the closed-form route used to
// judge the gradient-descent inversion.
std::vector<double> solve_linear(const Matrix& a, const std::vector<double>& b);

}  // namespace ylg
