#include "ylg/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ylg/rng.hpp"

namespace ylg {

DivergedError::DivergedError(std::size_t at_step)
    : std::runtime_error("inversion diverged at step " + std::to_string(at_step)),
      step(at_step) {}

double SaliencyMap::sum() const {
  long double s = 0.0L;
  for (double w : weights) s += w;
  return static_cast<double>(s);
}

SaliencyMap SaliencyMap::uniform(std::size_t height, std::size_t width) {
  SaliencyMap s{height, width, {}};
  s.weights.assign(height * width, 1.0 / static_cast<double>(height * width));
  return s;
}

EmbeddingFunction EmbeddingFunction::identity(std::size_t height, std::size_t width,
                                              std::size_t channels) {
  EmbeddingFunction f;
  f.input_dim = height * width * channels;
  f.out_height = height;
  f.out_width = width;
  f.out_channels = channels;
  f.forward = [height, width, channels](const std::vector<double>& v) {
    Tensor t(height, width, channels);
    t.data = v;
    return t;
  };
  f.vjp = [](const std::vector<double>&, const Tensor& upstream) { return upstream.data; };
  return f;
}

SaliencyMap saliency_from_map(const Matrix& attention_map, std::size_t key_height,
                              std::size_t key_width) {
  if (attention_map.cols != key_height * key_width)
    throw std::invalid_argument("saliency_from_map: key grid does not match map columns");
  if (attention_map.rows == 0) throw std::invalid_argument("saliency_from_map: empty map");
  SaliencyMap s{key_height, key_width, std::vector<double>(key_height * key_width, 0.0)};
  for (std::size_t k = 0; k < attention_map.cols; ++k) {
    long double acc = 0.0L;
    for (std::size_t q = 0; q < attention_map.rows; ++q) acc += attention_map.at(q, k);
    s.weights[k] = static_cast<double>(acc / static_cast<long double>(attention_map.rows));
  }
  return s;
}

SaliencyMap project_saliency(const SaliencyMap& s, std::size_t target_height,
                             std::size_t target_width) {
  if (target_height == 0 || target_width == 0)
    throw std::invalid_argument("project_saliency: target dimensions must be at least 1");
  if (target_height == s.height && target_width == s.width) return s;
  SaliencyMap out{target_height, target_width,
                  std::vector<double>(target_height * target_width, 0.0)};
  long double total = 0.0L;
  for (std::size_t r = 0; r < target_height; ++r) {
    std::size_t sr = r * s.height / target_height;
    for (std::size_t c = 0; c < target_width; ++c) {
      std::size_t sc = c * s.width / target_width;
      double w = s.weights[sr * s.width + sc];
      out.weights[r * target_width + c] = w;
      total += w;
    }
  }
  if (total > 0.0L)
    for (double& w : out.weights) w = static_cast<double>(w / total);
  return out;
}

namespace {

void check_embedding_pair(const Tensor& e_gen, const Tensor& e_real) {
  if (e_gen.height != e_real.height || e_gen.width != e_real.width ||
      e_gen.channels != e_real.channels)
    throw std::invalid_argument("weighted_embedding_loss: embedding shapes differ");
  if (e_gen.size() == 0) throw std::invalid_argument("weighted_embedding_loss: empty embedding");
}

}  // namespace

LossValue weighted_embedding_loss(const Tensor& e_gen, const Tensor& e_real,
                                  const SaliencyMap& s_proj) {
  check_embedding_pair(e_gen, e_real);
  if (s_proj.height != e_gen.height || s_proj.width != e_gen.width)
    throw std::invalid_argument("weighted_embedding_loss: saliency grid does not match embedding");
  LossValue lv;
  lv.grad = Tensor(e_gen.height, e_gen.width, e_gen.channels);
  long double loss = 0.0L;
  for (std::size_t p = 0; p < e_gen.height * e_gen.width; ++p) {
    double weight = s_proj.weights[p];
    for (std::size_t ch = 0; ch < e_gen.channels; ++ch) {
      std::size_t idx = p * e_gen.channels + ch;
      double delta = e_gen.data[idx] - e_real.data[idx];
      double weighted = delta * weight;
      loss += static_cast<long double>(weighted) * weighted;
      lv.grad.data[idx] = 2.0 * delta * weight * weight;
    }
  }
  lv.loss = static_cast<double>(loss);
  return lv;
}

LossValue multihead_weighted_loss(const Tensor& e_gen, const Tensor& e_real,
                                  const std::vector<SaliencyMap>& saliencies) {
  if (saliencies.empty()) throw std::invalid_argument("multihead_weighted_loss: no heads");
  check_embedding_pair(e_gen, e_real);
  LossValue total;
  total.grad = Tensor(e_gen.height, e_gen.width, e_gen.channels);
  for (const SaliencyMap& s : saliencies) {
    LossValue head = weighted_embedding_loss(e_gen, e_real,
                                             project_saliency(s, e_gen.height, e_gen.width));
    total.loss += head.loss;
    for (std::size_t i = 0; i < total.grad.data.size(); ++i)
      total.grad.data[i] += head.grad.data[i];
  }
  return total;
}

std::vector<double> truncated_normal(std::size_t dim, double threshold, std::uint64_t seed,
                                     TruncationStats* stats) {
  if (!(threshold > 0.0)) throw std::invalid_argument("truncated_normal: threshold must be > 0");
  Rng rng(seed);
  std::vector<double> z(dim);
  for (double& v : z) {
    for (;;) {
      double draw = rng.normal();
      if (stats) ++stats->attempts;
      if (std::abs(draw) <= threshold) {
        if (stats) ++stats->accepted;
        v = draw;
        break;
      }
    }
  }
  return z;
}

void lookahead_step(std::vector<double>& slow, std::vector<double>& fast, LookaheadState& state,
                    const std::vector<double>& gradient, const InversionConfig& cfg) {
  if (slow.size() != fast.size() || gradient.size() != fast.size())
    throw std::invalid_argument("lookahead_step: dimension mismatch");
  for (std::size_t i = 0; i < fast.size(); ++i) fast[i] -= cfg.learning_rate * gradient[i];
  ++state.inner_steps;
  if (cfg.lookahead_sync_period > 0 && state.inner_steps % cfg.lookahead_sync_period == 0) {
    for (std::size_t i = 0; i < slow.size(); ++i)
      slow[i] += cfg.lookahead_alpha * (fast[i] - slow[i]);
    fast = slow;
  }
}

namespace {

void check_config(const InversionConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("invert: learning rate must be > 0");
  if (!(cfg.lookahead_alpha > 0.0) || cfg.lookahead_alpha > 1.0)
    throw std::invalid_argument("invert: lookahead alpha must be in (0, 1]");
  if (cfg.lookahead_sync_period == 0)
    throw std::invalid_argument("invert: lookahead sync period must be at least 1");
}

}  // namespace

InversionResult invert(const EmbeddingFunction& generator,
                       const EmbeddingFunction& discriminator_embed, const Tensor& target,
                       const std::vector<SaliencyMap>& saliencies, const InversionConfig& cfg) {
  check_config(cfg);
  if (!generator.forward) throw std::invalid_argument("invert: generator has no forward");
  if (!cfg.generator_space_loss && !discriminator_embed.forward)
    throw std::invalid_argument("invert: discriminator embedding has no forward");

  const Tensor e_real = cfg.generator_space_loss ? target : discriminator_embed.forward(target.data);
  const bool analytic = cfg.generator_space_loss
                            ? static_cast<bool>(generator.vjp)
                            : (generator.vjp && discriminator_embed.vjp);

  auto embed = [&](const std::vector<double>& z, Tensor* image_out) {
    Tensor image = generator.forward(z);
    if (cfg.generator_space_loss) {
      if (image_out) *image_out = image;
      return image;
    }
    Tensor e = discriminator_embed.forward(image.data);
    if (image_out) *image_out = std::move(image);
    return e;
  };

  auto loss_only = [&](const std::vector<double>& z) {
    return multihead_weighted_loss(embed(z, nullptr), e_real, saliencies).loss;
  };

  auto loss_and_grad = [&](const std::vector<double>& z, std::vector<double>& grad) {
    Tensor image;
    Tensor e_gen = embed(z, &image);
    LossValue lv = multihead_weighted_loss(e_gen, e_real, saliencies);
    if (analytic) {
      if (cfg.generator_space_loss) {
        grad = generator.vjp(z, lv.grad);
      } else {
        std::vector<double> d_image = discriminator_embed.vjp(image.data, lv.grad);
        Tensor d_image_t(generator.out_height, generator.out_width, generator.out_channels);
        d_image_t.data = std::move(d_image);
        grad = generator.vjp(z, d_image_t);
      }
    } else {
      const double eps = 1e-6;
      grad.assign(z.size(), 0.0);
      std::vector<double> probe = z;
      for (std::size_t i = 0; i < z.size(); ++i) {
        probe[i] = z[i] + eps;
        double hi = loss_only(probe);
        probe[i] = z[i] - eps;
        double lo = loss_only(probe);
        probe[i] = z[i];
        grad[i] = (hi - lo) / (2.0 * eps);
      }
    }
    return lv.loss;
  };

  InversionResult result;
  std::vector<double> fast = truncated_normal(generator.input_dim, cfg.truncation_threshold,
                                              cfg.seed);
  std::vector<double> slow = fast;
  std::vector<double> grad;

  double loss = loss_and_grad(fast, grad);
  if (!std::isfinite(loss)) throw DivergedError(0);
  result.z = fast;
  result.best_loss = loss;
  result.best_loss_trace.push_back(loss);

  LookaheadState state;
  while (result.steps_run < cfg.max_steps && result.best_loss > cfg.tolerance) {
    lookahead_step(slow, fast, state, grad, cfg);
    ++result.steps_run;
    loss = loss_and_grad(fast, grad);
    if (!std::isfinite(loss)) throw DivergedError(result.steps_run);
    if (loss < result.best_loss) {
      result.best_loss = loss;
      result.z = fast;
    }
    result.best_loss_trace.push_back(result.best_loss);
  }
  return result;
}

LinearToy make_linear_toy(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("make_linear_toy: dim must be at least 1");
  // Random orthonormal Q via modified Gram-Schmidt, scaled to singular
  // value 10 so the default config contracts quickly.
  Rng rng(seed * 1000 + 7);
  Matrix g = random_matrix(dim, dim, rng);
  Matrix q(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    std::vector<double> v(dim);
    for (std::size_t r = 0; r < dim; ++r) v[r] = g.at(r, col);
    for (std::size_t prev = 0; prev < col; ++prev) {
      long double dot = 0.0L;
      for (std::size_t r = 0; r < dim; ++r)
        dot += static_cast<long double>(q.at(r, prev)) * v[r];
      for (std::size_t r = 0; r < dim; ++r) v[r] -= static_cast<double>(dot) * q.at(r, prev);
    }
    long double norm_sq = 0.0L;
    for (double x : v) norm_sq += static_cast<long double>(x) * x;
    double norm = std::sqrt(static_cast<double>(norm_sq));
    if (norm < 1e-12) throw std::runtime_error("make_linear_toy: degenerate random matrix");
    for (std::size_t r = 0; r < dim; ++r) q.at(r, col) = v[r] / norm;
  }
  Matrix a(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) a.at(i, j) = 10.0 * q.at(i, j);

  LinearToy toy;
  toy.a = a;
  toy.z_truth = truncated_normal(dim, 2.0, seed * 1000 + 1);

  toy.generator.input_dim = dim;
  toy.generator.out_height = dim;
  toy.generator.out_width = 1;
  toy.generator.out_channels = 1;
  toy.generator.forward = [a, dim](const std::vector<double>& z) {
    Tensor t(dim, 1, 1);
    for (std::size_t i = 0; i < dim; ++i) {
      long double acc = 0.0L;
      for (std::size_t j = 0; j < dim; ++j) acc += static_cast<long double>(a.at(i, j)) * z[j];
      t.data[i] = static_cast<double>(acc);
    }
    return t;
  };
  toy.generator.vjp = [a, dim](const std::vector<double>&, const Tensor& upstream) {
    std::vector<double> d(dim, 0.0);
    for (std::size_t j = 0; j < dim; ++j) {
      long double acc = 0.0L;
      for (std::size_t i = 0; i < dim; ++i)
        acc += static_cast<long double>(a.at(i, j)) * upstream.data[i];
      d[j] = static_cast<double>(acc);
    }
    return d;
  };

  toy.discriminator = EmbeddingFunction::identity(dim, 1, 1);
  toy.target = toy.generator.forward(toy.z_truth);
  toy.saliencies = {SaliencyMap::uniform(dim, 1)};
  return toy;
}

std::vector<double> solve_linear(const Matrix& a, const std::vector<double>& b) {
  if (a.rows != a.cols || a.rows != b.size())
    throw std::invalid_argument("solve_linear: square system required");
  const std::size_t n = a.rows;
  Matrix m = a;
  std::vector<double> rhs = b;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m.at(r, col)) > std::abs(m.at(pivot, col))) pivot = r;
    if (std::abs(m.at(pivot, col)) < 1e-12)
      throw std::invalid_argument("solve_linear: singular matrix");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m.at(pivot, c), m.at(col, c));
      std::swap(rhs[pivot], rhs[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      double factor = m.at(r, col) / m.at(col, col);
      for (std::size_t c = col; c < n; ++c) m.at(r, c) -= factor * m.at(col, c);
      rhs[r] -= factor * rhs[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    long double acc = rhs[ri];
    for (std::size_t c = ri + 1; c < n; ++c)
      acc -= static_cast<long double>(m.at(ri, c)) * x[c];
    x[ri] = static_cast<double>(acc / m.at(ri, ri));
  }
  return x;
}

}  // namespace ylg
