// Command-line surface: generate sparsification masks, check their
// information flow, render them, and run the attention / inversion demos.
//
// Exit codes: 0 success (check: full information), 1 check verdict false,
// 2 invalid arguments or malformed input, 3 I/O failure, 4 numeric failure
// (fully masked row, divergence).
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ylg/attention.hpp"
#include "ylg/grid.hpp"
#include "ylg/ifg.hpp"
#include "ylg/inversion.hpp"
#include "ylg/io.hpp"
#include "ylg/patterns.hpp"
#include "ylg/rng.hpp"

namespace {

constexpr int kExitVerdictFalse = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

std::uint64_t seed_or_env(std::optional<std::uint64_t> seed) {
  if (seed) return *seed;
  if (const char* env = std::getenv("YLG_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

bool parse_grid(const std::string& text, std::size_t& height, std::size_t& width) {
  std::size_t x = text.find('x');
  if (x == std::string::npos || x == 0 || x + 1 >= text.size()) return false;
  try {
    height = std::stoull(text.substr(0, x));
    width = std::stoull(text.substr(x + 1));
  } catch (const std::exception&) {
    return false;
  }
  return height > 0 && width > 0;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

int cmd_gen(const std::string& pattern, std::size_t n, ylg::Stride stride,
            const std::string& esa_grid, std::size_t expand, const std::string& out_path) {
  auto name = ylg::pattern_from_string(pattern);
  if (!name) throw std::invalid_argument("unknown pattern: " + pattern);

  ylg::io::MaskFile file;
  file.factorization = ylg::make_pattern(*name, n, stride);
  if (!esa_grid.empty()) {
    std::size_t h = 0, w = 0;
    if (!parse_grid(esa_grid, h, w)) throw std::invalid_argument("bad grid spec: " + esa_grid);
    if (h * w != n) throw std::invalid_argument("grid dims must multiply to n");
    file.factorization =
        ylg::apply_esa_to_factorization(file.factorization, ylg::esa_enumeration(h, w));
    file.esa = true;
    file.grid_height = h;
    file.grid_width = w;
  }
  if (expand > 1) file.factorization = ylg::expand_nonsquare(file.factorization, expand * n);

  if (out_path.empty())
    std::cout << ylg::io::write_mask_file(file);
  else
    ylg::io::save_mask_file(file, out_path);
  return 0;
}

int cmd_check(const std::string& in_path) {
  ylg::io::MaskFile file = ylg::io::load_mask_file(in_path);
  nlohmann::json report = ylg::io::stats_report(file);
  std::cout << report.dump(2) << "\n";
  return report["full_information"].get<bool>() ? 0 : kExitVerdictFalse;
}

int cmd_viz(const std::string& in_path, const std::string& out_path, const std::string& format) {
  ylg::io::MaskFile file = ylg::io::load_mask_file(in_path);
  if (format == "pbm") {
    std::filesystem::path base(out_path);
    std::filesystem::path stem = base.parent_path() / base.stem();
    for (std::size_t s = 0; s < file.factorization.steps.size(); ++s) {
      std::filesystem::path step_path = stem;
      step_path += ".step" + std::to_string(s + 1) + ".pbm";
      write_text(step_path, ylg::io::to_pbm(file.factorization.steps[s]));
      std::cerr << step_path.string() << "\n";
    }
    return 0;
  }
  if (format == "dot") {
    write_text(out_path, ylg::io::to_dot(ylg::build_ifg(file.factorization)));
    std::cerr << out_path << "\n";
    return 0;
  }
  throw std::invalid_argument("unknown format: " + format);
}

int cmd_attend(const std::string& in_path, std::optional<std::uint64_t> seed_opt,
               std::size_t tokens, std::size_t embed, const std::string& saliency_out) {
  ylg::io::MaskFile file = ylg::io::load_mask_file(in_path);
  const ylg::PatternFactorization& f = file.factorization;
  std::uint64_t seed = seed_or_env(seed_opt);
  if (tokens == 0) tokens = f.n_query();
  if (tokens != f.n_query() || f.n_query() != f.n)
    throw std::invalid_argument("attend: token count must match a square mask file");
  if (tokens > 256) throw std::invalid_argument("attend: at most 256 tokens");
  if (embed == 0 || embed > 64) throw std::invalid_argument("attend: embed dim must be in [1, 64]");

  ylg::Rng rng(seed);
  ylg::Matrix x = ylg::random_matrix(tokens, embed, rng);
  std::vector<std::pair<ylg::AttentionWeights, ylg::AttentionMask>> heads;
  for (const auto& step : f.steps) {
    ylg::AttentionWeights w{ylg::random_matrix(embed, embed, rng, 1.0 / std::sqrt((double)embed)),
                            ylg::random_matrix(embed, embed, rng, 1.0 / std::sqrt((double)embed)),
                            ylg::random_matrix(embed, embed, rng, 1.0 / std::sqrt((double)embed))};
    heads.emplace_back(std::move(w), step);
  }
  ylg::MultiheadOutput mh = ylg::multihead_attention(x, x, heads);

  long double checksum = 0.0L;
  for (double v : mh.concatenated.data) checksum += v;
  double row_dev = 0.0;
  for (const auto& head : mh.heads)
    for (std::size_t i = 0; i < head.attention_map.rows; ++i) {
      long double sum = 0.0L;
      for (std::size_t j = 0; j < head.attention_map.cols; ++j) sum += head.attention_map.at(i, j);
      row_dev = std::max(row_dev, std::abs(static_cast<double>(sum) - 1.0));
    }

  // Gradient check on a deterministic sample of coordinates of the first
  // head's inputs and weights, against central differences.
  double grad_err = 0.0;
  {
    const auto& [w, mask] = heads.front();
    ylg::Matrix upstream = ylg::random_matrix(tokens, embed, rng);
    ylg::AttentionGradients grads = ylg::attention_backward(x, x, w, mask, upstream);
    auto loss_of = [&](const ylg::Matrix& xp, const ylg::AttentionWeights& wp) {
      ylg::AttentionOutput o = ylg::masked_attention(xp, xp, wp, mask);
      long double acc = 0.0L;
      for (std::size_t i = 0; i < o.output.data.size(); ++i)
        acc += static_cast<long double>(o.output.data[i]) * upstream.data[i];
      return static_cast<double>(acc);
    };
    const double eps = 1e-5;
    ylg::Rng pick(seed ^ 0x9e3779b97f4a7c15ULL);
    for (int probe = 0; probe < 24; ++probe) {
      // x gradient in self-attention is d_x + d_y.
      std::size_t which = static_cast<std::size_t>(pick.uniform() * 4);
      ylg::Matrix* param = nullptr;
      const ylg::Matrix* analytic = nullptr;
      ylg::Matrix xp = x;
      ylg::AttentionWeights wp = w;
      ylg::Matrix combined;
      switch (which) {
        case 0: {
          param = &xp;
          combined = grads.d_x;
          for (std::size_t i = 0; i < combined.data.size(); ++i)
            combined.data[i] += grads.d_y.data[i];
          analytic = &combined;
          break;
        }
        case 1: param = &wp.w_q; analytic = &grads.d_w_q; break;
        case 2: param = &wp.w_k; analytic = &grads.d_w_k; break;
        default: param = &wp.w_v; analytic = &grads.d_w_v; break;
      }
      std::size_t idx = static_cast<std::size_t>(pick.uniform() * param->data.size());
      double saved = param->data[idx];
      param->data[idx] = saved + eps;
      double hi = loss_of(xp, wp);
      param->data[idx] = saved - eps;
      double lo = loss_of(xp, wp);
      param->data[idx] = saved;
      double fd = (hi - lo) / (2 * eps);
      double an = analytic->data[idx];
      double denom = std::max({1.0, std::abs(fd), std::abs(an)});
      grad_err = std::max(grad_err, std::abs(fd - an) / denom);
    }
  }

  if (!saliency_out.empty()) {
    std::size_t h = file.esa ? file.grid_height : 1;
    std::size_t w = file.esa ? file.grid_width : f.n;
    write_text(saliency_out,
               ylg::io::to_pgm(ylg::saliency_from_map(mh.heads.front().attention_map, h, w)));
  }

  nlohmann::json report;
  report["checksum"] = static_cast<double>(checksum);
  report["row_sum_max_deviation"] = row_dev;
  report["gradient_check_max_rel_error"] = grad_err;
  report["seed"] = seed;
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_invert_demo(std::size_t dim, std::optional<std::uint64_t> seed_opt, std::size_t steps,
                    double lr, const std::string& csv_path) {
  if (dim == 0 || dim > 64) throw std::invalid_argument("invert-demo: dim must be in [1, 64]");
  std::uint64_t seed = seed_or_env(seed_opt);

  ylg::LinearToy toy = ylg::make_linear_toy(dim, seed);
  ylg::InversionConfig cfg;
  cfg.seed = seed;
  cfg.max_steps = steps;
  cfg.learning_rate = lr;
  ylg::InversionResult result =
      ylg::invert(toy.generator, toy.discriminator, toy.target, toy.saliencies, cfg);

  std::vector<double> oracle = ylg::solve_linear(toy.a, toy.target.data);
  long double err_sq = 0.0L;
  for (std::size_t i = 0; i < dim; ++i) {
    double d = result.z[i] - oracle[i];
    err_sq += static_cast<long double>(d) * d;
  }
  double final_error = std::sqrt(static_cast<double>(err_sq));

  if (!csv_path.empty()) {
    std::string csv = "step,loss\n";
    char buf[64];
    for (std::size_t i = 0; i < result.best_loss_trace.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, result.best_loss_trace[i]);
      csv += buf;
    }
    write_text(csv_path, csv);
  }

  nlohmann::json report;
  report["dim"] = dim;
  report["seed"] = seed;
  report["steps_run"] = result.steps_run;
  report["best_loss"] = result.best_loss;
  report["final_error"] = final_error;
  if (!csv_path.empty()) report["trace_csv"] = csv_path;
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-step sparse attention masks, information flow checks, and inversion demos"};
  app.require_subcommand(1);

  std::string pattern, esa_grid, out_path, in_path, format = "pbm", saliency_out, csv_path;
  std::size_t n = 0, expand = 1, tokens = 0, embed = 8, dim = 8, steps = 1500;
  ylg::Stride stride;
  double lr = 0.05;
  std::optional<std::uint64_t> seed;

  CLI::App* gen = app.add_subcommand("gen", "generate a pattern factorization");
  gen->add_option("pattern", pattern, "fixed|ltr|rtl|strided|strided-full")->required();
  gen->add_option("n", n, "token count")->required();
  gen->add_option("stride", stride, "block size (default ceil(sqrt(n)))");
  gen->add_option("--esa", esa_grid, "conjugate by the grid enumeration, e.g. 8x8");
  gen->add_option("--expand", expand, "replicate the final step to k*n query rows");
  gen->add_option("-o,--out", out_path, "output path (stdout when omitted)");

  CLI::App* check = app.add_subcommand("check", "report stats and the full-information verdict");
  check->add_option("in", in_path, "mask file")->required()->check(CLI::ExistingFile);

  CLI::App* viz = app.add_subcommand("viz", "render steps as PBM or the flow graph as DOT");
  viz->add_option("in", in_path, "mask file")->required()->check(CLI::ExistingFile);
  viz->add_option("-o,--out", out_path, "output path (pbm: stem, dot: file)")->required();
  viz->add_option("--format", format, "pbm|dot");

  CLI::App* attend = app.add_subcommand("attend", "run masked multihead attention on random data");
  attend->add_option("in", in_path, "mask file")->required()->check(CLI::ExistingFile);
  attend->add_option("--seed", seed, "rng seed (default YLG_SEED or 0)");
  attend->add_option("--tokens", tokens, "token count (must match the file)");
  attend->add_option("--embed", embed, "embedding width");
  attend->add_option("--saliency-out", saliency_out, "write head-0 saliency as PGM");

  CLI::App* demo = app.add_subcommand("invert-demo", "linear-generator inversion demo");
  demo->add_option("--dim", dim, "latent dimension (<= 64)");
  demo->add_option("--seed", seed, "rng seed (default YLG_SEED or 0)");
  demo->add_option("--steps", steps, "max optimization steps");
  demo->add_option("--lr", lr, "learning rate");
  demo->add_option("-o,--out", csv_path, "loss trace CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(pattern, n, stride, esa_grid, expand, out_path);
    if (check->parsed()) return cmd_check(in_path);
    if (viz->parsed()) return cmd_viz(in_path, out_path, format);
    if (attend->parsed()) return cmd_attend(in_path, seed, tokens, embed, saliency_out);
    if (demo->parsed()) return cmd_invert_demo(dim, seed, steps, lr, csv_path);
  } catch (const ylg::FullyMaskedRowError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ylg::DivergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
