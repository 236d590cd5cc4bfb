// Compares the OpenMP kernels against the serial reference and verifies the
// results are bitwise identical while timing both.
#include <chrono>
#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "ylg/attention.hpp"
#include "ylg/ifg.hpp"
#include "ylg/patterns.hpp"
#include "ylg/rng.hpp"

namespace {

template <typename F>
double time_best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto start = std::chrono::steady_clock::now();
    fn();
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    best = std::min(best, s);
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s, bool equal) {
  std::printf("%-28s %10.1f ms %10.1f ms %7.2fx   %s\n", name, serial_s * 1e3, parallel_s * 1e3,
              serial_s / parallel_s, equal ? "bitwise equal" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t tokens = 1024;
  std::size_t embed = 32;
  std::size_t reach_tokens = 2048;
  int reps = 3;

  CLI::App app{"serial vs OpenMP kernel comparison"};
  app.add_option("--tokens", tokens, "attention token count");
  app.add_option("--embed", embed, "embedding width");
  app.add_option("--reach-tokens", reach_tokens, "reachability token count");
  app.add_option("--reps", reps, "repetitions (best-of)");
  CLI11_PARSE(app, argc, argv);

  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

  ylg::Rng rng(1);
  ylg::Matrix x = ylg::random_matrix(tokens, embed, rng);
  ylg::AttentionWeights w{ylg::random_matrix(embed, embed, rng),
                          ylg::random_matrix(embed, embed, rng),
                          ylg::random_matrix(embed, embed, rng)};
  ylg::AttentionMask mask = ylg::make_ltr(tokens).steps[0];

  ylg::AttentionOutput fwd_serial, fwd_parallel;
  double ts = time_best_of(reps, [&] {
    fwd_serial = ylg::masked_attention(x, x, w, mask, ylg::Exec::Serial);
  });
  double tp = time_best_of(reps, [&] {
    fwd_parallel = ylg::masked_attention(x, x, w, mask, ylg::Exec::Parallel);
  });
  report("masked attention forward", ts, tp,
         fwd_serial.output == fwd_parallel.output &&
             fwd_serial.attention_map == fwd_parallel.attention_map);

  ylg::Matrix upstream = ylg::random_matrix(tokens, embed, rng);
  ylg::AttentionGradients bwd_serial, bwd_parallel;
  ts = time_best_of(reps, [&] {
    bwd_serial = ylg::attention_backward(x, x, w, mask, upstream, ylg::Exec::Serial);
  });
  tp = time_best_of(reps, [&] {
    bwd_parallel = ylg::attention_backward(x, x, w, mask, upstream, ylg::Exec::Parallel);
  });
  report("masked attention backward", ts, tp,
         bwd_serial.d_x == bwd_parallel.d_x && bwd_serial.d_y == bwd_parallel.d_y &&
             bwd_serial.d_w_q == bwd_parallel.d_w_q && bwd_serial.d_w_k == bwd_parallel.d_w_k &&
             bwd_serial.d_w_v == bwd_parallel.d_w_v);

  ylg::InformationFlowGraph g = ylg::build_ifg(ylg::make_ltr(reach_tokens));
  std::vector<std::vector<bool>> reach_serial, reach_parallel;
  ts = time_best_of(reps, [&] { reach_serial = ylg::reachable_matrix(g, ylg::Exec::Serial); });
  tp = time_best_of(reps, [&] { reach_parallel = ylg::reachable_matrix(g, ylg::Exec::Parallel); });
  report("flow-graph reachability", ts, tp, reach_serial == reach_parallel);

  return 0;
}
