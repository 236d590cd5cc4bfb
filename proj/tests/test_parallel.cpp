// The OpenMP kernels must be bitwise equal to the serial reference: work is
// split across rows/sources only and every reduction keeps a fixed order.
#include "doctest.h"

#include "ylg/attention.hpp"
#include "ylg/ifg.hpp"
#include "ylg/patterns.hpp"
#include "ylg/rng.hpp"

using namespace ylg;

TEST_SUITE_BEGIN("parallel");

TEST_CASE("matmul parallel equals serial bitwise") {
  Rng rng(31);
  Matrix a = random_matrix(37, 19, rng);
  Matrix b = random_matrix(19, 23, rng);
  CHECK(matmul(a, b, Exec::Parallel) == matmul(a, b, Exec::Serial));
}

TEST_CASE("masked attention parallel equals serial bitwise") {
  Rng rng(32);
  Matrix x = random_matrix(64, 16, rng);
  AttentionWeights w{random_matrix(16, 8, rng), random_matrix(16, 8, rng),
                     random_matrix(16, 8, rng)};
  AttentionMask mask = make_ltr(64, 8).steps[0];
  AttentionOutput par = masked_attention(x, x, w, mask, Exec::Parallel);
  AttentionOutput ser = masked_attention(x, x, w, mask, Exec::Serial);
  CHECK(par.output == ser.output);
  CHECK(par.attention_map == ser.attention_map);
}

TEST_CASE("attention backward parallel equals serial bitwise") {
  Rng rng(33);
  Matrix x = random_matrix(32, 8, rng);
  Matrix y = random_matrix(24, 6, rng);
  AttentionWeights w{random_matrix(8, 5, rng), random_matrix(6, 5, rng),
                     random_matrix(6, 7, rng)};
  AttentionMask mask(32, 24);
  for (std::size_t i = 0; i < 32; ++i)
    for (std::size_t j = 0; j < 24; ++j)
      if ((3 * i + j) % 4 != 1 || j == 0) mask.set(i, j);
  Matrix upstream = random_matrix(32, 7, rng);
  AttentionGradients par = attention_backward(x, y, w, mask, upstream, Exec::Parallel);
  AttentionGradients ser = attention_backward(x, y, w, mask, upstream, Exec::Serial);
  CHECK(par.d_x == ser.d_x);
  CHECK(par.d_y == ser.d_y);
  CHECK(par.d_w_q == ser.d_w_q);
  CHECK(par.d_w_k == ser.d_w_k);
  CHECK(par.d_w_v == ser.d_w_v);
}

TEST_CASE("reachability parallel equals serial") {
  for (PatternName name : {PatternName::Fixed, PatternName::Ltr, PatternName::StridedFull}) {
    InformationFlowGraph g = build_ifg(make_pattern(name, 256, 16));
    CHECK(reachable_matrix(g, Exec::Parallel) == reachable_matrix(g, Exec::Serial));
    FullInformationResult par = full_information(g, Exec::Parallel);
    FullInformationResult ser = full_information(g, Exec::Serial);
    CHECK(par.full == ser.full);
    CHECK(par.witness == ser.witness);
  }
}

TEST_CASE("multihead parallel equals serial bitwise") {
  Rng rng(34);
  Matrix x = random_matrix(16, 8, rng);
  std::vector<std::pair<AttentionWeights, AttentionMask>> heads;
  for (const auto& [idx, mask] : head_assignment(16, 4))
    heads.emplace_back(
        AttentionWeights{random_matrix(8, 4, rng), random_matrix(8, 4, rng),
                         random_matrix(8, 4, rng)},
        mask);
  CHECK(multihead_attention(x, x, heads, Exec::Parallel).concatenated ==
        multihead_attention(x, x, heads, Exec::Serial).concatenated);
}

TEST_SUITE_END();
