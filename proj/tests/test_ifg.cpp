#include "doctest.h"

#include <stdexcept>

#include "oracles.hpp"
#include "ylg/ifg.hpp"
#include "ylg/patterns.hpp"

using namespace ylg;

namespace {

PatternFactorization one_step(const AttentionMask& mask) {
  return {PatternName::Fixed, mask.n_key, 1, {mask}};
}

}  // namespace

TEST_SUITE_BEGIN("ifg");

TEST_CASE("build_ifg shape and edge counts") {
  PatternFactorization f = make_ltr(9, 3);
  InformationFlowGraph g = build_ifg(f);
  CHECK(g.layer_sizes == std::vector<std::size_t>{9, 9, 9});
  CHECK(g.edge_count(0) == f.steps[0].count_true());
  CHECK(g.edge_count(1) == f.steps[1].count_true());
}

TEST_CASE("single dense step over two tokens") {
  InformationFlowGraph g = build_ifg(one_step(AttentionMask::all_true(2, 2)));
  CHECK(g.layer_sizes == std::vector<std::size_t>{2, 2});
  CHECK(g.total_edges() == 4);
  CHECK(full_information(g).full);
}

TEST_CASE("build_ifg rejects ragged factorizations") {
  PatternFactorization bad = make_ltr(9, 3);
  bad.steps[1] = AttentionMask::all_true(4, 4);
  CHECK_THROWS_AS(build_ifg(bad), std::invalid_argument);
  CHECK_THROWS_AS(build_ifg(expand_nonsquare(make_ltr(9, 3), 18)), std::invalid_argument);
}

TEST_CASE("full information verdicts with witnesses") {
  FullInformationResult fixed = full_information(build_ifg(make_fixed(9, 3)));
  CHECK_FALSE(fixed.full);
  CHECK(fixed.witness == Witness{1, 0});

  CHECK(full_information(build_ifg(make_ltr(9, 3))).full);
  CHECK(full_information(build_ifg(one_step(AttentionMask::all_true(5, 5)))).full);
}

TEST_CASE("reachability agrees with the boolean-product oracle") {
  for (PatternName name : {PatternName::Fixed, PatternName::Ltr, PatternName::Rtl,
                           PatternName::Strided, PatternName::StridedFull}) {
    PatternFactorization f = make_pattern(name, 9, 3);
    auto reach = reachable_matrix(build_ifg(f));
    auto expected = oracle::reach_from_masks(f.steps);
    CAPTURE(to_string(name));
    CHECK(reach == expected);
  }
}

TEST_CASE("star topology") {
  InformationFlowGraph star = star_topology(4);
  CHECK(star.layer_sizes == std::vector<std::size_t>{4, 1, 4});
  CHECK(star.total_edges() == 8);
  CHECK(full_information(star).full);

  InformationFlowGraph path = star_topology(1);
  CHECK(path.layer_sizes == std::vector<std::size_t>{1, 1, 1});
  CHECK(path.total_edges() == 2);

  CHECK_THROWS_AS(star_topology(0), std::invalid_argument);
}

TEST_CASE("star topology bottlenecks every pair at flow 1") {
  InformationFlowGraph star = star_topology(4);
  for (std::size_t s1 = 0; s1 < 4; ++s1)
    for (std::size_t s2 = s1 + 1; s2 < 4; ++s2)
      for (std::size_t t1 = 0; t1 < 4; ++t1)
        for (std::size_t t2 = t1 + 1; t2 < 4; ++t2)
          CHECK(pair_flow(star, {s1, s2}, {t1, t2}) == 1);
}

TEST_CASE("a dense single step supports every pair at flow 2") {
  InformationFlowGraph dense = build_ifg(one_step(AttentionMask::all_true(4, 4)));
  for (std::size_t s1 = 0; s1 < 4; ++s1)
    for (std::size_t s2 = s1 + 1; s2 < 4; ++s2)
      for (std::size_t t1 = 0; t1 < 4; ++t1)
        for (std::size_t t2 = t1 + 1; t2 < 4; ++t2)
          CHECK(pair_flow(dense, {s1, s2}, {t1, t2}) == 2);
}

TEST_CASE("pair flow matches the exhaustive disjoint-path oracle") {
  PatternFactorization ltr = make_ltr(9, 3);
  InformationFlowGraph g = build_ifg(ltr);
  CHECK(pair_flow(g, {0, 8}, {0, 8}) == 2);
  for (std::size_t s2 : {1, 4, 8})
    for (std::size_t t2 : {2, 5, 8}) {
      CAPTURE(s2);
      CAPTURE(t2);
      CHECK(pair_flow(g, {0, s2}, {1, t2}) ==
            oracle::brute_pair_flow(ltr.steps, {0, s2}, {1, t2}));
    }

  PatternFactorization strided = make_strided(9, 3);
  InformationFlowGraph sg = build_ifg(strided);
  for (std::size_t s2 : {1, 3, 8})
    for (std::size_t t2 : {4, 6, 8})
      CHECK(pair_flow(sg, {0, s2}, {2, t2}) ==
            oracle::brute_pair_flow(strided.steps, {0, s2}, {2, t2}));
}

TEST_CASE("pair flow never exceeds 2") {
  for (PatternName name : {PatternName::Ltr, PatternName::StridedFull}) {
    InformationFlowGraph g = build_ifg(make_pattern(name, 16, 4));
    for (std::size_t s2 : {1, 7, 15})
      for (std::size_t t2 : {3, 9, 15}) {
        int flow = pair_flow(g, {0, s2}, {1, t2});
        CHECK(flow >= 0);
        CHECK(flow <= 2);
      }
  }
}

TEST_CASE("pair flow argument errors") {
  InformationFlowGraph g = star_topology(4);
  CHECK_THROWS_AS(pair_flow(g, {0, 0}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(pair_flow(g, {0, 1}, {2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(pair_flow(g, {0, 9}, {1, 2}), std::invalid_argument);
}

TEST_CASE("edge stats") {
  CHECK(edge_stats(star_topology(5)).total_edges == 10);

  PatternFactorization dense2{PatternName::Ltr, 3, 1,
                              {AttentionMask::all_true(3, 3), AttentionMask::all_true(3, 3)}};
  EdgeStats stats = edge_stats(build_ifg(dense2));
  CHECK(stats.total_edges == 18);
  CHECK(stats.density == doctest::Approx(1.0));

  std::size_t ltr_total = edge_stats(build_ifg(make_ltr(9, 3))).total_edges;
  std::size_t fixed_total = edge_stats(build_ifg(make_fixed(9, 3))).total_edges;
  CHECK(ltr_total == 60);
  CHECK(fixed_total == 36);
  CHECK(ltr_total <= 2 * fixed_total);
}

TEST_CASE("check_factorization covers expanded deployments") {
  FactorizationCheck square = check_factorization(make_ltr(9, 3));
  CHECK(square.full);
  CHECK_FALSE(square.block.has_value());

  FactorizationCheck expanded = check_factorization(expand_nonsquare(make_ltr(16, 4), 32));
  CHECK(expanded.full);

  FactorizationCheck bad = check_factorization(expand_nonsquare(make_fixed(9, 3), 18));
  CHECK_FALSE(bad.full);
  REQUIRE(bad.block.has_value());
  CHECK(*bad.block == 0);
  CHECK(bad.witness == Witness{1, 0});
}

TEST_SUITE_END();
