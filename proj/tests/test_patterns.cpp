#include "doctest.h"

#include <stdexcept>

#include "oracles.hpp"
#include "ylg/ifg.hpp"
#include "ylg/patterns.hpp"

using namespace ylg;

namespace {

bool masks_match(const AttentionMask& m, long n, const oracle::Pred& pred) {
  return m == oracle::mask_from(n, pred);
}

}  // namespace

TEST_SUITE_BEGIN("patterns");

TEST_CASE("fixed matches the per-cell formulas") {
  PatternFactorization f = make_fixed(9, 3);
  CHECK(masks_match(f.steps[0], 9, oracle::fixed_step1(3)));
  CHECK(masks_match(f.steps[1], 9, oracle::fixed_step2(3)));
  CHECK(f.steps[0].count_true() == 18);  // frozen from the per-cell oracle
  CHECK(f.steps[1].count_true() == 18);
}

TEST_CASE("fixed(9,3) is not full information, witness (1,0)") {
  FullInformationResult r = full_information(build_ifg(make_fixed(9, 3)));
  CHECK_FALSE(r.full);
  CHECK(r.witness == Witness{1, 0});
  auto reach = reachable_matrix(build_ifg(make_fixed(9, 3)));
  CHECK_FALSE(reach[1][0]);
}

TEST_CASE("fixed(1,1) degenerates to a single true bit per step") {
  PatternFactorization f = make_fixed(1, 1);
  for (const auto& step : f.steps) {
    CHECK(step.n_query == 1);
    CHECK(step.at(0, 0));
  }
  CHECK(full_information(build_ifg(f)).full);
}

TEST_CASE("ltr matches the per-cell formulas and is full information") {
  PatternFactorization f = make_ltr(9, 3);
  CHECK(masks_match(f.steps[0], 9, oracle::ltr_step1(3)));
  CHECK(masks_match(f.steps[1], 9, oracle::ltr_step2(3)));
  CHECK(f.steps[0].count_true() == 27);
  CHECK(f.steps[1].count_true() == 33);
  CHECK(full_information(build_ifg(f)).full);
}

TEST_CASE("ltr edge count is at most twice fixed") {
  std::size_t ltr = make_ltr(9, 3).total_true();
  std::size_t fixed = make_fixed(9, 3).total_true();
  CHECK(ltr == 60);
  CHECK(fixed == 36);
  CHECK(ltr <= 2 * fixed);
}

TEST_CASE("ltr(4,2) step 1 is block diagonal") {
  AttentionMask step1 = make_ltr(4, 2).steps[0];
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) CHECK(step1.at(a, b) == (a / 2 == b / 2));
}

TEST_CASE("rtl is the transposed, step-swapped ltr") {
  PatternFactorization ltr = make_ltr(9, 3);
  PatternFactorization rtl = make_rtl(9, 3);
  CHECK(rtl.steps[0] == ltr.steps[1].transposed());
  CHECK(rtl.steps[1] == ltr.steps[0].transposed());
  CHECK(full_information(build_ifg(rtl)).full);
  CHECK(rtl.steps[0].diagonal_true());
  CHECK(rtl.steps[1].diagonal_true());
}

TEST_CASE("rtl(1,1) equals ltr(1,1)") {
  CHECK(make_rtl(1, 1).steps == make_ltr(1, 1).steps);
}

TEST_CASE("rtl reachability is the transpose of ltr reachability") {
  auto r_ltr = reachable_matrix(build_ifg(make_ltr(9, 3)));
  auto r_rtl = reachable_matrix(build_ifg(make_rtl(9, 3)));
  for (std::size_t s = 0; s < 9; ++s)
    for (std::size_t t = 0; t < 9; ++t) CHECK(r_rtl[s][t] == r_ltr[t][s]);
}

TEST_CASE("strided matches the per-cell formulas; not full information") {
  PatternFactorization f = make_strided(9, 3);
  CHECK(masks_match(f.steps[0], 9, oracle::strided_step1(3)));
  CHECK(masks_match(f.steps[1], 9, oracle::strided_step2(3)));
  CHECK(f.steps[0].count_true() == 24);
  CHECK(f.steps[1].count_true() == 18);
  FullInformationResult r = full_information(build_ifg(f));
  CHECK_FALSE(r.full);
  CHECK(r.witness == Witness{1, 0});
}

TEST_CASE("strided(2,2) window is the full lower triangle") {
  PatternFactorization f = make_strided(2, 2);
  CHECK(f.steps[0].at(0, 0));
  CHECK_FALSE(f.steps[0].at(0, 1));
  CHECK(f.steps[0].at(1, 0));
  CHECK(f.steps[0].at(1, 1));
  // The causal window cannot reach rightward, so token 1 never feeds token 0
  // and full information cannot hold.
  FullInformationResult r = full_information(build_ifg(f));
  CHECK_FALSE(r.full);
  CHECK(r.witness == Witness{1, 0});
}

TEST_CASE("strided-full matches the per-cell formulas and is full information") {
  PatternFactorization f = make_strided_full(9, 3);
  CHECK(masks_match(f.steps[0], 9, oracle::strided_full_step1(3)));
  CHECK(masks_match(f.steps[1], 9, oracle::strided_full_step2(3)));
  CHECK(full_information(build_ifg(f)).full);
}

TEST_CASE("strided-full(3,1): identity window then dense") {
  PatternFactorization f = make_strided_full(3, 1);
  CHECK(f.steps[0] == AttentionMask::identity(3));
  CHECK(f.steps[1] == AttentionMask::all_true(3, 3));
  CHECK(full_information(build_ifg(f)).full);
}

TEST_CASE("strided-full(16,4) respects the sparsity budget") {
  CHECK(make_strided_full(16, 4).total_true() == 164);  // frozen from the oracle
  CHECK(make_strided_full(16, 4).total_true() <= 256);
}

TEST_CASE("full-information matrix across sizes") {
  for (std::size_t side : {2, 3, 4, 5, 8, 16}) {
    std::size_t n = side * side;
    CAPTURE(n);
    CHECK(full_information(build_ifg(make_ltr(n, side))).full);
    CHECK(full_information(build_ifg(make_rtl(n, side))).full);
    CHECK(full_information(build_ifg(make_strided_full(n, side))).full);
  }
}

TEST_CASE("sparsity budget at default stride") {
  for (std::size_t side : {4, 8, 16}) {
    std::size_t n = side * side;
    double budget = 4.0 * static_cast<double>(n) * static_cast<double>(side);
    CAPTURE(n);
    CHECK(static_cast<double>(make_ltr(n, side).total_true()) <= budget);
    CHECK(static_cast<double>(make_rtl(n, side).total_true()) <= budget);
    CHECK(static_cast<double>(make_strided_full(n, side).total_true()) <= budget);
  }
}

TEST_CASE("every row attends and square diagonals are true") {
  for (PatternName name : {PatternName::Fixed, PatternName::Ltr, PatternName::Rtl,
                           PatternName::Strided, PatternName::StridedFull}) {
    for (auto [n, s] : {std::pair<std::size_t, std::size_t>{9, 3}, {16, 4}, {10, 3}, {7, 7}}) {
      PatternFactorization f = make_pattern(name, n, s);
      CAPTURE(to_string(name));
      CAPTURE(n);
      for (const auto& step : f.steps) {
        CHECK(step.every_row_attends());
        CHECK(step.diagonal_true());
      }
    }
  }
}

TEST_CASE("default stride is ceil(sqrt(n))") {
  CHECK(default_stride(9) == 3);
  CHECK(default_stride(10) == 4);
  CHECK(default_stride(16) == 4);
  CHECK(default_stride(1) == 1);
  CHECK(make_ltr(9).stride == 3);
  CHECK(make_ltr(10).stride == 4);
}

TEST_CASE("constructor argument errors") {
  CHECK_THROWS_AS(make_fixed(9, std::size_t{0}), std::invalid_argument);
  CHECK_THROWS_AS(make_fixed(9, std::size_t{10}), std::invalid_argument);
  CHECK_THROWS_AS(make_ltr(0), std::invalid_argument);
  CHECK_THROWS_AS(make_strided(4, std::size_t{5}), std::invalid_argument);
}

TEST_CASE("expand_nonsquare replicates final-step rows blockwise") {
  PatternFactorization f = make_ltr(4, 2);
  PatternFactorization e = expand_nonsquare(f, 8);
  CHECK(e.steps[0] == f.steps[0]);
  CHECK(e.steps[1].n_query == 8);
  CHECK(e.steps[1].n_key == 4);
  for (std::size_t q = 0; q < 4; ++q)
    for (std::size_t k = 0; k < 4; ++k) CHECK(e.steps[1].at(q, k) == e.steps[1].at(q + 4, k));
}

TEST_CASE("expand_nonsquare with k=1 is bit-identical") {
  PatternFactorization f = make_strided_full(9, 3);
  CHECK(expand_nonsquare(f, 9) == f);
}

TEST_CASE("expand_nonsquare errors on a non-multiple") {
  CHECK_THROWS_AS(expand_nonsquare(make_ltr(4, 2), 6), std::invalid_argument);
  CHECK_THROWS_AS(expand_nonsquare(make_ltr(4, 2), 0), std::invalid_argument);
}

TEST_CASE("expanded 1024x256 deployment keeps blockwise full information") {
  PatternFactorization e = expand_nonsquare(make_ltr(256, 16), 1024);
  CHECK(e.steps.back().n_query == 1024);
  CHECK(e.steps.back().n_key == 256);
  CHECK(e.steps.front().n_query == 256);
  FactorizationCheck check = check_factorization(e);
  CHECK(check.full);
}

TEST_CASE("head assignment deploys each pattern step twice") {
  auto heads = head_assignment(9, 3);
  REQUIRE(heads.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(heads[i].first == i);
  for (std::size_t i = 0; i < 4; ++i) CHECK(heads[i].second == heads[i + 4].second);

  PatternFactorization ltr = make_ltr(9, 3);
  PatternFactorization rtl = make_rtl(9, 3);
  CHECK(heads[0].second == ltr.steps[0]);
  CHECK(heads[1].second == ltr.steps[1]);
  CHECK(heads[2].second == rtl.steps[0]);
  CHECK(heads[3].second == rtl.steps[1]);

  // union of the first four masks == union of all ltr/rtl steps
  for (std::size_t a = 0; a < 9; ++a)
    for (std::size_t b = 0; b < 9; ++b) {
      bool first_four = heads[0].second.at(a, b) || heads[1].second.at(a, b) ||
                        heads[2].second.at(a, b) || heads[3].second.at(a, b);
      bool steps_union = ltr.steps[0].at(a, b) || ltr.steps[1].at(a, b) ||
                         rtl.steps[0].at(a, b) || rtl.steps[1].at(a, b);
      CHECK(first_four == steps_union);
    }
}

TEST_CASE("head assignment at n=1 is eight singleton masks") {
  auto heads = head_assignment(1, 1);
  REQUIRE(heads.size() == 8);
  for (const auto& [idx, mask] : heads) {
    CHECK(mask.n_query == 1);
    CHECK(mask.at(0, 0));
  }
}

TEST_SUITE_END();
