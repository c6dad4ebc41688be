#include "doctest.h"

#include <algorithm>

#include "spanseg/decoder.hpp"
#include "spanseg/error.hpp"
#include "support.hpp"

using namespace spanseg;

TEST_CASE("threshold keeps probabilities strictly above one half") {
  SegScoreTable t(3, 7);
  t.set_prob({0, 1}, 0.9);
  t.set_prob({0, 2}, 0.6);
  t.set_prob({1, 2}, 0.3);
  t.set_prob({1, 3}, 0.7);
  t.set_prob({2, 3}, 0.8);
  t.set_prob({0, 3}, 0.2);
  std::vector<Span> kept;
  for (const auto& c : threshold_candidates(t)) kept.push_back(c.span);
  CHECK(kept == std::vector<Span>{{0, 1}, {0, 2}, {1, 3}, {2, 3}});

  SegScoreTable half(4, 3);
  half.for_each([&](Span s, double) { half.set_prob(s, 0.5); });
  CHECK(threshold_candidates(half).empty());

  SegScoreTable high(4, 3);
  high.for_each([&](Span s, double) { high.set_prob(s, 1.0 - 1e-9); });
  CHECK(threshold_candidates(high).size() == high.count());
}

TEST_CASE("post_process hand traces") {
  CHECK(post_process({{{0, 2}, 0.9}, {{1, 3}, 0.8}, {{2, 3}, 0.8}}, 3) ==
        Segmentation{{0, 2}, {2, 3}});
  CHECK(post_process({{{1, 3}, 0.9}}, 4) == Segmentation{{0, 1}, {1, 3}, {3, 4}});
  CHECK(post_process({}, 2) == Segmentation{{0, 1}, {1, 2}});
  CHECK(post_process({}, 0).empty());
  // Equal probabilities: smaller l first, then smaller r.
  CHECK(post_process({{{1, 3}, 0.7}, {{0, 2}, 0.7}}, 3) == Segmentation{{0, 2}, {2, 3}});
  CHECK(post_process({{{0, 2}, 0.7}, {{0, 1}, 0.7}}, 2) == Segmentation{{0, 1}, {1, 2}});
  // Out-of-range candidates are ignored.
  CHECK(post_process({{{2, 5}, 0.99}, {{0, 2}, 0.6}}, 3) == Segmentation{{0, 2}, {2, 3}});
}

TEST_CASE("post_process output is a partition and order-insensitive") {
  Rng rng(123);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = static_cast<int>(rng.below(13));
    CandidateSet cands;
    const std::size_t count = n == 0 ? 0 : rng.below(20);
    for (std::size_t k = 0; k < count; ++k) {
      const int l = static_cast<int>(rng.below(static_cast<std::size_t>(n)));
      const int r = l + 1 + static_cast<int>(rng.below(static_cast<std::size_t>(n - l)));
      // Coarse probabilities force ties.
      cands.push_back({{l, r}, 0.5 + 0.1 * static_cast<double>(1 + rng.below(5))});
    }
    const auto seg = post_process(cands, n);
    CHECK(is_partition(seg, n));
    auto shuffled = cands;
    rng.shuffle(shuffled);
    CHECK(post_process(shuffled, n) == seg);
  }
}

TEST_CASE("assign_tags argmax with non-word suppression") {
  // Tags: NN=0, VV=1, non-word=2.
  TagScoreTable t({{0, 1}, {1, 2}, {2, 3}}, 3);
  auto set = [&](Span s, std::vector<double> v) {
    auto row = t.scores_mut(s);
    std::copy(v.begin(), v.end(), row.begin());
  };
  set({0, 1}, {1.5, 0.1, -2.0});
  set({1, 2}, {1.5, 0.1, 2.0});
  set({2, 3}, {0.0, 0.0, 0.0});
  const Segmentation seg = {{0, 1}, {1, 2}, {2, 3}};
  const auto out = assign_tags(seg, t, 2);
  CHECK(out[0].tag == 0);
  CHECK(out[1].tag == 0);
  CHECK(out[2].tag == 0);
  set({1, 2}, {0.1, 1.5, 2.0});
  CHECK(assign_tags(seg, t, 2)[1].tag == 1);
  CHECK_THROWS_AS(assign_tags({{0, 3}}, t, 2), ContractError);
}
