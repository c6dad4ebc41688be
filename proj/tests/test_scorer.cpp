#include "doctest.h"

#include <cmath>

#include "spanseg/error.hpp"
#include "spanseg/scorer.hpp"

using namespace spanseg;

namespace {

ModelDims dims(std::size_t d, std::size_t tags) {
  ModelDims m;
  m.vocab = 5;
  m.embed = 2;
  m.hidden = 2;
  m.mlp = d;
  m.tags = tags;
  return m;
}

// MLP weights zeroed and biases set, so every boundary projects to `value`.
void constant_mlp(Model<double>& model, const MlpIds& ids, double value) {
  auto& w = model.params().value(ids.w).data;
  std::fill(w.begin(), w.end(), 0.0);
  auto& b = model.params().value(ids.b).data;
  std::fill(b.begin(), b.end(), value);
}

}  // namespace

TEST_CASE("zero biaffine gives probability one half everywhere") {
  Model<double> model(dims(4, 3));
  model.initialize(5);
  const std::vector<CharId> ids = {2, 3, 4, 2, 3};
  const auto table = encode_ids<double>(ids, model);
  const auto seg = score_all_seg(table, model, 7);
  CHECK(seg.count() == 15);
  seg.for_each([](Span, double p) { CHECK(p == 0.5); });

  const std::vector<Span> spans = {{0, 2}, {2, 5}};
  const auto tag = score_all_tag(table, model, spans);
  for (std::size_t i = 0; i < spans.size(); ++i)
    for (double s : tag.row(i)) CHECK(s == 0.0);
}

TEST_CASE("span counts honour the length limit") {
  CHECK(SegScoreTable(5, 7).count() == 15);
  CHECK(SegScoreTable(5, 2).count() == 9);
  CHECK(SegScoreTable(1, 7).count() == 1);
  const SegScoreTable t(5, 2);
  CHECK_FALSE(t.valid({0, 3}));
  CHECK(t.valid({3, 5}));
  CHECK_THROWS_AS(t.slot({0, 3}), ContractError);
}

TEST_CASE("seg biaffine hand example") {
  Model<double> model(dims(1, 3));
  const auto& m = model.ids();
  constant_mlp(model, m.seg_left, 2.0);
  constant_mlp(model, m.seg_right, 1.0);
  model.params().value(m.seg_biaffine).data = {1.0, 0.5};
  const std::vector<CharId> ids = {2, 3, 4};
  const auto seg = score_all_seg(encode_ids<double>(ids, model), model, 7);
  seg.for_each([](Span, double p) { CHECK(p == doctest::Approx(0.9241418199787566).epsilon(1e-14)); });
  CHECK(seg.logit({0, 3}) == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("tag biaffine hand example") {
  Model<double> model(dims(1, 5));
  const auto& m = model.ids();
  constant_mlp(model, m.tag_left, 2.0);
  constant_mlp(model, m.tag_right, 1.0);
  auto& w = model.params().value(m.tag_biaffine).data;
  CHECK(w.size() == 5 * 2 * 2);
  // Identity for tag 2 only.
  w[2 * 4 + 0] = 1.0;
  w[2 * 4 + 3] = 1.0;
  const std::vector<CharId> ids = {2, 3};
  const std::vector<Span> spans = {{0, 1}, {0, 2}};
  const auto tag = score_all_tag(encode_ids<double>(ids, model), model, spans);
  CHECK(tag.num_tags() == 5);
  CHECK(tag.scores({0, 2}).size() == 5);
  CHECK(tag.scores({0, 2})[2] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(tag.scores({0, 1})[0] == 0.0);
  CHECK_THROWS_AS(tag.scores({1, 2}), ContractError);
}

TEST_CASE("tag scoring rejects bad spans") {
  Model<double> model(dims(2, 3));
  const std::vector<CharId> ids = {2, 3};
  const auto table = encode_ids<double>(ids, model);
  const std::vector<Span> out_of_range = {{1, 3}};
  CHECK_THROWS_AS(score_all_tag(table, model, out_of_range), ContractError);
  const std::vector<Span> dup = {{0, 1}, {0, 1}};
  CHECK_THROWS_AS(score_all_tag(table, model, dup), ContractError);
}

TEST_CASE("sigmoid stays finite at extreme logits") {
  SegScoreTable t(2, 2);
  t.set_logit({0, 1}, 800.0);
  t.set_logit({1, 2}, -800.0);
  CHECK(t.prob({0, 1}) == 1.0);
  CHECK(t.prob({1, 2}) == 0.0);
  CHECK(std::isfinite(t.prob({1, 2})));
}
