#include "doctest.h"

#include <cmath>

#include "json.hpp"
#include "spanseg/error.hpp"
#include "spanseg/eval.hpp"

using namespace spanseg;

namespace {

Corpus corpus(const char* text, TagSet& tags) { return parse_corpus(text, tags); }

}  // namespace

TEST_CASE("seg PRF") {
  const std::vector<std::vector<Span>> gold = {{{0, 2}, {2, 3}}};
  CHECK(seg_prf(gold, gold).f1 == 1.0);
  const auto none = seg_prf(gold, {{{0, 1}, {1, 3}}});
  CHECK(none.matched == 0);
  CHECK(none.f1 == 0.0);

  const auto p = seg_prf({{{0, 2}, {2, 4}}}, {{{0, 2}, {2, 3}, {3, 4}}});
  CHECK(p.matched == 1);
  CHECK(p.precision == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(p.recall == 0.5);
  CHECK(p.f1 == doctest::Approx(0.4).epsilon(1e-15));

  CHECK_THROWS_AS(seg_prf(gold, {}), ContractError);
  CHECK_THROWS_AS(seg_prf(gold, {{{0, 2}, {2, 4}}}), ContractError);
}

TEST_CASE("micro averaging pools counts over sentences") {
  const auto p = seg_prf({{{0, 1}}, {{0, 1}, {1, 2}}}, {{{0, 1}}, {{0, 2}}});
  CHECK(p.matched == 1);
  CHECK(p.gold == 3);
  CHECK(p.pred == 2);
  CHECK(p.f1 == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("joint PRF") {
  const std::vector<std::vector<TaggedSpan>> gold = {{{{0, 2}, 0}, {{2, 3}, 1}}};
  const auto p = joint_prf(gold, {{{{0, 2}, 0}, {{2, 3}, 0}}});
  CHECK(p.precision == 0.5);
  CHECK(p.recall == 0.5);
  CHECK(p.f1 == 0.5);
  CHECK(joint_prf(gold, gold).f1 == 1.0);
  CHECK(joint_prf(gold, {{{{0, 2}, 1}, {{2, 3}, 0}}}).f1 == 0.0);
}

TEST_CASE("OOV and IV recall") {
  TagSet tags;
  const auto train = corpus("ab_NN", tags);
  const auto gold = corpus("ab_NN cd_VV", tags);
  const TagId vv = *tags.find("VV");
  const std::vector<std::vector<TaggedSpan>> pred = {{{{0, 2}, 0}, {{2, 3}, vv}, {{3, 4}, vv}}};
  const auto r = recall_by_vocab(gold.sentences, pred, word_types(train));
  REQUIRE(r.iv);
  REQUIRE(r.oov);
  CHECK(*r.iv == 1.0);
  CHECK(*r.oov == 0.0);

  const auto all_iv = recall_by_vocab(train.sentences, {{{{0, 2}, 0}}}, word_types(train));
  CHECK(*all_iv.iv == 1.0);
  CHECK_FALSE(all_iv.oov);

  const auto wrong = recall_by_vocab(gold.sentences, {{{{0, 4}, 0}}}, word_types(train));
  CHECK(*wrong.iv == 0.0);
  CHECK(*wrong.oov == 0.0);
}

TEST_CASE("CAS accuracy") {
  TagSet tags;
  const auto gold = corpus("a_X bc_X d_X", tags);
  const std::vector<std::u32string> cas = {U"bc"};
  const auto same = cas_accuracy(gold.sentences, {{{0, 1}, {1, 3}, {3, 4}}}, cas);
  CHECK(same.occurrences == 1);
  CHECK(*same.accuracy == 1.0);
  const auto split = cas_accuracy(gold.sentences, {{{0, 1}, {1, 2}, {2, 3}, {3, 4}}}, cas);
  CHECK(*split.accuracy == 0.0);
  const auto absent = cas_accuracy(gold.sentences, {{{0, 1}, {1, 3}, {3, 4}}}, {U"zz"});
  CHECK_FALSE(absent.accuracy);
  CHECK(absent.occurrences == 0);
}

TEST_CASE("CAS occurrences may overlap") {
  TagSet tags;
  const auto gold = corpus("aa_X a_X", tags);
  // "aa" occurs at 0 and 1. Gold boundaries: 0,2,3.
  const auto r = cas_accuracy(gold.sentences, {{{0, 2}, {2, 3}}}, {U"aa"});
  CHECK(r.occurrences == 2);
  CHECK(r.correct == 2);
  const auto r2 = cas_accuracy(gold.sentences, {{{0, 1}, {1, 3}}}, {U"aa"});
  CHECK(r2.correct == 0);
}

TEST_CASE("paired t-test") {
  const std::vector<double> diffs = {0.5, 1.5, 1.0}, zeros = {0, 0, 0};
  const auto r = paired_t_test(diffs, zeros);
  CHECK(r.t == doctest::Approx(3.464101615137755).epsilon(1e-12));
  CHECK(r.df == 2);
  CHECK(r.p == doctest::Approx(0.07417990022744853).epsilon(1e-10));

  const std::vector<double> a = {0.9, 0.8, 1.0, 0.7, 0.95}, b = {0.85, 0.82, 0.9, 0.6, 0.91};
  const auto r2 = paired_t_test(a, b);
  CHECK(r2.t == doctest::Approx(2.4246715773614635).epsilon(1e-10));
  CHECK(r2.p == doctest::Approx(0.07239650145772575).epsilon(1e-10));

  const std::vector<double> c = {0.2, 0.4, 0.1, 0.3}, d = {0.5, 0.3, 0.6, 0.35};
  const auto r3 = paired_t_test(c, d);
  CHECK(r3.t == doctest::Approx(-1.4110813025753959).epsilon(1e-10));
  CHECK(r3.p == doctest::Approx(0.2530458811663139).epsilon(1e-10));

  const auto same = paired_t_test(a, a);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);

  const std::vector<double> one = {1.0};
  CHECK_THROWS_AS(paired_t_test(one, one), ContractError);
  CHECK_THROWS_AS(paired_t_test(a, c), ContractError);
}

TEST_CASE("per-sentence joint F1") {
  const std::vector<std::vector<TaggedSpan>> gold = {{{{0, 1}, 0}}, {}, {{{0, 2}, 0}}};
  const std::vector<std::vector<TaggedSpan>> pred = {{{{0, 1}, 0}}, {}, {{{0, 1}, 0}, {{1, 2}, 0}}};
  CHECK(per_sentence_joint_f1(gold, pred) == std::vector<double>{1.0, 1.0, 0.0});
}

TEST_CASE("report formats") {
  MetricsReport r;
  r.seg = make_prf(1, 2, 4);
  r.joint = make_prf(1, 2, 4);
  VocabRecall v;
  v.iv = 0.5;
  r.vocab = v;
  const auto text = format_report(r);
  CHECK(text.find("seg_f1\t0.333333\n") != std::string::npos);
  CHECK(text.find("r_pos_oov\tundefined\n") != std::string::npos);
  const auto j = nlohmann::json::parse(report_to_json(r));
  CHECK(j["seg"]["precision"].get<double>() == 0.25);
  CHECK(j["r_pos_oov"].is_null());
  CHECK_FALSE(j.contains("significance"));
}
