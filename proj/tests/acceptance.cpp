// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Criterion numbers on the command line run a subset.

#include <omp.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "spanseg/cli.hpp"
#include "spanseg/eval.hpp"
#include "spanseg/model_io.hpp"
#include "spanseg/pipeline.hpp"
#include "spanseg/synthetic.hpp"
#include "spanseg/utf8.hpp"
#include "support.hpp"

using namespace spanseg;
namespace fs = std::filesystem;

namespace {

constexpr double kGradTol = 1e-4;
constexpr double kGradEps = 1e-3;
constexpr int kGradConfigs = 20;
constexpr double kGradSeconds = 60;

constexpr int kDecoderSets = 1000;
constexpr int kDecoderMaxN = 12;
constexpr int kDecoderPermutations = 5;
constexpr double kDecoderSeconds = 10;

constexpr int kLossInstances = 100;
constexpr int kLossMaxN = 10;
constexpr double kLossTol = 1e-10;

constexpr int kMemorizeEpochs = 200;
constexpr double kMemorizeSeconds = 120;

constexpr std::size_t kGeneralizeSentences = 500;
constexpr double kGeneralizeF1 = 0.90;
constexpr double kGeneralizeSeconds = 600;

constexpr int kMetricPairs = 100;
constexpr int kRoundTripCases = 100;

constexpr double kTTol = 0.001;
constexpr double kPTol = 0.0005;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int failed = 0;
  std::string worst_name;
  for (int k = 1; k <= kGradConfigs; ++k) {
    const auto c = testing::random_grad_case(static_cast<std::uint64_t>(k));
    const auto r = testing::check_case(c, 1000 + static_cast<std::uint64_t>(k), kGradEps, kGradTol);
    failed += r.pass ? 0 : 1;
    for (const auto& e : r.params) {
      if (e.max_rel_error >= worst) {
        worst = e.max_rel_error;
        worst_name = e.name;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {failed == 0 && worst < kGradTol && secs < kGradSeconds,
          fmt("%d configs, max rel error %.2e (%s) < %.0e, eps %.0e, %.1fs", kGradConfigs, worst,
              worst_name.c_str(), kGradTol, kGradEps, secs)};
}

// ---------------------------------------------------------------------------

bool sorted_gapless_partition(const Segmentation& seg, int n) {
  int at = 0;
  for (const auto& s : seg) {
    if (s.l != at || s.r <= s.l) return false;
    at = s.r;
  }
  return at == n;
}

Outcome decoder_property() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  int bad_partition = 0, bad_order = 0;
  for (int trial = 0; trial < kDecoderSets; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(kDecoderMaxN));
    CandidateSet cands;
    const std::size_t count = rng.below(static_cast<std::size_t>(n * (n + 1) / 2 + 1));
    for (std::size_t k = 0; k < count; ++k) {
      const int l = static_cast<int>(rng.below(static_cast<std::size_t>(n)));
      const int r = l + 1 + static_cast<int>(rng.below(static_cast<std::size_t>(n - l)));
      // Half the sets use a coarse grid so ties are common.
      const double p = trial % 2 ? 0.5 + 0.5 * rng.uniform() : 0.5 + 0.1 * static_cast<double>(1 + rng.below(4));
      cands.push_back({{l, r}, p});
    }
    const auto seg = post_process(cands, n);
    if (!sorted_gapless_partition(seg, n)) ++bad_partition;
    for (int k = 0; k < kDecoderPermutations; ++k) {
      auto perm = cands;
      rng.shuffle(perm);
      if (post_process(perm, n) != seg) ++bad_order;
    }
  }
  const double secs = seconds_since(t0);
  return {bad_partition == 0 && bad_order == 0 && secs < kDecoderSeconds,
          fmt("%d sets (n <= %d), %d non-partitions, %d order-dependent outputs over %d permutations each, %.2fs",
              kDecoderSets, kDecoderMaxN, bad_partition, bad_order, kDecoderPermutations, secs)};
}

// ---------------------------------------------------------------------------

// Direct-summation references written without the library's helpers.
double reference_seg_loss(int n, int max_len, const std::function<double(int, int)>& prob,
                          const std::vector<Span>& gold) {
  double sum = 0.0;
  int count = 0;
  for (int r = 1; r <= n; ++r) {
    for (int l = r - 1; l >= 0 && r - l <= max_len; --l) {
      bool positive = false;
      for (const auto& g : gold) positive = positive || (g.l == l && g.r == r);
      double p = prob(l, r);
      p = std::min(std::max(p, 1e-7), 1.0 - 1e-7);
      sum += positive ? -std::log(p) : -std::log(1.0 - p);
      ++count;
    }
  }
  return count ? sum / count : 0.0;
}

double reference_tag_loss(const std::vector<std::vector<double>>& scores, const std::vector<TagId>& targets) {
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double z = 0.0;
    for (double s : scores[i]) z += std::exp(s);
    sum += -std::log(std::exp(scores[i][static_cast<std::size_t>(targets[i])]) / z);
  }
  return scores.empty() ? 0.0 : sum / static_cast<double>(scores.size());
}

double rel(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

Outcome loss_oracle() {
  Rng rng(77);
  double worst_seg = 0.0, worst_tag = 0.0;
  for (int trial = 0; trial < kLossInstances; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(kLossMaxN));
    const int K = 1 + static_cast<int>(rng.below(8));
    SegScoreTable table(n, K);
    table.for_each([&](Span s, double) { table.set_logit(s, rng.uniform(-6, 6)); });
    const auto gold = testing::random_partition(rng, n, n);
    const double ref = reference_seg_loss(n, K, [&](int l, int r) { return table.prob({l, r}); }, gold);
    worst_seg = std::max(worst_seg, rel(loss_seg(table, gold), ref));

    const auto spans = testing::random_partition(rng, n, K);
    const std::size_t T = 2 + rng.below(6);
    TagScoreTable tags(spans, T);
    std::vector<std::vector<double>> rows(spans.size(), std::vector<double>(T));
    std::vector<TagId> targets;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      auto row = tags.row(i);
      for (std::size_t t = 0; t < T; ++t) row[t] = rows[i][t] = rng.uniform(-5, 5);
      targets.push_back(static_cast<TagId>(rng.below(T)));
    }
    worst_tag = std::max(worst_tag, rel(loss_tag(tags, targets), reference_tag_loss(rows, targets)));
  }
  return {worst_seg < kLossTol && worst_tag < kLossTol,
          fmt("%d instances (n <= %d), max rel error seg %.1e, tag %.1e < %.0e", kLossInstances, kLossMaxN,
              worst_seg, worst_tag, kLossTol)};
}

// ---------------------------------------------------------------------------

std::pair<PRF, PRF> score(const Model<float>& model, const Vocab& vocab, const Corpus& gold, int K) {
  std::vector<std::u32string> chars;
  std::vector<std::vector<TaggedSpan>> g;
  std::vector<std::vector<Span>> gs, ps;
  for (const auto& s : gold.sentences) {
    chars.push_back(s.chars);
    g.push_back(words_to_spans(s));
    gs.push_back(untagged(g.back()));
  }
  const auto pred = predict_batch(model, vocab, chars, K);
  for (const auto& p : pred) ps.push_back(untagged(p));
  return {seg_prf(gs, ps), joint_prf(g, pred)};
}

Outcome memorization() {
  const auto t0 = std::chrono::steady_clock::now();
  TagSet tags;
  const auto corpus = parse_corpus(memorization_text(), tags);
  std::size_t max_chars = 0;
  for (const auto& s : corpus.sentences) max_chars = std::max(max_chars, s.chars.size());
  const auto vocab = build_vocab(corpus);
  TrainConfig c;
  c.embed_dim = 32;
  c.hidden = 32;
  c.mlp = 32;
  c.lr = 1e-3;
  c.max_epochs = kMemorizeEpochs;
  c.patience = kMemorizeEpochs;
  c.dropout = 0.0;
  c.batch_size = 4;
  const auto r = train(corpus, corpus, vocab, tags, c);
  const auto [seg, joint] = score(r.best, vocab, corpus, c.max_span_len);
  const double secs = seconds_since(t0);
  const bool shape_ok = corpus.size() == 20 && max_chars <= 12 && tags.pos_count() == 4;
  return {shape_ok && seg.f1 == 1.0 && joint.f1 == 1.0 && secs < kMemorizeSeconds,
          fmt("%zu sentences (<= %zu chars, %zu tags): train Seg F1 %.4f, Tag F1 %.4f, first reached at epoch %d "
              "of %d, %.1fs",
              corpus.size(), max_chars, tags.pos_count(), seg.f1, joint.f1, r.best_epoch, kMemorizeEpochs, secs)};
}

// ---------------------------------------------------------------------------

Outcome generalization() {
  const auto t0 = std::chrono::steady_clock::now();
  TagSet tags;
  const auto splits = lexicon_splits(kGeneralizeSentences, 7, tags);
  const auto vocab = build_vocab(splits.train);
  TrainConfig c;
  c.embed_dim = 32;
  c.hidden = 64;
  c.mlp = 64;
  c.lr = 2e-3;
  c.max_epochs = 40;
  c.patience = 10;
  c.dropout = 0.1;
  const auto r = train(splits.train, splits.dev, vocab, tags, c);
  const auto [dev_seg, dev_joint] = score(r.best, vocab, splits.dev, c.max_span_len);
  const auto [test_seg, test_joint] = score(r.best, vocab, splits.test, c.max_span_len);
  const double secs = seconds_since(t0);
  return {dev_joint.f1 >= kGeneralizeF1 && secs < kGeneralizeSeconds,
          fmt("%zu/%zu/%zu split: dev joint F1 %.4f >= %.2f (seg %.4f; test joint %.4f), best epoch %d, %.1fs",
              splits.train.size(), splits.dev.size(), splits.test.size(), dev_joint.f1, kGeneralizeF1, dev_seg.f1,
              test_joint.f1, r.best_epoch, secs)};
}

// ---------------------------------------------------------------------------

Outcome metric_oracles() {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) failures.push_back(what);
  };
  auto near = [](double a, double b) { return std::abs(a - b) < 1e-12; };

  const auto none = seg_prf({{{0, 2}, {2, 3}}}, {{{0, 1}, {1, 3}}});
  expect(none.f1 == 0.0, "seg zero");
  const auto p = seg_prf({{{0, 2}, {2, 4}}}, {{{0, 2}, {2, 3}, {3, 4}}});
  expect(near(p.precision, 1.0 / 3) && near(p.recall, 0.5) && near(p.f1, 0.4), "seg 1/3,1/2,0.4");
  const auto j = joint_prf({{{{0, 2}, 0}, {{2, 3}, 1}}}, {{{{0, 2}, 0}, {{2, 3}, 0}}});
  expect(near(j.precision, 0.5) && near(j.recall, 0.5) && near(j.f1, 0.5), "joint 0.5");

  TagSet tags;
  const auto train = parse_corpus("ab_NN", tags);
  const auto gold = parse_corpus("ab_NN cd_VV", tags);
  const TagId vv = *tags.find("VV");
  const auto vr = recall_by_vocab(gold.sentences, {{{{0, 2}, 0}, {{2, 3}, vv}, {{3, 4}, vv}}}, word_types(train));
  expect(vr.iv && *vr.iv == 1.0 && vr.oov && *vr.oov == 0.0, "recall iv 1 / oov 0");
  const auto all_iv = recall_by_vocab(train.sentences, {{{{0, 2}, 0}}}, word_types(train));
  expect(all_iv.iv && *all_iv.iv == 1.0 && !all_iv.oov, "recall oov undefined");

  const auto cas_gold = parse_corpus("a_X bc_X d_X", tags);
  const auto c1 = cas_accuracy(cas_gold.sentences, {{{0, 1}, {1, 3}, {3, 4}}}, {U"bc"});
  const auto c2 = cas_accuracy(cas_gold.sentences, {{{0, 1}, {1, 2}, {2, 3}, {3, 4}}}, {U"bc"});
  expect(c1.accuracy && *c1.accuracy == 1.0 && c2.accuracy && *c2.accuracy == 0.0, "cas");

  Rng rng(31);
  int violations = 0, oracle_mismatch = 0;
  for (int k = 0; k < kMetricPairs; ++k) {
    std::vector<std::vector<TaggedSpan>> g, pr;
    std::vector<std::vector<Span>> gs, ps;
    std::size_t matched_seg = 0, matched_joint = 0, ng = 0, np = 0;
    const std::size_t sentences = 1 + rng.below(8);
    for (std::size_t s = 0; s < sentences; ++s) {
      const int n = 1 + static_cast<int>(rng.below(12));
      g.push_back(testing::random_tagged_partition(rng, n, 4, 3));
      pr.push_back(testing::random_tagged_partition(rng, n, 4, 3));
      gs.push_back(untagged(g.back()));
      ps.push_back(untagged(pr.back()));
      for (const auto& a : pr.back()) {
        for (const auto& b : g.back()) {
          matched_seg += a.span == b.span;
          matched_joint += a == b;
        }
      }
      ng += g.back().size();
      np += pr.back().size();
    }
    const auto sp = seg_prf(gs, ps);
    const auto jp = joint_prf(g, pr);
    if (jp.f1 > sp.f1 || jp.precision > sp.precision || jp.recall > sp.recall) ++violations;
    const double ref_f1 = matched_seg ? 2.0 * matched_seg / static_cast<double>(ng + np) : 0.0;
    const double ref_jf1 = matched_joint ? 2.0 * matched_joint / static_cast<double>(ng + np) : 0.0;
    if (!near(sp.f1, ref_f1) || !near(jp.f1, ref_jf1)) ++oracle_mismatch;
  }
  expect(violations == 0, "joint <= seg");
  expect(oracle_mismatch == 0, "random pair oracle");

  std::string detail = fmt("worked examples + %d random pairs: %d joint>seg violations, %d oracle mismatches",
                           kMetricPairs, violations, oracle_mismatch);
  for (const auto& f : failures) detail += "; failed: " + f;
  return {failures.empty(), detail};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "spanseg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome reproducibility() {
  const auto dir = fs::temp_directory_path() / ("spanseg-accept-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  TagSet tags;
  const auto text = lexicon_text(120, 11);
  std::ofstream(dir / "train.txt") << text.substr(0, text.find('\n', text.size() * 8 / 10) + 1);
  std::ofstream(dir / "dev.txt") << text.substr(text.find('\n', text.size() * 8 / 10) + 1);
  std::string raw;
  for (const auto& s : parse_corpus(text, tags).sentences) raw += utf8::encode(s.chars) + "\n";
  std::ofstream(dir / "raw.txt") << raw;
  std::ofstream(dir / "cfg") << "embed_dim = 16\nhidden = 24\nmlp = 24\nmax_epochs = 4\npatience = 4\ndropout = 0.2\n";

  const int saved = omp_get_max_threads();
  bool ok = true;
  for (int run = 0; run < 2; ++run) {
    omp_set_num_threads(run == 0 ? 1 : 4);
    const auto out = dir / ("run" + std::to_string(run));
    ok = ok && cli({"train", "--train", (dir / "train.txt").string(), "--dev", (dir / "dev.txt").string(), "--config",
                    (dir / "cfg").string(), "--out", out.string(), "--seed", "3"}) == kExitOk;
    ok = ok && cli({"predict", "--model", (out / "best.model").string(), "--input", (dir / "raw.txt").string(),
                    "--out", (out / "pred.txt").string()}) == kExitOk;
  }
  omp_set_num_threads(saved);
  const auto log0 = slurp(dir / "run0/train.log"), log1 = slurp(dir / "run1/train.log");
  const bool logs = !log0.empty() && log0 == log1;
  const bool models = slurp(dir / "run0/final.model") == slurp(dir / "run1/final.model");
  const auto pred0 = slurp(dir / "run0/pred.txt");
  const bool preds = !pred0.empty() && pred0 == slurp(dir / "run1/pred.txt");
  fs::remove_all(dir);
  return {ok && logs && models && preds,
          fmt("two CLI runs (1 and 4 threads): training logs %s, final models %s, prediction files %s",
              logs ? "identical" : "DIFFER", models ? "identical" : "DIFFER", preds ? "identical" : "DIFFER")};
}

// ---------------------------------------------------------------------------

Outcome round_trips() {
  Rng rng(8080);
  const std::u32string alphabet = U"abc_xyz中国人的一é😀";
  const std::vector<std::string> tag_pool = {"NN", "VV", "PU", "A-D", "中", "X"};
  int corpus_bad = 0, model_bad = 0;
  for (int k = 0; k < kRoundTripCases; ++k) {
    TagSet tags;
    for (std::size_t t = 0, m = 1 + rng.below(tag_pool.size()); t < m; ++t) tags.add(tag_pool[t]);
    std::string text;
    for (std::size_t line = 0, lines = 1 + rng.below(6); line < lines; ++line) {
      Sentence s;
      const int n = 1 + static_cast<int>(rng.below(15));
      for (int i = 0; i < n; ++i) s.chars += alphabet[rng.below(alphabet.size())];
      for (const auto& sp : testing::random_partition(rng, n, 5)) {
        s.words.push_back({s.chars.substr(sp.l, sp.length()), static_cast<TagId>(rng.below(tags.pos_count()))});
      }
      text += serialize_sentence(s, tags) + "\n";
    }
    TagSet reparsed = tags;
    std::string again;
    for (const auto& s : parse_corpus(text, reparsed).sentences) again += serialize_sentence(s, reparsed) + "\n";
    if (again != text || !(reparsed == tags)) ++corpus_bad;

    TrainConfig config;
    config.embed_dim = 1 + rng.below(5);
    config.hidden = 1 + rng.below(6);
    config.mlp = 1 + rng.below(6);
    config.lr = rng.uniform(1e-5, 1e-1);
    config.dropout = rng.uniform(0, 0.9);
    config.seed = rng.next();
    std::u32string chars;
    for (char32_t ch : alphabet)
      if (rng.below(2)) chars += ch;
    Vocab vocab(chars);
    Model<float> model(dims_for(config, vocab, tags));
    model.randomize(rng.next(), rng.uniform(0.01, 100));
    const ModelArtifact art{config, vocab, tags, model};
    const auto bytes = serialize_model(art);
    const auto back = deserialize_model(bytes);
    bool same = back.config == config && back.vocab == vocab && back.tags == tags &&
                back.model.params().size() == model.params().size();
    for (std::size_t i = 0; same && i < model.params().size(); ++i) {
      const auto& a = model.params()[i].value;
      const auto& b = back.model.params()[i].value;
      same = a.shape == b.shape && std::memcmp(a.data.data(), b.data.data(), a.size() * sizeof(float)) == 0;
    }
    if (!same || serialize_model(back) != bytes) ++model_bad;
  }
  return {corpus_bad == 0 && model_bad == 0,
          fmt("%d random corpora: %d mismatches; %d random models: %d not bit-identical", kRoundTripCases, corpus_bad,
              kRoundTripCases, model_bad)};
}

// ---------------------------------------------------------------------------

Outcome t_test() {
  const std::vector<double> diffs = {0.5, 1.5, 1.0}, zeros = {0.0, 0.0, 0.0};
  const auto r = paired_t_test(diffs, zeros);
  return {std::abs(r.t - 3.464) <= kTTol && std::abs(r.p - 0.0742) <= kPTol && r.df == 2,
          fmt("differences [0.5, 1.5, 1.0]: t = %.6f (3.464 +- %.3f), df = %zu, p = %.6f (0.0742 +- %.4f)", r.t, kTTol,
              r.df, r.p, kPTol)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"gradient correctness", gradient_check},
      {"decoder partition property", decoder_property},
      {"loss oracle", loss_oracle},
      {"memorization", memorization},
      {"generalization", generalization},
      {"metric oracles", metric_oracles},
      {"reproducibility", reproducibility},
      {"round-trips", round_trips},
      {"paired t-test", t_test},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s  %d  %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
