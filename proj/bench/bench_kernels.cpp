#include <benchmark/benchmark.h>

#include <vector>

#include "spanseg/kernels.hpp"
#include "spanseg/pipeline.hpp"
#include "spanseg/synthetic.hpp"
#include "spanseg/tensor.hpp"

using namespace spanseg;

namespace {

std::vector<float> random_vec(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1, 1));
  return v;
}

template <Exec E>
void BM_affine_rows(benchmark::State& state) {
  const std::size_t rows = static_cast<std::size_t>(state.range(0)), in = 400, out = 500;
  const auto x = random_vec(rows * in, 1), w = random_vec(out * in, 2), b = random_vec(out, 3);
  std::vector<float> y(rows * out);
  for (auto _ : state) {
    kernels::affine_rows(E, x.data(), rows, in, w.data(), b.data(), out, y.data());
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows * in * out));
}

template <Exec E>
void BM_affine_rows_backward(benchmark::State& state) {
  const std::size_t rows = static_cast<std::size_t>(state.range(0)), in = 400, out = 500;
  const auto x = random_vec(rows * in, 1), w = random_vec(out * in, 2), dy = random_vec(rows * out, 3);
  std::vector<float> dw(out * in), db(out), dx(rows * in);
  for (auto _ : state) {
    kernels::affine_rows_backward(E, x.data(), rows, in, w.data(), out, dy.data(), dw.data(), db.data(),
                                  dx.data());
    benchmark::DoNotOptimize(dw.data());
  }
}

template <Exec E>
void BM_span_dots(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), K = 7;
  const std::size_t width = 501;
  const auto left = random_vec((n + 1) * width, 4), right = random_vec((n + 1) * width, 5);
  std::vector<double> logits(static_cast<std::size_t>(n * K));
  for (auto _ : state) {
    kernels::span_dots(E, left.data(), right.data(), width, n, K, logits.data());
    benchmark::DoNotOptimize(logits.data());
  }
}

template <Exec E>
void BM_tag_biaffine(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const std::size_t width = 101, tags = 34;
  const auto left = random_vec((n + 1) * width, 6), right = random_vec((n + 1) * width, 7);
  const auto w = random_vec(tags * width * width, 8);
  std::vector<Span> spans;
  for (int l = 0; l < n; l += 2) spans.push_back({l, std::min(n, l + 2)});
  std::vector<double> scores(spans.size() * tags);
  for (auto _ : state) {
    kernels::tag_biaffine(E, left.data(), right.data(), width, w.data(), tags, spans, scores.data());
    benchmark::DoNotOptimize(scores.data());
  }
}

void BM_predict_batch(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  TagSet tags;
  const auto corpus = parse_corpus(lexicon_text(200, 3), tags);
  const auto vocab = build_vocab(corpus);
  ModelDims d;
  d.vocab = vocab.size();
  d.embed = 32;
  d.hidden = 64;
  d.mlp = 64;
  d.tags = tags.size();
  Model<float> model(d);
  model.initialize(1);
  std::vector<std::u32string> sentences;
  for (const auto& s : corpus.sentences) sentences.push_back(s.chars);
  for (auto _ : state) benchmark::DoNotOptimize(predict_batch(model, vocab, sentences, 7, parallel));
}

}  // namespace

BENCHMARK(BM_affine_rows<Exec::serial>)->Arg(16)->Arg(64);
BENCHMARK(BM_affine_rows<Exec::parallel>)->Arg(16)->Arg(64);
BENCHMARK(BM_affine_rows_backward<Exec::serial>)->Arg(64);
BENCHMARK(BM_affine_rows_backward<Exec::parallel>)->Arg(64);
BENCHMARK(BM_span_dots<Exec::serial>)->Arg(40)->Arg(200);
BENCHMARK(BM_span_dots<Exec::parallel>)->Arg(40)->Arg(200);
BENCHMARK(BM_tag_biaffine<Exec::serial>)->Arg(40);
BENCHMARK(BM_tag_biaffine<Exec::parallel>)->Arg(40);
BENCHMARK(BM_predict_batch)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
