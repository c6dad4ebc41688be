#include "spanseg/pipeline.hpp"

#include <cstdint>

#include "spanseg/encoder.hpp"
#include "spanseg/scorer.hpp"

namespace spanseg {

template <typename Real>
std::vector<TaggedSpan> predict_ids(const Model<Real>& model, std::span<const CharId> ids,
                                    int max_span_len, Exec exec) {
  if (ids.empty()) return {};
  EncodeOptions eopt;
  eopt.exec = exec;
  const auto table = encode_ids(ids, model, eopt);
  ScoreOptions sopt;
  sopt.exec = exec;
  const auto proj = project_boundaries(table, model, sopt);
  const auto seg = score_all_seg(proj, max_span_len, exec);
  const int n = static_cast<int>(ids.size());
  const auto segmentation = post_process(threshold_candidates(seg), n);
  const auto tags = score_all_tag(proj, model, segmentation, exec);
  return assign_tags(segmentation, tags, static_cast<TagId>(model.dims().tags - 1));
}

template <typename Real>
std::vector<TaggedSpan> predict_sentence(const Model<Real>& model, const Vocab& vocab,
                                         std::u32string_view chars, int max_span_len,
                                         Exec exec) {
  const auto ids = vocab.encode(chars);
  return predict_ids<Real>(model, ids, max_span_len, exec);
}

template <typename Real>
std::vector<std::vector<TaggedSpan>> predict_batch(const Model<Real>& model,
                                                   const Vocab& vocab,
                                                   const std::vector<std::u32string>& sentences,
                                                   int max_span_len, bool parallel) {
  std::vector<std::vector<TaggedSpan>> out(sentences.size());
  const auto count = static_cast<std::int64_t>(sentences.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = predict_sentence(model, vocab, sentences[k], max_span_len);
  }
  return out;
}

#define SPANSEG_INSTANTIATE(Real)                                                         \
  template std::vector<TaggedSpan> predict_ids<Real>(const Model<Real>&,                 \
                                                     std::span<const CharId>, int, Exec); \
  template std::vector<TaggedSpan> predict_sentence<Real>(                               \
      const Model<Real>&, const Vocab&, std::u32string_view, int, Exec);                 \
  template std::vector<std::vector<TaggedSpan>> predict_batch<Real>(                     \
      const Model<Real>&, const Vocab&, const std::vector<std::u32string>&, int, bool);

SPANSEG_INSTANTIATE(float)
SPANSEG_INSTANTIATE(double)

#undef SPANSEG_INSTANTIATE

}  // namespace spanseg
